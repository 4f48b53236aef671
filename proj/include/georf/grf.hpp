#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "georf/dataset.hpp"
#include "georf/error.hpp"
#include "georf/forest.hpp"
#include "georf/parallel.hpp"
#include "georf/random.hpp"
#include "georf/spatial.hpp"

namespace georf {

// Weight floor for the farthest member of a neighborhood: bisquare vanishes
// exactly at the bandwidth distance, and the blend denominator must stay
// positive even when every neighbor sits at that distance.
inline constexpr double kWeightFloor = 1e-8;

struct LocalModel {
  Point anchor;
  RandomForest forest;
  std::vector<double> local_importance; // normalized, or all-zero
};

struct TrainingStats {
  int expanded_count = 0;              // local models whose sample was expanded
  std::vector<int> local_sample_sizes; // training multiset size per anchor
};

/// A fitted geographical random forest: one global forest plus one local
/// forest anchored at every training location. Immutable after fit;
/// prediction is concurrency-safe.
struct TrainedGrf {
  RandomForest global_forest;
  std::vector<LocalModel> local_models;
  GrfConfig config;
  std::optional<NeighborIndex> anchor_index;
  TrainingStats training_stats;
  std::vector<std::string> feature_names;

  bool fitted() const { return anchor_index.has_value() && !local_models.empty(); }
};

/// Local training sample expansion: when the local subset D is smaller than
/// 2*ntree, returns a uniform bootstrap multiset of size
/// min(2*ntree, 2*|D|); otherwise returns D unchanged.
inline std::vector<int> expand_local_samples(std::span<const int> local_rows, int ntree,
                                             std::uint64_t seed) {
  if (local_rows.empty()) raise(Errc::empty_data, "expand_local_samples: empty local subset");
  if (ntree < 1) raise(Errc::invalid_config, "expand_local_samples: ntree must be >= 1");
  const std::size_t d = local_rows.size();
  if (d >= 2 * static_cast<std::size_t>(ntree)) return {local_rows.begin(), local_rows.end()};
  const std::size_t size = std::min<std::size_t>(2 * static_cast<std::size_t>(ntree), 2 * d);
  Rng rng(seed);
  std::vector<int> out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = local_rows[rng.next_index(d)];
  return out;
}

namespace detail {

/// Kernel weights for a sorted neighborhood: bandwidth is the distance to the
/// farthest member, every weight is floored at kWeightFloor, and a degenerate
/// all-coincident neighborhood gets uniform weights.
inline std::vector<double> neighborhood_weights(std::span<const double> distances) {
  std::vector<double> w(distances.size(), 1.0);
  if (distances.empty()) return w;
  const double b = *std::max_element(distances.begin(), distances.end());
  if (b <= 0.0) return w; // all points coincide with the anchor
  for (std::size_t i = 0; i < distances.size(); ++i) {
    w[i] = std::max(bisquare(distances[i], b), kWeightFloor);
  }
  return w;
}

inline double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += weights[i] * values[i];
    den += weights[i];
  }
  return num / den;
}

} // namespace detail

/// Blends predictions from nearby local models: bisquare weights against the
/// farthest contributing distance, floored so every contributor stays in the
/// weighted mean.
inline double spatially_weighted_blend(std::span<const double> distances,
                                       std::span<const double> predictions) {
  if (distances.size() != predictions.size() || distances.empty())
    raise(Errc::length_mismatch, "spatially_weighted_blend: need matching non-empty inputs");
  const std::vector<double> w = detail::neighborhood_weights(distances);
  return detail::weighted_mean(predictions, w);
}

/// Trains the global forest plus one local forest per training instance. The
/// local subset for instance i holds i itself (unless config.include_anchor
/// is off) and its nearest neighbors, lambda instances in total; members are
/// weighted by the bisquare kernel over distance to the anchor. Deterministic
/// per base_seed and independent of worker count.
inline TrainedGrf fit_grf(const SpatialDataset& data, const GrfConfig& config) {
  const std::size_t n = data.size();
  config.validate(n, data.feature_count());
  const int workers = resolve_workers(config.workers);
  const int lambda = config.bandwidth_lambda;

  TrainedGrf model;
  model.config = config;
  model.feature_names = data.feature_names();
  model.global_forest = fit_forest(data, config, config.base_seed, workers);
  model.anchor_index.emplace(data.coords());
  model.local_models.resize(n);
  model.training_stats.local_sample_sizes.resize(n);

  const NeighborIndex& index = *model.anchor_index;
  std::vector<int> expanded_flags(n, 0);

  parallel_for(n, workers, [&](std::size_t i) {
    std::vector<int> subset;
    std::vector<double> dist;
    subset.reserve(lambda);
    dist.reserve(lambda);
    if (config.include_anchor) {
      subset.push_back(static_cast<int>(i));
      dist.push_back(0.0);
      for (const Neighbor& nb : index.query(index.point(i), lambda - 1, static_cast<int>(i))) {
        subset.push_back(nb.index);
        dist.push_back(nb.distance);
      }
    } else {
      for (const Neighbor& nb : index.query(index.point(i), lambda, static_cast<int>(i))) {
        subset.push_back(nb.index);
        dist.push_back(nb.distance);
      }
    }

    const std::vector<double> weights = detail::neighborhood_weights(dist);

    std::vector<int> train_rows = subset;
    std::vector<double> train_weights = weights;
    if (config.enable_i2) {
      const std::vector<int> expanded =
          expand_local_samples(subset, config.ntree, seed_mix(config.base_seed, "expand", i));
      if (expanded.size() != subset.size()) {
        expanded_flags[i] = 1;
        std::unordered_map<int, double> weight_of;
        weight_of.reserve(subset.size());
        for (std::size_t j = 0; j < subset.size(); ++j) weight_of[subset[j]] = weights[j];
        train_rows = expanded;
        train_weights.resize(expanded.size());
        for (std::size_t j = 0; j < expanded.size(); ++j) train_weights[j] = weight_of.at(expanded[j]);
      }
    }

    model.training_stats.local_sample_sizes[i] = static_cast<int>(train_rows.size());
    LocalModel& local = model.local_models[i];
    local.anchor = data.coord(i);
    local.forest = fit_forest(data, train_rows, train_weights, config,
                              seed_mix(config.base_seed, "local", i), /*workers=*/1);
    local.local_importance = local.forest.importance;
  });

  model.training_stats.expanded_count =
      static_cast<int>(std::accumulate(expanded_flags.begin(), expanded_flags.end(), 0));
  return model;
}

/// Local component of a GRF prediction. With i3 off this is the prediction of
/// the single nearest local model; with i3 on it is the spatially weighted
/// blend of the lambda nearest local models.
inline double local_prediction(const TrainedGrf& model, const Point& point,
                               std::span<const double> row) {
  if (!model.fitted()) raise(Errc::model_not_fitted, "local_prediction: model is not fitted");
  const NeighborIndex& index = *model.anchor_index;
  if (!model.config.enable_i3) {
    const auto nearest = index.query(point, 1);
    return predict_forest(model.local_models[nearest[0].index].forest, row);
  }
  const int k = std::min<int>(model.config.bandwidth_lambda, static_cast<int>(index.size()));
  const auto nearest = index.query(point, k);
  std::vector<double> distances(nearest.size());
  std::vector<double> predictions(nearest.size());
  for (std::size_t j = 0; j < nearest.size(); ++j) {
    distances[j] = nearest[j].distance;
    predictions[j] = predict_forest(model.local_models[nearest[j].index].forest, row);
  }
  return spatially_weighted_blend(distances, predictions);
}

struct GrfPrediction {
  double combined = 0.0;
  double local = 0.0;
  double global = 0.0;
};

/// Final GRF prediction: combined = alpha * local + (1 - alpha) * global.
inline GrfPrediction predict_grf(const TrainedGrf& model, const Point& point,
                                 std::span<const double> row) {
  if (!model.fitted()) raise(Errc::model_not_fitted, "predict_grf: model is not fitted");
  GrfPrediction p;
  p.global = predict_forest(model.global_forest, row);
  p.local = local_prediction(model, point, row);
  const double alpha = model.config.local_weight_alpha;
  p.combined = alpha * p.local + (1.0 - alpha) * p.global;
  return p;
}

/// Global importance plus the per-anchor local importance vectors.
struct ImportanceTable {
  std::vector<std::string> feature_names;
  std::vector<double> global;
  std::vector<Point> anchors;
  std::vector<std::vector<double>> local; // one row per anchor
};

inline ImportanceTable importance_table(const TrainedGrf& model) {
  if (!model.fitted()) raise(Errc::model_not_fitted, "importance_table: model is not fitted");
  ImportanceTable table;
  table.feature_names = model.feature_names;
  table.global = model.global_forest.importance;
  table.anchors.reserve(model.local_models.size());
  table.local.reserve(model.local_models.size());
  for (const LocalModel& lm : model.local_models) {
    table.anchors.push_back(lm.anchor);
    table.local.push_back(lm.local_importance);
  }
  return table;
}

} // namespace georf
