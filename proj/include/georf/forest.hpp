#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "georf/dataset.hpp"
#include "georf/error.hpp"
#include "georf/parallel.hpp"
#include "georf/random.hpp"
#include "georf/tree.hpp"

namespace georf {

/// Bagged regression forest. `importance` is the normalized sum of per-tree
/// impurity importances: entries in [0, 1] summing to 1, or all zero when no
/// split ever reduced impurity.
struct RandomForest {
  std::vector<RegressionTree> trees;
  int ntree = 0;
  int mtry = 0; // resolved feature-subset size
  std::size_t n_features = 0;
  std::vector<double> importance;
};

/// Draws `size` indices from [0, n) i.i.d. with replacement: uniformly when
/// `weights` is empty, otherwise with probability proportional to weight.
inline std::vector<int> bootstrap_sample(std::size_t n, std::span<const double> weights,
                                         std::size_t size, std::uint64_t seed) {
  if (n < 1) raise(Errc::empty_data, "bootstrap_sample: n must be >= 1");
  if (size < 1) raise(Errc::empty_data, "bootstrap_sample: size must be >= 1");
  Rng rng(seed);
  std::vector<int> out(size);
  if (weights.empty()) {
    for (std::size_t i = 0; i < size; ++i) out[i] = static_cast<int>(rng.next_index(n));
    return out;
  }
  if (weights.size() != n) raise(Errc::length_mismatch, "bootstrap_sample: weights length != n");
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0)) raise(Errc::invalid_config, "bootstrap_sample: negative or NaN weight");
    total += w;
    cumulative[i] = total;
  }
  if (total <= 0.0) raise(Errc::all_weights_zero, "bootstrap_sample: all weights are zero");
  for (std::size_t i = 0; i < size; ++i) {
    const double u = rng.next_unit() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    out[i] = static_cast<int>(std::min<std::size_t>(it - cumulative.begin(), n - 1));
  }
  return out;
}

/// Fits `config.ntree` trees, each on an independent bootstrap sample of the
/// given subset (sample size = subset size). Spatial weights, when present,
/// act both as sampling probabilities and as impurity weights in the trees.
/// Per-tree seeds derive from (seed, tree index), so the result is identical
/// for any worker count.
inline RandomForest fit_forest(const SpatialDataset& data, std::span<const int> rows,
                               std::span<const double> weights, const GrfConfig& config,
                               std::uint64_t seed, int workers = 1) {
  if (rows.empty()) raise(Errc::empty_data, "fit_forest: empty row subset");
  if (!weights.empty() && weights.size() != rows.size())
    raise(Errc::length_mismatch, "fit_forest: rows and weights differ in length");
  if (config.ntree < 1) raise(Errc::invalid_config, "fit_forest: ntree must be >= 1");

  const std::size_t m = rows.size();
  const int mtry = config.mtry.resolve(data.feature_count());

  RandomForest forest;
  forest.ntree = config.ntree;
  forest.mtry = mtry;
  forest.n_features = data.feature_count();
  forest.trees.resize(config.ntree);

  parallel_for(static_cast<std::size_t>(config.ntree), workers, [&](std::size_t t) {
    const std::uint64_t tree_seed = seed_mix(seed, static_cast<std::uint64_t>(t));
    const std::vector<int> picks =
        bootstrap_sample(m, weights, m, seed_mix(tree_seed, "bootstrap"));
    std::vector<int> tree_rows(m);
    std::vector<double> tree_weights(m);
    for (std::size_t j = 0; j < m; ++j) {
      tree_rows[j] = rows[picks[j]];
      tree_weights[j] = weights.empty() ? 1.0 : weights[picks[j]];
    }
    forest.trees[t] =
        fit_tree(data, tree_rows, tree_weights, mtry, config.min_leaf_size, seed_mix(tree_seed, "fit"));
  });

  forest.importance.assign(forest.n_features, 0.0);
  for (const RegressionTree& tree : forest.trees) {
    for (std::size_t f = 0; f < forest.n_features; ++f) forest.importance[f] += tree.importance_raw[f];
  }
  const double total = std::accumulate(forest.importance.begin(), forest.importance.end(), 0.0);
  if (total > 0.0) {
    for (double& v : forest.importance) v /= total;
  } else {
    std::fill(forest.importance.begin(), forest.importance.end(), 0.0);
  }
  return forest;
}

/// Convenience overload: all rows, uniform weights.
inline RandomForest fit_forest(const SpatialDataset& data, const GrfConfig& config, std::uint64_t seed,
                               int workers = 1) {
  std::vector<int> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_forest(data, rows, {}, config, seed, workers);
}

/// Unweighted mean of the individual tree predictions.
inline double predict_forest(const RandomForest& forest, std::span<const double> row) {
  if (forest.trees.empty()) raise(Errc::model_not_fitted, "predict_forest: forest has no trees");
  double sum = 0.0;
  for (const RegressionTree& tree : forest.trees) sum += predict_tree(tree, row);
  return sum / static_cast<double>(forest.trees.size());
}

} // namespace georf
