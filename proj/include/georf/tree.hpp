#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "georf/dataset.hpp"
#include "georf/error.hpp"
#include "georf/random.hpp"

namespace georf {

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0; // weighted mean of routed targets (leaves only)

  bool is_leaf() const { return left < 0; }
};

/// Weighted CART regression tree. Impurity is the weighted sum of squared
/// deviations from the weighted mean; importance_raw[f] accumulates the
/// impurity decrease of every split on feature f.
struct RegressionTree {
  std::vector<TreeNode> nodes;
  std::vector<double> importance_raw;
  std::size_t n_features = 0;
};

namespace detail {

struct SplitStats {
  double sum_w = 0.0;
  double sum_wy = 0.0;
  double sum_wy2 = 0.0;
  int positive = 0; // rows with weight > 0

  double sse() const {
    if (sum_w <= 0.0) return 0.0;
    const double sse = sum_wy2 - sum_wy * sum_wy / sum_w;
    return sse > 0.0 ? sse : 0.0;
  }
  double mean() const { return sum_wy / sum_w; }
};

struct TreeBuilder {
  const SpatialDataset& data;
  std::span<const int> rows;     // dataset rows, may repeat
  std::span<const double> wts;   // aligned with rows
  int mtry;
  int min_leaf;
  Rng rng;
  RegressionTree tree;
  std::vector<int> items;        // positions into rows, partitioned in place
  std::vector<int> feature_pool; // scratch for per-node feature sampling
  std::vector<std::pair<double, int>> sorted; // (feature value, item) scratch

  TreeBuilder(const SpatialDataset& d, std::span<const int> r, std::span<const double> w, int mtry_,
              int min_leaf_, std::uint64_t seed)
      : data(d), rows(r), wts(w), mtry(mtry_), min_leaf(min_leaf_), rng(seed) {
    tree.n_features = data.feature_count();
    tree.importance_raw.assign(tree.n_features, 0.0);
    items.resize(rows.size());
    std::iota(items.begin(), items.end(), 0);
  }

  SplitStats gather(std::size_t lo, std::size_t hi) const {
    SplitStats s;
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = wts[items[i]];
      const double y = data.target(rows[items[i]]);
      s.sum_w += w;
      s.sum_wy += w * y;
      s.sum_wy2 += w * y * y;
      if (w > 0.0) ++s.positive;
    }
    return s;
  }

  /// Draws mtry distinct feature indices, returned in ascending order so that
  /// gain ties resolve to the lowest feature index.
  void sample_features() {
    const int S = static_cast<int>(tree.n_features);
    feature_pool.resize(S);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    const int k = std::min(mtry, S);
    for (int i = 0; i < k; ++i) {
      const std::size_t j = i + rng.next_index(static_cast<std::size_t>(S - i));
      std::swap(feature_pool[i], feature_pool[j]);
    }
    feature_pool.resize(k);
    std::sort(feature_pool.begin(), feature_pool.end());
  }

  int build(std::size_t lo, std::size_t hi, const SplitStats& stats) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const double node_sse = stats.sse();
    const bool constant = node_sse <= 1e-12 * std::max(1.0, std::abs(stats.sum_wy2));
    if (stats.positive < 2 * min_leaf || constant) {
      tree.nodes[node_id].value = stats.mean();
      return node_id;
    }

    sample_features();

    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (int f : feature_pool) {
      sorted.clear();
      for (std::size_t i = lo; i < hi; ++i) {
        sorted.emplace_back(data.feature(rows[items[i]], f), items[i]);
      }
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      SplitStats left;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const int item = sorted[i].second;
        const double w = wts[item];
        const double y = data.target(rows[item]);
        left.sum_w += w;
        left.sum_wy += w * y;
        left.sum_wy2 += w * y * y;
        if (w > 0.0) ++left.positive;

        if (sorted[i].first == sorted[i + 1].first) continue; // only split between distinct values
        const int right_positive = stats.positive - left.positive;
        if (left.positive < min_leaf || right_positive < min_leaf) continue;
        const double right_w = stats.sum_w - left.sum_w;
        if (left.sum_w <= 0.0 || right_w <= 0.0) continue;

        SplitStats right;
        right.sum_w = right_w;
        right.sum_wy = stats.sum_wy - left.sum_wy;
        right.sum_wy2 = stats.sum_wy2 - left.sum_wy2;
        const double gain = node_sse - left.sse() - right.sse();
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = (sorted[i].first + sorted[i + 1].first) / 2.0;
        }
      }
    }

    if (best_feature < 0) {
      tree.nodes[node_id].value = stats.mean();
      return node_id;
    }

    const auto mid_it = std::stable_partition(
        items.begin() + lo, items.begin() + hi, [&](int item) {
          return data.feature(rows[item], best_feature) <= best_threshold;
        });
    const std::size_t mid = static_cast<std::size_t>(mid_it - items.begin());

    // Recompute child stats from the actual partition and reuse them for the
    // children so importance gains telescope to root SSE minus leaf SSE.
    const SplitStats left_stats = gather(lo, mid);
    const SplitStats right_stats = gather(mid, hi);
    const double gain = node_sse - left_stats.sse() - right_stats.sse();
    tree.importance_raw[best_feature] += gain > 0.0 ? gain : 0.0;

    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    const int left_id = build(lo, mid, left_stats);
    const int right_id = build(mid, hi, right_stats);
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }
};

} // namespace detail

/// Fits a weighted CART regression tree on the given row multiset. `rows` are
/// dataset row indices (repeats allowed, e.g. from bootstrap sampling) and
/// `weights` is aligned with `rows`. Deterministic for a fixed seed.
inline RegressionTree fit_tree(const SpatialDataset& data, std::span<const int> rows,
                               std::span<const double> weights, int mtry, int min_leaf_size,
                               std::uint64_t seed) {
  if (rows.empty()) raise(Errc::empty_data, "fit_tree: empty row subset");
  if (rows.size() != weights.size())
    raise(Errc::length_mismatch, "fit_tree: rows and weights differ in length");
  const int S = static_cast<int>(data.feature_count());
  if (mtry < 1 || mtry > S)
    raise(Errc::invalid_config, "fit_tree: mtry " + std::to_string(mtry) + " outside [1, " + std::to_string(S) + "]");
  if (min_leaf_size < 1) raise(Errc::invalid_config, "fit_tree: min_leaf_size must be >= 1");
  for (double w : weights) {
    if (!(w >= 0.0)) raise(Errc::invalid_config, "fit_tree: negative or NaN weight");
  }

  detail::TreeBuilder builder(data, rows, weights, mtry, min_leaf_size, seed);
  const detail::SplitStats root = builder.gather(0, rows.size());
  if (root.positive == 0 || root.sum_w <= 0.0)
    raise(Errc::all_weights_zero, "fit_tree: all sample weights are zero");
  builder.build(0, rows.size(), root);
  return std::move(builder.tree);
}

inline double predict_tree(const RegressionTree& tree, std::span<const double> row) {
  if (row.size() != tree.n_features)
    raise(Errc::dimension_mismatch, "predict_tree: row has " + std::to_string(row.size()) +
                                        " features, tree expects " + std::to_string(tree.n_features));
  int node = 0;
  while (!tree.nodes[node].is_leaf()) {
    const TreeNode& nd = tree.nodes[node];
    node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[node].value;
}

} // namespace georf
