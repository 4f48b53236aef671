#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "georf/dataset.hpp"
#include "georf/error.hpp"
#include "georf/parallel.hpp"

namespace georf {

struct Neighbor {
  int index = -1;
  double distance = 0.0;
};

/// K-nearest-neighbor search over a fixed point set. Brute force with full
/// tie control: results are ordered by (distance, index), so queries are
/// deterministic even with duplicate coordinates. Immutable after build.
class NeighborIndex {
public:
  explicit NeighborIndex(std::vector<Point> points) : points_(std::move(points)) {}

  std::size_t size() const { return points_.size(); }
  const Point& point(std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }

  /// The k nearest stored points to `p`, excluding index `exclude` when >= 0.
  std::vector<Neighbor> query(const Point& p, int k, int exclude = -1) const {
    const std::size_t n = points_.size();
    const std::size_t available = n - (exclude >= 0 && static_cast<std::size_t>(exclude) < n ? 1 : 0);
    if (k < 1 || static_cast<std::size_t>(k) > available)
      raise(Errc::k_too_large, "knn query k=" + std::to_string(k) + " outside [1, " +
                                   std::to_string(available) + "]");

    std::vector<std::pair<double, int>> candidates; // (squared distance, index)
    candidates.reserve(available);
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<int>(i) == exclude) continue;
      candidates.emplace_back(squared_distance(p, points_[i]), static_cast<int>(i));
    }
    const auto mid = candidates.begin() + k;
    std::partial_sort(candidates.begin(), mid, candidates.end());
    std::vector<Neighbor> out(k);
    for (int j = 0; j < k; ++j) out[j] = {candidates[j].second, std::sqrt(candidates[j].first)};
    return out;
  }

private:
  std::vector<Point> points_;
};

/// Bisquare kernel: w = (1 - (d/b)^2)^2 for d < b, 0 otherwise.
inline double bisquare(double distance, double bandwidth) {
  if (distance >= bandwidth) return 0.0;
  const double r = distance / bandwidth;
  const double t = 1.0 - r * r;
  return t * t;
}

inline std::vector<double> bisquare_weights(std::span<const double> distances, double bandwidth) {
  if (!(bandwidth > 0.0))
    raise(Errc::non_positive_bandwidth, "bisquare_weights: bandwidth must be > 0");
  std::vector<double> out(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] >= 0.0))
      raise(Errc::non_positive_bandwidth, "bisquare_weights: negative distance");
    out[i] = bisquare(distances[i], bandwidth);
  }
  return out;
}

/// Row-standardized binary KNN spatial weights: every point has exactly k
/// neighbors, each carrying weight 1/k. Not symmetrized.
struct KnnWeightMatrix {
  int k = 0;
  std::vector<std::vector<int>> neighbors; // neighbors[i] sorted by (distance, index)

  double weight() const { return 1.0 / static_cast<double>(k); }
  std::size_t size() const { return neighbors.size(); }
};

inline KnnWeightMatrix knn_weight_matrix(const NeighborIndex& index, int k) {
  KnnWeightMatrix w;
  w.k = k;
  w.neighbors.resize(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto nn = index.query(index.point(i), k, static_cast<int>(i));
    w.neighbors[i].reserve(nn.size());
    for (const Neighbor& nb : nn) w.neighbors[i].push_back(nb.index);
  }
  return w;
}

struct MoranResult {
  int k = 0;
  double moran_i = 0.0;
  double expected_i = 0.0; // -1/(n-1)
  double z_score = 0.0;
  double p_value = 1.0;
};

namespace detail {

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

} // namespace detail

/// Global Moran's I under row-standardized KNN weights, with z-score and
/// two-sided p-value from the randomization-assumption variance.
inline MoranResult morans_i(std::span<const double> values, const KnnWeightMatrix& weights) {
  const std::size_t n = values.size();
  if (n != weights.size()) raise(Errc::length_mismatch, "morans_i: values and weights differ in length");
  if (n < 4) raise(Errc::too_few_rows, "morans_i: need at least 4 observations");

  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= nd;

  std::vector<double> z(n);
  double m2 = 0.0; // sum of squared deviations
  double z4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = values[i] - mean;
    m2 += z[i] * z[i];
    z4 += z[i] * z[i] * z[i] * z[i];
  }
  if (m2 <= 0.0) raise(Errc::zero_variance, "morans_i: attribute is constant");

  const double wij = weights.weight();
  double cross = 0.0; // sum_ij w_ij z_i z_j
  double w_sum = 0.0; // S0
  std::vector<double> col_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j : weights.neighbors[i]) {
      cross += wij * z[i] * z[j];
      w_sum += wij;
      col_sum[j] += wij;
    }
  }

  // S1 = 1/2 sum_ij (w_ij + w_ji)^2 over the union support; each unordered
  // pair {i,j} contributes (w_ij + w_ji)^2 once.
  std::vector<std::vector<int>> sorted_neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    sorted_neighbors[i] = weights.neighbors[i];
    std::sort(sorted_neighbors[i].begin(), sorted_neighbors[i].end());
  }
  const auto linked = [&](int from, int to) {
    const auto& v = sorted_neighbors[from];
    return std::binary_search(v.begin(), v.end(), to);
  };
  double s1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int j : weights.neighbors[i]) {
      const bool mutual = linked(j, static_cast<int>(i));
      if (mutual) {
        if (static_cast<int>(i) < j) s1 += (wij + wij) * (wij + wij);
      } else {
        s1 += wij * wij;
      }
    }
  }
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double row_sum = wij * static_cast<double>(weights.neighbors[i].size());
    const double t = row_sum + col_sum[i];
    s2 += t * t;
  }

  MoranResult result;
  result.k = weights.k;
  result.moran_i = (nd / w_sum) * cross / m2;
  result.expected_i = -1.0 / (nd - 1.0);

  // Randomization-assumption variance (Cliff & Ord).
  const double b2 = nd * z4 / (m2 * m2);
  const double w2 = w_sum * w_sum;
  const double num = nd * ((nd * nd - 3.0 * nd + 3.0) * s1 - nd * s2 + 3.0 * w2) -
                     b2 * ((nd * nd - nd) * s1 - 2.0 * nd * s2 + 6.0 * w2);
  const double den = (nd - 1.0) * (nd - 2.0) * (nd - 3.0) * w2;
  const double variance = num / den - result.expected_i * result.expected_i;
  if (variance > 0.0) {
    result.z_score = (result.moran_i - result.expected_i) / std::sqrt(variance);
    result.p_value = 2.0 * detail::normal_sf(std::abs(result.z_score));
  } else {
    result.z_score = 0.0;
    result.p_value = 1.0;
  }
  return result;
}

/// Incremental spatial autocorrelation scan: Moran's I of the target over a
/// grid of neighbor counts. selected_lambda is the k with the highest z-score
/// (ties toward smaller k); selected_alpha is that k's Moran's I when it is
/// positive and significant, 0 otherwise.
struct IsaScanResult {
  std::vector<MoranResult> results;
  int selected_lambda = 0;
  double selected_alpha = 0.0;
};

/// Default scan bounds: k from max(2, ceil(0.05 n)) to floor(0.95 n), capped
/// at n-1.
inline std::pair<int, int> default_isa_bounds(std::size_t n) {
  const int lo = std::max(2, static_cast<int>(std::ceil(0.05 * static_cast<double>(n))));
  int hi = static_cast<int>(std::floor(0.95 * static_cast<double>(n)));
  hi = std::min(hi, static_cast<int>(n) - 1);
  return {lo, std::max(lo, hi)};
}

inline IsaScanResult isa_scan(const SpatialDataset& data, int k_min, int k_max, int k_step = 1,
                              double significance = 0.05, int workers = 1) {
  const std::size_t n = data.size();
  if (k_step < 1) raise(Errc::invalid_config, "isa_scan: k_step must be >= 1");
  if (k_min < 2 || k_min > k_max || static_cast<std::size_t>(k_max) > n - 1)
    raise(Errc::empty_grid, "isa_scan: need 2 <= k_min <= k_max <= n-1");

  std::vector<int> grid;
  for (int k = k_min; k <= k_max; k += k_step) grid.push_back(k);
  if (grid.empty()) raise(Errc::empty_grid, "isa_scan: empty k grid");

  // One sorted neighbor list per point up to k_max; per-k matrices are its
  // prefixes.
  NeighborIndex index(data.coords());
  std::vector<std::vector<int>> order(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto nn = index.query(index.point(i), k_max, static_cast<int>(i));
    order[i].reserve(nn.size());
    for (const Neighbor& nb : nn) order[i].push_back(nb.index);
  });

  IsaScanResult scan;
  scan.results.resize(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t g) {
    const int k = grid[g];
    KnnWeightMatrix w;
    w.k = k;
    w.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      w.neighbors[i].assign(order[i].begin(), order[i].begin() + k);
    scan.results[g] = morans_i(data.targets(), w);
  });

  std::size_t best = 0;
  for (std::size_t g = 1; g < scan.results.size(); ++g) {
    if (scan.results[g].z_score > scan.results[best].z_score) best = g;
  }
  const MoranResult& top = scan.results[best];
  scan.selected_lambda = top.k;
  scan.selected_alpha = (top.moran_i > 0.0 && top.p_value < significance)
                            ? std::min(top.moran_i, 1.0)
                            : 0.0;
  return scan;
}

} // namespace georf
