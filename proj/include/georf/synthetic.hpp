#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "georf/dataset.hpp"
#include "georf/random.hpp"

namespace georf {

namespace detail {

inline std::vector<std::string> default_row_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

inline std::vector<std::string> default_feature_names(std::size_t s) {
  std::vector<std::string> names(s);
  for (std::size_t j = 0; j < s; ++j) names[j] = "f" + std::to_string(j + 1);
  return names;
}

} // namespace detail

/// Two tight, well-separated clusters with near-constant target per cluster.
/// The target's spatial autocorrelation z-score peaks at k = points_per_cluster - 1,
/// the largest neighbor count that stays inside a cluster.
inline SpatialDataset make_two_cluster_dataset(int points_per_cluster, std::uint64_t seed) {
  Rng rng(seed_mix(seed, "two-cluster"));
  const std::size_t n = 2 * static_cast<std::size_t>(points_per_cluster);
  const std::size_t S = 2;
  std::vector<double> features(n * S);
  std::vector<double> target(n);
  std::vector<Point> coords(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = i >= static_cast<std::size_t>(points_per_cluster);
    const double cx = second ? 100.0 : 0.0;
    const double cy = second ? 100.0 : 0.0;
    coords[i] = {cx + rng.next_uniform(-0.5, 0.5), cy + rng.next_uniform(-0.5, 0.5)};
    target[i] = (second ? -10.0 : 10.0) + rng.next_uniform(-0.01, 0.01);
    features[i * S] = rng.next_uniform(-1.0, 1.0);
    features[i * S + 1] = rng.next_uniform(-1.0, 1.0);
  }
  return {S, std::move(features), std::move(target), std::move(coords),
          detail::default_feature_names(S), detail::default_row_ids(n)};
}

/// Square lattice with alternating +1/-1 target: strong negative spatial
/// autocorrelation at small neighbor counts.
inline SpatialDataset make_checkerboard_dataset(int side, std::uint64_t seed) {
  Rng rng(seed_mix(seed, "checkerboard"));
  const std::size_t n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  const std::size_t S = 2;
  std::vector<double> features(n * S);
  std::vector<double> target(n);
  std::vector<Point> coords(n);
  std::size_t i = 0;
  for (int iy = 0; iy < side; ++iy) {
    for (int ix = 0; ix < side; ++ix, ++i) {
      coords[i] = {static_cast<double>(ix), static_cast<double>(iy)};
      target[i] = ((ix + iy) % 2 == 0) ? 1.0 : -1.0;
      features[i * S] = rng.next_uniform(-1.0, 1.0);
      features[i * S + 1] = rng.next_uniform(-1.0, 1.0);
    }
  }
  return {S, std::move(features), std::move(target), std::move(coords),
          detail::default_feature_names(S), detail::default_row_ids(n)};
}

/// Regionally varying regression: four quadrants with distinct intercepts and
/// slopes on f1, a shared slope on f2, and one pure-noise feature. The
/// intercepts induce positive spatial autocorrelation; the slopes induce
/// spatial heterogeneity that a global model cannot express.
inline SpatialDataset make_quadrant_dataset(int n, double noise_sd, std::uint64_t seed) {
  Rng rng(seed_mix(seed, "quadrant"));
  const std::size_t S = 3;
  std::vector<double> features(static_cast<std::size_t>(n) * S);
  std::vector<double> target(n);
  std::vector<Point> coords(n);
  constexpr double intercepts[4] = {4.0, -4.0, 2.0, -2.0};
  constexpr double slopes[4] = {3.0, -3.0, 1.5, -1.5};
  for (int i = 0; i < n; ++i) {
    coords[i] = {rng.next_uniform(-1.0, 1.0), rng.next_uniform(-1.0, 1.0)};
    const int q = (coords[i].x >= 0.0 ? 0 : 1) + (coords[i].y >= 0.0 ? 0 : 2);
    const double x1 = rng.next_uniform(-1.0, 1.0);
    const double x2 = rng.next_uniform(-1.0, 1.0);
    const double x3 = rng.next_uniform(-1.0, 1.0);
    features[static_cast<std::size_t>(i) * S] = x1;
    features[static_cast<std::size_t>(i) * S + 1] = x2;
    features[static_cast<std::size_t>(i) * S + 2] = x3;
    target[i] = intercepts[q] + slopes[q] * x1 + 0.7 * x2 + noise_sd * rng.next_normal();
  }
  return {S, std::move(features), std::move(target), std::move(coords),
          detail::default_feature_names(S), detail::default_row_ids(static_cast<std::size_t>(n))};
}

/// Smooth spatial surface plus a feature effect, with a fraction of rows
/// replaced by an extreme constant value.
inline SpatialDataset make_outlier_dataset(int n, double outlier_fraction, double outlier_value,
                                           std::uint64_t seed) {
  Rng rng(seed_mix(seed, "outlier"));
  const std::size_t S = 2;
  std::vector<double> features(static_cast<std::size_t>(n) * S);
  std::vector<double> target(n);
  std::vector<Point> coords(n);
  for (int i = 0; i < n; ++i) {
    coords[i] = {rng.next_uniform(0.0, 10.0), rng.next_uniform(0.0, 10.0)};
    const double x1 = rng.next_uniform(-1.0, 1.0);
    const double x2 = rng.next_uniform(-1.0, 1.0);
    features[static_cast<std::size_t>(i) * S] = x1;
    features[static_cast<std::size_t>(i) * S + 1] = x2;
    target[i] = 3.0 * std::sin(0.6 * coords[i].x) * std::cos(0.6 * coords[i].y) + 0.8 * x1 +
                0.3 * rng.next_normal();
  }
  const int n_outliers = std::max(1, static_cast<int>(std::lround(outlier_fraction * n)));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  for (int j = 0; j < n_outliers; ++j) target[order[j]] = outlier_value;
  return {S, std::move(features), std::move(target), std::move(coords),
          detail::default_feature_names(S), detail::default_row_ids(static_cast<std::size_t>(n))};
}

/// Generic nonlinear regression surface with a mild spatial trend; extra
/// features beyond the first two are pure noise.
inline SpatialDataset make_random_dataset(int n, int n_features, std::uint64_t seed) {
  Rng rng(seed_mix(seed, "random"));
  const std::size_t S = static_cast<std::size_t>(n_features);
  std::vector<double> features(static_cast<std::size_t>(n) * S);
  std::vector<double> target(n);
  std::vector<Point> coords(n);
  for (int i = 0; i < n; ++i) {
    coords[i] = {rng.next_uniform(0.0, 1.0), rng.next_uniform(0.0, 1.0)};
    for (std::size_t j = 0; j < S; ++j)
      features[static_cast<std::size_t>(i) * S + j] = rng.next_uniform(-1.0, 1.0);
    const double x1 = features[static_cast<std::size_t>(i) * S];
    const double x2 = S > 1 ? features[static_cast<std::size_t>(i) * S + 1] : 0.0;
    target[i] = x1 + 0.5 * x2 * x2 + 0.4 * std::sin(6.283185307179586 * coords[i].x) +
                0.1 * rng.next_normal();
  }
  return {S, std::move(features), std::move(target), std::move(coords),
          detail::default_feature_names(S), detail::default_row_ids(static_cast<std::size_t>(n))};
}

} // namespace georf
