#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "georf/error.hpp"

namespace georf {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Immutable point dataset: features (row-major), target, planar coordinates.
/// Construction validates shape agreement, finiteness, and name uniqueness;
/// instances are safe to share across threads.
class SpatialDataset {
public:
  SpatialDataset() = default;

  SpatialDataset(std::size_t n_features, std::vector<double> features, std::vector<double> target,
                 std::vector<Point> coords, std::vector<std::string> feature_names,
                 std::vector<std::string> row_ids)
      : n_features_(n_features),
        features_(std::move(features)),
        target_(std::move(target)),
        coords_(std::move(coords)),
        feature_names_(std::move(feature_names)),
        row_ids_(std::move(row_ids)) {
    const std::size_t n = target_.size();
    if (n < 2) raise(Errc::empty_data, "dataset needs at least 2 rows, got " + std::to_string(n));
    if (n_features_ < 1) raise(Errc::empty_data, "dataset needs at least 1 feature");
    if (features_.size() != n * n_features_)
      raise(Errc::dimension_mismatch, "feature matrix size does not match n*S");
    if (coords_.size() != n) raise(Errc::dimension_mismatch, "coords size does not match target size");
    if (feature_names_.size() != n_features_)
      raise(Errc::dimension_mismatch, "feature_names size does not match feature count");
    if (row_ids_.size() != n) raise(Errc::dimension_mismatch, "row_ids size does not match target size");

    for (double v : features_) {
      if (!std::isfinite(v)) raise(Errc::non_numeric_cell, "non-finite feature value");
    }
    for (double v : target_) {
      if (!std::isfinite(v)) raise(Errc::non_numeric_cell, "non-finite target value");
    }
    for (const Point& p : coords_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) raise(Errc::non_numeric_cell, "non-finite coordinate");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : feature_names_) {
      if (!seen.insert(name).second)
        raise(Errc::invalid_config, "duplicate feature name '" + name + "'");
    }
  }

  std::size_t size() const { return target_.size(); }
  std::size_t feature_count() const { return n_features_; }

  double feature(std::size_t row, std::size_t col) const { return features_[row * n_features_ + col]; }
  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * n_features_, n_features_};
  }
  double target(std::size_t i) const { return target_[i]; }
  std::span<const double> targets() const { return target_; }
  const Point& coord(std::size_t i) const { return coords_[i]; }
  const std::vector<Point>& coords() const { return coords_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }

  bool operator==(const SpatialDataset& other) const {
    return n_features_ == other.n_features_ && features_ == other.features_ &&
           target_ == other.target_ &&
           std::equal(coords_.begin(), coords_.end(), other.coords_.begin(), other.coords_.end(),
                      [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }) &&
           feature_names_ == other.feature_names_ && row_ids_ == other.row_ids_;
  }

private:
  std::size_t n_features_ = 0;
  std::vector<double> features_; // row-major, n * S
  std::vector<double> target_;
  std::vector<Point> coords_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> row_ids_;
};

/// Untyped table as parsed from a delimited file: header + string cells.
struct RawTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<std::string>> rows;
};

/// Which columns of a RawTable play which role.
struct ColumnSpec {
  std::vector<std::string> features;
  std::string target;
  std::string x = "x";
  std::string y = "y";
  std::string id; // optional; row index used when empty
};

struct ValidatedDataset {
  SpatialDataset dataset;
  std::vector<std::string> warnings;
};

namespace detail {

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  while (b < e && (*b == ' ' || *b == '\t' || *b == '\r')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t' || *(e - 1) == '\r')) --e;
  double value = 0.0;
  const auto res = std::from_chars(b, e, value);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(value)) {
    raise(Errc::non_numeric_cell,
          "row " + std::to_string(row + 1) + ", column '" + column + "': cannot parse '" + cell + "' as a number");
  }
  return value;
}

inline std::size_t find_column(const RawTable& raw, const std::string& name) {
  const auto it = std::find(raw.column_names.begin(), raw.column_names.end(), name);
  if (it == raw.column_names.end()) raise(Errc::missing_column, "column '" + name + "' not found in header");
  return static_cast<std::size_t>(it - raw.column_names.begin());
}

} // namespace detail

/// Builds a validated SpatialDataset from a raw table. Duplicate coordinates
/// are accepted and reported as warnings; non-numeric cells and missing
/// columns are rejected. A ColumnSpec with empty target yields a dataset with
/// an all-zero target (used for prediction inputs that carry no truth column).
inline ValidatedDataset validate_dataset(const RawTable& raw, const ColumnSpec& columns) {
  const std::size_t n = raw.rows.size();
  if (n < 2) raise(Errc::empty_data, "need at least 2 data rows, got " + std::to_string(n));
  if (columns.features.empty()) raise(Errc::missing_column, "no feature columns designated");

  std::vector<std::size_t> feature_idx;
  feature_idx.reserve(columns.features.size());
  for (const auto& f : columns.features) feature_idx.push_back(detail::find_column(raw, f));
  const std::size_t x_idx = detail::find_column(raw, columns.x);
  const std::size_t y_idx = detail::find_column(raw, columns.y);
  const bool has_target = !columns.target.empty();
  const std::size_t target_idx = has_target ? detail::find_column(raw, columns.target) : 0;
  const bool has_id = !columns.id.empty();
  const std::size_t id_idx = has_id ? detail::find_column(raw, columns.id) : 0;

  const std::size_t S = feature_idx.size();
  std::vector<double> features(n * S);
  std::vector<double> target(n, 0.0);
  std::vector<Point> coords(n);
  std::vector<std::string> row_ids(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& cells = raw.rows[i];
    if (cells.size() != raw.column_names.size()) {
      raise(Errc::non_numeric_cell, "row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                                        " cells, header has " + std::to_string(raw.column_names.size()));
    }
    for (std::size_t j = 0; j < S; ++j) {
      features[i * S + j] = detail::parse_cell(cells[feature_idx[j]], i, raw.column_names[feature_idx[j]]);
    }
    coords[i].x = detail::parse_cell(cells[x_idx], i, columns.x);
    coords[i].y = detail::parse_cell(cells[y_idx], i, columns.y);
    if (has_target) target[i] = detail::parse_cell(cells[target_idx], i, columns.target);
    row_ids[i] = has_id ? cells[id_idx] : std::to_string(i);
  }

  std::vector<std::string> warnings;
  {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t hx, hy;
      static_assert(sizeof(double) == sizeof(std::uint64_t));
      std::memcpy(&hx, &coords[i].x, sizeof(hx));
      std::memcpy(&hy, &coords[i].y, sizeof(hy));
      buckets[hx * 1000003ULL ^ hy].push_back(i);
    }
    std::vector<std::pair<std::size_t, std::size_t>> dups;
    for (const auto& [key, idxs] : buckets) {
      for (std::size_t a = 0; a < idxs.size(); ++a) {
        for (std::size_t b = a + 1; b < idxs.size(); ++b) {
          if (coords[idxs[a]].x == coords[idxs[b]].x && coords[idxs[a]].y == coords[idxs[b]].y) {
            dups.emplace_back(std::min(idxs[a], idxs[b]), std::max(idxs[a], idxs[b]));
          }
        }
      }
    }
    std::sort(dups.begin(), dups.end());
    for (const auto& [a, b] : dups) {
      warnings.push_back("rows " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                         " share coordinates");
    }
  }

  std::vector<std::string> names = columns.features;
  return {SpatialDataset(S, std::move(features), std::move(target), std::move(coords), std::move(names),
                         std::move(row_ids)),
          std::move(warnings)};
}

/// Number of candidate features tried at each split. Symbolic forms resolve
/// against the dataset's feature count at fit time.
struct MtrySpec {
  enum class Mode { fixed, all_features, one_third, sqrt_features };

  Mode mode = Mode::one_third;
  int value = 0;

  static MtrySpec fixed(int k) { return {Mode::fixed, k}; }
  static MtrySpec all() { return {Mode::all_features, 0}; }
  static MtrySpec one_third() { return {Mode::one_third, 0}; }
  static MtrySpec sqrt() { return {Mode::sqrt_features, 0}; }

  int resolve(std::size_t n_features) const {
    const int S = static_cast<int>(n_features);
    switch (mode) {
      case Mode::fixed:
        if (value < 1 || value > S)
          raise(Errc::invalid_config, "mtry " + std::to_string(value) + " outside [1, " + std::to_string(S) + "]");
        return value;
      case Mode::all_features:
        return S;
      case Mode::one_third:
        return std::max(1, (S + 2) / 3); // ceil(S/3)
      case Mode::sqrt_features:
        return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(S)))));
    }
    return 1;
  }

  static MtrySpec parse(const std::string& text) {
    if (text == "all" || text == "S") return all();
    if (text == "third" || text == "S/3") return one_third();
    if (text == "sqrt" || text == "sqrt(S)") return sqrt();
    int v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      raise(Errc::invalid_config, "cannot parse mtry '" + text + "' (expected integer, all, third, or sqrt)");
    return fixed(v);
  }

  std::string to_string() const {
    switch (mode) {
      case Mode::fixed: return std::to_string(value);
      case Mode::all_features: return "all";
      case Mode::one_third: return "third";
      case Mode::sqrt_features: return "sqrt";
    }
    return "?";
  }

  bool operator==(const MtrySpec&) const = default;
};

enum class Kernel { bisquare };

/// Hyperparameters and run controls for a geographical random forest.
/// Improvement toggles: i1 = autocorrelation-driven bandwidth/weight
/// selection, i2 = local training sample expansion, i3 = spatially weighted
/// local prediction.
struct GrfConfig {
  int ntree = 100;
  MtrySpec mtry{};
  int bandwidth_lambda = 0; // neighbor count; 0 = unset, must be [2, n-1] at fit
  double local_weight_alpha = 0.5;
  Kernel kernel = Kernel::bisquare;
  bool enable_i1 = false;
  bool enable_i2 = false;
  bool enable_i3 = false;
  std::uint64_t base_seed = 42;
  int min_leaf_size = 1;
  int workers = 0; // 0 = all hardware threads
  bool include_anchor = true;

  void validate(std::size_t n_rows, std::size_t n_features) const {
    if (ntree < 1) raise(Errc::invalid_config, "ntree must be >= 1");
    if (min_leaf_size < 1) raise(Errc::invalid_config, "min_leaf_size must be >= 1");
    if (!(local_weight_alpha >= 0.0 && local_weight_alpha <= 1.0))
      raise(Errc::invalid_config, "local_weight_alpha must be in [0, 1]");
    mtry.resolve(n_features); // throws on bad fixed value
    if (bandwidth_lambda < 2)
      raise(Errc::invalid_config, "bandwidth_lambda must be >= 2 (got " + std::to_string(bandwidth_lambda) + ")");
    if (static_cast<std::size_t>(bandwidth_lambda) >= n_rows)
      raise(Errc::bandwidth_too_large, "bandwidth_lambda " + std::to_string(bandwidth_lambda) +
                                           " must be < n = " + std::to_string(n_rows));
  }
};

} // namespace georf
