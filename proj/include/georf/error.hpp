#pragma once

#include <stdexcept>
#include <string>

namespace georf {

enum class Errc {
  empty_data,
  non_numeric_cell,
  missing_column,
  all_weights_zero,
  dimension_mismatch,
  k_too_large,
  non_positive_bandwidth,
  zero_variance,
  empty_grid,
  bandwidth_too_large,
  model_not_fitted,
  too_few_rows,
  length_mismatch,
  file_not_found,
  io_error,
  invalid_config,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::empty_data: return "EmptyData";
    case Errc::non_numeric_cell: return "NonNumericCell";
    case Errc::missing_column: return "MissingColumn";
    case Errc::all_weights_zero: return "AllWeightsZero";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::k_too_large: return "KTooLarge";
    case Errc::non_positive_bandwidth: return "NonPositiveBandwidthDistance";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::empty_grid: return "EmptyGrid";
    case Errc::bandwidth_too_large: return "BandwidthTooLarge";
    case Errc::model_not_fitted: return "ModelNotFitted";
    case Errc::too_few_rows: return "TooFewRows";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::file_not_found: return "FileNotFound";
    case Errc::io_error: return "IoError";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "UnknownError";
}

/// Single exception type carrying a machine-checkable error code.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

} // namespace georf
