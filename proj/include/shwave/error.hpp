#pragma once

#include <stdexcept>
#include <string>

namespace shwave {

enum class ErrorCode {
  grid_not_covering_support,
  singular_projection_system,
  band_contains_zero_wavenumber,
  shape_mismatch,
  divergence,
  unstandardized_model,
  zero_reference,
  dataset_too_small,
  version_mismatch,
  corrupt_file,
  dimension_mismatch,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::grid_not_covering_support: return "grid-not-covering-support";
    case ErrorCode::singular_projection_system: return "singular-projection-system";
    case ErrorCode::band_contains_zero_wavenumber: return "band-contains-zero-wavenumber";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::unstandardized_model: return "unstandardized-model";
    case ErrorCode::zero_reference: return "zero-reference";
    case ErrorCode::dataset_too_small: return "dataset-too-small";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::corrupt_file: return "corrupt-file";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
  }
  return "unknown";
}

}  // namespace shwave
