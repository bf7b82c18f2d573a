#include "jspace/error.hpp"

namespace jspace {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::degenerate_shape: return "degenerate_shape";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::refinement_failed: return "refinement_failed";
    case ErrorCode::alignment_mismatch: return "alignment_mismatch";
    case ErrorCode::malformed_row: return "malformed_row";
    case ErrorCode::duplicate_key: return "duplicate_key";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::bad_header: return "bad_header";
    case ErrorCode::unsupported_dtype: return "unsupported_dtype";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::non_finite_data: return "non_finite_data";
  }
  return "unknown";
}

}  // namespace jspace
