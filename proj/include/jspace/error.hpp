#pragma once

#include <stdexcept>
#include <string>

namespace jspace {

/// Stable error categories. The CLI prints the code name on the diagnostic
/// stream so callers can dispatch without parsing message text.
enum class ErrorCode {
  invalid_input,
  invalid_config,
  dimension_mismatch,
  degenerate_shape,
  budget_exceeded,
  refinement_failed,
  alignment_mismatch,
  malformed_row,
  duplicate_key,
  io_failure,
  bad_header,
  unsupported_dtype,
  length_mismatch,
  non_finite_data,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace jspace
