#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trick {

enum class ErrorCode {
  invalid_argument,
  degenerate_input,
  invalid_spec,
  clock_mismatch,
  negative_rtt,
  insufficient_samples,
  negative_delay,
  unauthenticated_response,
  stale_reference,
  non_convergence,
  degenerate_geometry,
  focus_coincidence,
  config_error,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trick
