#include "trick/errors.hpp"

namespace trick {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::clock_mismatch: return "ClockMismatch";
    case ErrorCode::negative_rtt: return "NegativeRtt";
    case ErrorCode::insufficient_samples: return "InsufficientSamples";
    case ErrorCode::negative_delay: return "NegativeDelay";
    case ErrorCode::unauthenticated_response: return "UnauthenticatedResponse";
    case ErrorCode::stale_reference: return "StaleReference";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::degenerate_geometry: return "DegenerateGeometry";
    case ErrorCode::focus_coincidence: return "FocusCoincidence";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace trick
