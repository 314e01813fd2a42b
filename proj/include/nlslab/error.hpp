#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlslab {

enum class ErrorCode {
  degenerate_input,     // non-finite samples or malformed field
  undefined_ratio,      // GN quotient of the zero field
  solver_failure,       // shooting bracket not found
  certification,        // ground state failed its identities
  domain_too_small,     // soliton tail does not fit the box
  boundary_excluded,    // mass-energy ratio at or above the threshold
  undefined_transform,  // Galilean reduction of a massless field
  untrusted_variance,   // too much mass near the periodic boundary
  not_applicable,       // blow-up bound hypotheses violated
  out_of_range,         // radius or parameter outside its admissible range
  mode_mismatch,        // operation requires a different grid kind
  overflow,             // evolution produced non-finite samples
  zero_mass,
  domain_escape,        // rescaled field leaves the box
  bad_magic,
  version_mismatch,
  truncated,
  parse_error,
  io_error,
  invalid_argument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::degenerate_input: return "degenerate-input";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::certification: return "certification";
    case ErrorCode::domain_too_small: return "domain-too-small";
    case ErrorCode::boundary_excluded: return "boundary-excluded";
    case ErrorCode::undefined_transform: return "undefined-transform";
    case ErrorCode::untrusted_variance: return "untrusted-variance";
    case ErrorCode::not_applicable: return "not-applicable";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::mode_mismatch: return "mode-mismatch";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::zero_mass: return "zero-mass";
    case ErrorCode::domain_escape: return "domain-escape";
    case ErrorCode::bad_magic: return "bad-magic";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

/// Single exception type for the library; `code()` tells callers which
/// contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nlslab
