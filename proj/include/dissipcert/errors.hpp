#pragma once

#include <stdexcept>
#include <string>

namespace dissipcert {

// Error hierarchy used across the library.  Everything derives from
// std::runtime_error so callers can catch broadly; the concrete types carry
// the data a caller needs to act on (bad sample index, condition estimate,
// JSON path, ...).

// Bad argument or precondition violation (negative dt, non-grid shift, ...).
class ArgumentError : public std::runtime_error {
 public:
  explicit ArgumentError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched matrix/signal dimensions.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// A simulation produced a non-finite sample.
class OverflowError : public std::runtime_error {
 public:
  OverflowError(const std::string& msg, long first_bad_index)
      : std::runtime_error(msg), first_bad_index(first_bad_index) {}
  long first_bad_index;
};

// Frequency response requested at (or too near) a pole.
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& msg, double omega = 0.0)
      : std::runtime_error(msg), omega(omega) {}
  double omega;
};

// Algebraic loop not solvable (I + D2*D1 singular or badly conditioned).
class WellPosednessError : public std::runtime_error {
 public:
  WellPosednessError(const std::string& msg, double condition_estimate)
      : std::runtime_error(msg), condition_estimate(condition_estimate) {}
  double condition_estimate;
};

// The requested gain does not exist (unstable system / unstable loop).
class UnboundedGainError : public std::runtime_error {
 public:
  explicit UnboundedGainError(const std::string& msg,
                              double spectral_abscissa = 0.0)
      : std::runtime_error(msg), spectral_abscissa(spectral_abscissa) {}
  double spectral_abscissa;
};

// A per-step fixed-point iteration failed to converge.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, long step_index, double residual)
      : std::runtime_error(msg), step_index(step_index), residual(residual) {}
  long step_index;
  double residual;
};

// Malformed input document.  `path` locates the offending element
// ("$.children[1].A" style) so the message is actionable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, const std::string& what_is_wrong)
      : std::runtime_error(path + ": " + what_is_wrong), path(path) {}
  std::string path;
};

// An environment-family member failed its certification check.
class RejectedMemberError : public std::runtime_error {
 public:
  RejectedMemberError(const std::string& msg, double margin)
      : std::runtime_error(msg), margin(margin) {}
  double margin;
};

}  // namespace dissipcert
