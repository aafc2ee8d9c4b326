#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynum {

/// Invalid configuration (bad dt, impossible demographic spec, unknown policy kind, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An action that is illegal in the current state (vaccinating a non-susceptible
/// node, moving a unit out of range, ...).
class RejectedAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an API contract (mismatched node counts, non-adjacent cells, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed wire record or serialized model; carries the byte offset of the failure.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what), offset(byte_offset) {}
  std::size_t offset = 0;
};

/// Record was well formed but uses an unknown version or message kind.
class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical solver did not reach the required residuals.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double stationarity, double feasibility)
      : std::runtime_error(what), kkt_stationarity(stationarity), kkt_feasibility(feasibility) {}
  double kkt_stationarity = 0.0;
  double kkt_feasibility = 0.0;
};

/// A remote site could not be reached within the retry budget.
class SiteUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dynum
