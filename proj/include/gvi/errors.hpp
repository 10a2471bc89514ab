#pragma once

#include <stdexcept>
#include <string>

namespace gvi {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct InvariantViolation : Error {
  using Error::Error;
};

// Symmetric input with an eigenvalue below the PSD tolerance.
struct NotPsdError : InvariantViolation {
  NotPsdError(const std::string& msg, double lmin)
      : InvariantViolation(msg), lambda_min(lmin) {}
  double lambda_min;
};

struct SingularMatrixError : Error {
  SingularMatrixError(const std::string& msg, double lmin)
      : Error(msg), lambda_min(lmin) {}
  double lambda_min;
};

// Eigensolver failure and other unrecoverable numerics.
struct NumericalFailure : Error {
  using Error::Error;
};

// An optimizer iterate lost positive definiteness; carries the offending
// eigenvalue so instability sweeps can record the event.
struct DivergenceError : Error {
  DivergenceError(const std::string& msg, double lmin)
      : Error(msg), lambda_min(lmin) {}
  double lambda_min;
};

// Requested moment mode not supported by the potential.
struct CapabilityError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  ConfigError(const std::string& msg, int line_no = 0, std::string field_name = {})
      : Error(msg), line(line_no), field(std::move(field_name)) {}
  int line;
  std::string field;
};

}  // namespace gvi
