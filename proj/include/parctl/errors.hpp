#pragma once

#include <stdexcept>
#include <string>

namespace parctl {

/// Base class for all library errors. `code()` is a short stable token used
/// by the CLI's machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("dimension_mismatch", what) {}
};

/// Shift too close to the spectral enclosure of the operator.
class NearSingularShift : public Error {
 public:
  explicit NearSingularShift(const std::string& what) : Error("near_singular_shift", what) {}
};

class SolverBreakdown : public Error {
 public:
  SolverBreakdown(const std::string& what, double residual)
      : Error("solver_breakdown", what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

}  // namespace parctl
