#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qkm {

/// Invalid user-supplied configuration (bad parameter ranges, unknown keys, bad qubit indices).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative solver ran out of iterations; carries the last KKT gap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Linear solve failed (e.g. Cholesky on an indefinite matrix).
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pipeline failure tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error("[" + stage + "] " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace qkm
