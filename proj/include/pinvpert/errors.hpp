#pragma once

#include <stdexcept>
#include <string>

namespace pinvpert {

/// Shapes of the operands do not fit the operation.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative kernel ran out of sweeps before converging.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A square system is singular relative to the rank cutoff.
class SingularMatrixError : public std::runtime_error {
public:
  SingularMatrixError(const std::string& what, double smallest_sigma)
      : std::runtime_error(what), smallest_sigma_(smallest_sigma) {}

  double smallest_sigma() const noexcept { return smallest_sigma_; }

private:
  double smallest_sigma_;
};

/// The hypotheses of an update formula are not met, so the closed form is not applied.
/// `condition()` names the failing condition, e.g. "‖T†S‖ ≥ 1".
class HypothesisRefusal : public std::runtime_error {
public:
  explicit HypothesisRefusal(const std::string& condition)
      : std::runtime_error("hypothesis not satisfied: " + condition), condition_(condition) {}

  const std::string& condition() const noexcept { return condition_; }

private:
  std::string condition_;
};

/// An identity that must hold whenever the hypotheses hold was observed to
/// fail numerically. This always signals a bug or a rank-decision problem.
class InvariantViolation : public std::logic_error {
public:
  InvariantViolation(const std::string& name, double measured, double allowed)
      : std::logic_error("invariant violated: " + name + " (measured " + std::to_string(measured) +
                         ", allowed " + std::to_string(allowed) + ")"),
        name_(name),
        measured_(measured),
        allowed_(allowed) {}

  const std::string& name() const noexcept { return name_; }
  double measured() const noexcept { return measured_; }
  double allowed() const noexcept { return allowed_; }

private:
  std::string name_;
  double measured_;
  double allowed_;
};

}  // namespace pinvpert
