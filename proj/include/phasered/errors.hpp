#pragma once

#include <stdexcept>
#include <string>

namespace phasered {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  enum class Kind { step_underflow, left_region, max_steps, non_finite };

  IntegrationError(Kind kind, double t, const std::string& what)
      : Error(what), kind_(kind), t_(t) {}

  Kind kind() const noexcept { return kind_; }
  double time() const noexcept { return t_; }

 private:
  Kind kind_;
  double t_;
};

/// A section was not crossed, or was crossed tangentially.
class CrossingError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_estimate = 0.0,
                   double spread = 0.0)
      : Error(what), last_estimate_(last_estimate), spread_(spread) {}

  double last_estimate() const noexcept { return last_estimate_; }
  double spread() const noexcept { return spread_; }

 private:
  double last_estimate_;
  double spread_;
};

/// The orbit is not an exponentially stable, hyperbolic limit cycle.
class StabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace phasered
