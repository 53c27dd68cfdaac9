#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmreach {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Length mismatch between vectors, rectangles, or system dimensions.
struct DimensionError : Error {
  using Error::Error;
};

// NaN entries, empty state vectors, non-finite disturbance bounds and the like.
struct ValueError : Error {
  using Error::Error;
};

// rect_of called on a pair (x, xhat) with x !<= xhat.
struct NotARectangle : Error {
  using Error::Error;
};

// A point lies outside the declared state domain or disturbance box.
struct DomainError : Error {
  using Error::Error;
};

// An evaluator produced a non-finite value.
struct EvalError : Error {
  using Error::Error;
};

// A decomposition constructor was handed inputs it cannot honour
// (inconsistent bounds, hypothesis failures, malformed expressions).
struct ConstructionError : Error {
  using Error::Error;
};

// A monomial shape outside the supported piecewise menu.
struct UnsupportedMonomial : ConstructionError {
  using ConstructionError::ConstructionError;
};

// An operation's stated precondition does not hold.
struct PreconditionFailed : Error {
  using Error::Error;
};

// Iterative solver gave up; carries the best iterate seen so far.
struct NoConvergence : Error {
  std::vector<double> best_point;
  double best_residual = std::numeric_limits<double>::quiet_NaN();

  using Error::Error;
  NoConvergence(const std::string& what, std::vector<double> best, double residual)
      : Error(what), best_point(std::move(best)), best_residual(residual) {}
};

// A certification routine declined to certify (negative margin, bad witness).
struct CertificationRefused : Error {
  using Error::Error;
};

// The adaptive integrator could not complete a step.
struct IntegrationError : Error {
  using Error::Error;
};

// Malformed configuration file or command line.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace mmreach
