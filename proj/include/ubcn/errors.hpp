#pragma once

#include <stdexcept>
#include <string>

namespace ubcn {

/// Invalid scenario or configuration content (bad dimensions, co-located devices,
/// malformed files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A program or subproblem has no feasible point.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear program whose objective is unbounded above.
class Unbounded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The start point handed to the barrier solver is not strictly feasible.
class StartInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iteration budget exhausted or a linear solve broke down.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A runtime invariant of the optimization (monotonicity, feasibility of an
/// accepted iterate) was violated.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ubcn
