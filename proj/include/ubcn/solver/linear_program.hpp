#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace ubcn::solver {

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct LinearConstraint {
  std::vector<double> coefficients;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// maximize objective . x  subject to rows and lower <= x <= upper.
/// Empty bound vectors mean [0, +inf). Lower bounds must be finite.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_variables() const { return objective.size(); }
  void add_row(std::vector<double> coefficients, RowSense sense, double rhs) {
    constraints.push_back({std::move(coefficients), sense, rhs});
  }
};

/// Valid inequality coefficients . x >= rhs over the original variables.
struct Cut {
  std::vector<double> coefficients;
  double rhs = 0.0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LpOptions {
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  double feasibility_tol = 1e-7;
  /// Consecutive degenerate pivots tolerated before switching to Bland's rule for good.
  std::size_t degenerate_streak = 50;
  std::size_t max_pivots = 200000;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Dense two-phase primal simplex. Throws Infeasible, Unbounded or
/// NumericalFailure (pivot budget), and std::invalid_argument for malformed input.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Largest violation of rows and bounds at x (0 when feasible).
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace ubcn::solver
