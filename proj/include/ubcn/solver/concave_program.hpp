#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ubcn::solver {

using SparseVector = std::vector<std::pair<Eigen::Index, double>>;

/// Twice-differentiable scalar function. `gradient` overwrites its output with
/// the nonzero partial derivatives; `add_hessian` adds weight * Hessian into H
/// and may be left empty for affine functions.
struct SmoothFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<void(const Eigen::VectorXd&, SparseVector&)> gradient;
  std::function<void(const Eigen::VectorXd&, double, Eigen::MatrixXd&)> add_hessian;
};

/// maximize objective(x) s.t. constraints[i](x) <= 0, lower <= x <= upper.
/// The objective must be concave and every constraint convex. Empty bound
/// vectors mean unbounded; individual entries may be +-infinity.
struct ConcaveProgram {
  Eigen::Index num_variables = 0;
  SmoothFunction objective;
  std::vector<SmoothFunction> constraints;
  Eigen::VectorXd lower, upper;
  Eigen::VectorXd start;  // must be strictly feasible
};

struct BarrierOptions {
  double initial_weight = 1.0;
  double weight_growth = 10.0;
  double gap_tol = 1e-7;
  double newton_tol = 1e-9;
  double armijo = 0.25;
  double backtrack = 0.5;
  std::size_t max_newton_per_center = 200;
  std::size_t max_newton_total = 20000;
  /// Optional early exit, checked after every accepted Newton step.
  std::function<bool(const Eigen::VectorXd&)> stop_when;
};

enum class ConcaveStatus { Optimal, Stopped, NewtonFailure };

struct ConcaveSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  double gap = 0.0;  // m / t at exit
  ConcaveStatus status = ConcaveStatus::Optimal;
  std::size_t newton_steps = 0;
};

/// Log-barrier interior-point method with damped Newton centering steps.
/// Throws StartInfeasible when prog.start is not strictly feasible. A Newton
/// failure returns the best iterate with status NewtonFailure.
ConcaveSolution solve_concave(const ConcaveProgram& prog, const BarrierOptions& options = {});

/// Every constraint strictly negative and x strictly inside the box.
bool strictly_feasible(const ConcaveProgram& prog, const Eigen::VectorXd& x);

/// Phase-I search for a strictly feasible point, starting from `guess`
/// (returned unchanged when already strictly feasible). Throws StartInfeasible
/// when the constraint set has no interior.
Eigen::VectorXd find_strictly_feasible(const ConcaveProgram& prog, const Eigen::VectorXd& guess,
                                       const BarrierOptions& options = {});

/// Affine function c + a . x.
SmoothFunction affine_function(SparseVector coefficients, double constant);

}  // namespace ubcn::solver
