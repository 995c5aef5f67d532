#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace ubcn::solver {

/// N(x) / D(x) with D > 0 on the feasible set.
struct FractionalObjective {
  std::function<double(const Eigen::VectorXd&)> numerator;
  std::function<double(const Eigen::VectorXd&)> denominator;
};

/// Returns argmax_x N(x) - lambda D(x) over the feasible set. `warm` is the
/// previous iterate, which is always feasible.
using ParametricSolver = std::function<Eigen::VectorXd(double lambda, const Eigen::VectorXd& warm)>;

struct DinkelbachOptions {
  double tol = 1e-6;
  std::size_t max_iters = 30;
};

struct DinkelbachResult {
  Eigen::VectorXd x;
  double ratio = 0.0;
  std::size_t iterations = 0;
  std::vector<double> lambdas;    // lambda used by each parametric solve
  std::vector<double> residuals;  // F(lambda) = N(x) - lambda D(x) after each solve
};

/// Dinkelbach iteration from a feasible start. Throws NumericalFailure (with
/// the lambda trace in the message) when F does not reach tol within max_iters.
DinkelbachResult dinkelbach(const FractionalObjective& frac, const ParametricSolver& solver,
                            const Eigen::VectorXd& start, const DinkelbachOptions& options = {});

}  // namespace ubcn::solver
