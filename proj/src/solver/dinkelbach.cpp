#include "ubcn/solver/dinkelbach.hpp"

#include <cmath>
#include <sstream>

#include "ubcn/errors.hpp"

namespace ubcn::solver {

DinkelbachResult dinkelbach(const FractionalObjective& frac, const ParametricSolver& solver,
                            const Eigen::VectorXd& start, const DinkelbachOptions& options) {
  auto ratio = [&](const Eigen::VectorXd& x) {
    const double d = frac.denominator(x);
    if (!(d > 0.0)) throw NumericalFailure("fractional denominator is not positive");
    return frac.numerator(x) / d;
  };

  DinkelbachResult res;
  res.x = start;
  double lambda = ratio(start);
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    Eigen::VectorXd next = solver(lambda, res.x);
    const double f = frac.numerator(next) - lambda * frac.denominator(next);
    res.lambdas.push_back(lambda);
    res.residuals.push_back(f);
    res.iterations = it + 1;
    const double next_ratio = ratio(next);
    if (f <= options.tol) {
      if (next_ratio >= lambda) {
        res.x = std::move(next);
        lambda = next_ratio;
      }
      res.ratio = lambda;
      return res;
    }
    // F > 0 implies the new ratio strictly exceeds lambda.
    res.x = std::move(next);
    lambda = next_ratio;
  }
  std::ostringstream msg;
  msg << "Dinkelbach did not converge in " << options.max_iters << " iterations; lambda trace:";
  for (std::size_t i = 0; i < res.lambdas.size(); ++i) msg << ' ' << res.lambdas[i] << " (F=" << res.residuals[i] << ')';
  throw NumericalFailure(msg.str());
}

}  // namespace ubcn::solver
