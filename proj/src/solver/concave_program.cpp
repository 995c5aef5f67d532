#include "ubcn/solver/concave_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "ubcn/errors.hpp"

namespace ubcn::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Barrier {
 public:
  explicit Barrier(const ConcaveProgram& prog) : prog_(prog) {
    const Eigen::Index n = prog.num_variables;
    if (prog.lower.size() != 0 && prog.lower.size() != n) throw std::invalid_argument("lower bound size mismatch");
    if (prog.upper.size() != 0 && prog.upper.size() != n) throw std::invalid_argument("upper bound size mismatch");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (prog.lower.size() != 0 && std::isfinite(prog.lower(j))) lower_.push_back(j);
      if (prog.upper.size() != 0 && std::isfinite(prog.upper(j))) upper_.push_back(j);
    }
    for (const auto& c : prog.constraints)
      if (!c.value || !c.gradient) throw std::invalid_argument("constraint is incomplete");
  }

  std::size_t num_terms() const { return prog_.constraints.size() + lower_.size() + upper_.size(); }

  bool interior(const Eigen::VectorXd& x) const {
    for (Eigen::Index j : lower_)
      if (!(x(j) > prog_.lower(j))) return false;
    for (Eigen::Index j : upper_)
      if (!(x(j) < prog_.upper(j))) return false;
    for (const auto& c : prog_.constraints)
      if (!(c.value(x) < 0.0)) return false;
    return true;
  }

  /// -t f(x) - sum log(-g) - box logs; +inf outside the interior.
  double phi(const Eigen::VectorXd& x, double t) const {
    double v = 0.0;
    for (Eigen::Index j : lower_) {
      const double d = x(j) - prog_.lower(j);
      if (!(d > 0.0)) return kInf;
      v -= std::log(d);
    }
    for (Eigen::Index j : upper_) {
      const double d = prog_.upper(j) - x(j);
      if (!(d > 0.0)) return kInf;
      v -= std::log(d);
    }
    for (const auto& c : prog_.constraints) {
      const double g = c.value(x);
      if (!(g < 0.0)) return kInf;
      v -= std::log(-g);
    }
    const double f = prog_.objective.value(x);
    if (!std::isfinite(f)) return kInf;
    return v - t * f;
  }

  void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    grad.setZero();
    hess.setZero();
    SparseVector sv;
    prog_.objective.gradient(x, sv);
    for (const auto& [j, v] : sv) grad(j) -= t * v;
    if (prog_.objective.add_hessian) prog_.objective.add_hessian(x, -t, hess);
    for (const auto& c : prog_.constraints) {
      const double w = 1.0 / (-c.value(x));
      c.gradient(x, sv);
      for (const auto& [j, v] : sv) grad(j) += w * v;
      const double w2 = w * w;
      for (const auto& [i, vi] : sv)
        for (const auto& [j, vj] : sv) hess(i, j) += w2 * vi * vj;
      if (c.add_hessian) c.add_hessian(x, w, hess);
    }
    for (Eigen::Index j : lower_) {
      const double d = 1.0 / (x(j) - prog_.lower(j));
      grad(j) -= d;
      hess(j, j) += d * d;
    }
    for (Eigen::Index j : upper_) {
      const double d = 1.0 / (prog_.upper(j) - x(j));
      grad(j) += d;
      hess(j, j) += d * d;
    }
  }

 private:
  const ConcaveProgram& prog_;
  std::vector<Eigen::Index> lower_, upper_;
};

/// Solves H dx = -g, regularizing H when it is not numerically positive definite.
bool newton_direction(Eigen::MatrixXd& hess, const Eigen::VectorXd& grad, Eigen::VectorXd& dx) {
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() == Eigen::Success) {
    dx = llt.solve(-grad);
    if (dx.allFinite()) return true;
  }
  double shift = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 30; ++attempt, shift *= 10.0) {
    hess.diagonal().array() += shift;
    llt.compute(hess);
    if (llt.info() == Eigen::Success) {
      dx = llt.solve(-grad);
      if (dx.allFinite()) return true;
    }
  }
  return false;
}

}  // namespace

SmoothFunction affine_function(SparseVector coefficients, double constant) {
  SmoothFunction f;
  f.value = [coefficients, constant](const Eigen::VectorXd& x) {
    double v = constant;
    for (const auto& [j, a] : coefficients) v += a * x(j);
    return v;
  };
  f.gradient = [coefficients](const Eigen::VectorXd&, SparseVector& out) { out = coefficients; };
  return f;
}

bool strictly_feasible(const ConcaveProgram& prog, const Eigen::VectorXd& x) {
  if (x.size() != prog.num_variables) return false;
  return Barrier(prog).interior(x);
}

ConcaveSolution solve_concave(const ConcaveProgram& prog, const BarrierOptions& options) {
  if (!prog.objective.value || !prog.objective.gradient) throw std::invalid_argument("objective is incomplete");
  const Barrier barrier(prog);
  const Eigen::Index n = prog.num_variables;
  if (prog.start.size() != n || !barrier.interior(prog.start))
    throw StartInfeasible("start point is not strictly feasible");

  ConcaveSolution sol;
  Eigen::VectorXd x = prog.start;
  Eigen::VectorXd grad(n), dx(n);
  Eigen::MatrixXd hess(n, n);
  const double m = static_cast<double>(barrier.num_terms());
  double t = options.initial_weight;

  auto finish = [&](ConcaveStatus status) {
    sol.x = x;
    sol.objective = prog.objective.value(x);
    sol.gap = m / t;
    sol.status = status;
    return sol;
  };

  while (true) {
    for (std::size_t it = 0;; ++it) {
      if (it >= options.max_newton_per_center || sol.newton_steps >= options.max_newton_total)
        return finish(ConcaveStatus::NewtonFailure);
      barrier.derivatives(x, t, grad, hess);
      if (!grad.allFinite() || !hess.allFinite()) return finish(ConcaveStatus::NewtonFailure);
      if (!newton_direction(hess, grad, dx)) return finish(ConcaveStatus::NewtonFailure);
      const double slope = grad.dot(dx);
      const double decrement2 = -slope;
      if (decrement2 * 0.5 <= options.newton_tol) break;

      const double phi0 = barrier.phi(x, t);
      double s = 1.0;
      bool accepted = false;
      Eigen::VectorXd trial(n);
      while (s > 1e-14) {
        trial.noalias() = x + s * dx;
        const double ph = barrier.phi(trial, t);
        if (std::isfinite(ph) && ph <= phi0 + options.armijo * s * slope + 1e-13 * std::abs(phi0)) {
          accepted = true;
          break;
        }
        s *= options.backtrack;
      }
      if (!accepted) {
        // No progress possible at this precision; treat small decrements as centred.
        if (decrement2 <= 1e-6) break;
        return finish(ConcaveStatus::NewtonFailure);
      }
      x = trial;
      ++sol.newton_steps;
      if (options.stop_when && options.stop_when(x)) return finish(ConcaveStatus::Stopped);
    }
    if (m == 0.0 || m / t <= options.gap_tol) return finish(ConcaveStatus::Optimal);
    t *= options.weight_growth;
  }
}

Eigen::VectorXd find_strictly_feasible(const ConcaveProgram& prog, const Eigen::VectorXd& guess,
                                       const BarrierOptions& options) {
  const Eigen::Index n = prog.num_variables;
  if (guess.size() != n) throw std::invalid_argument("guess has the wrong size");
  if (strictly_feasible(prog, guess)) return guess;

  // Pull the guess strictly inside the box.
  Eigen::VectorXd x0 = guess;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = prog.lower.size() ? prog.lower(j) : -kInf;
    const double hi = prog.upper.size() ? prog.upper(j) : kInf;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      if (!(hi > lo)) throw StartInfeasible("box has empty interior");
      const double margin = 1e-3 * (hi - lo);
      x0(j) = std::clamp(x0(j), lo + margin, hi - margin);
    } else if (std::isfinite(lo)) {
      x0(j) = std::max(x0(j), lo + 1e-3 * std::max(1.0, std::abs(lo)));
    } else if (std::isfinite(hi)) {
      x0(j) = std::min(x0(j), hi - 1e-3 * std::max(1.0, std::abs(hi)));
    }
  }
  double worst = 0.0;
  for (const auto& c : prog.constraints) {
    const double g = c.value(x0);
    if (!std::isfinite(g)) throw StartInfeasible("constraint not finite at the phase-I start");
    worst = std::max(worst, g);
  }
  if (worst < 0.0) return x0;

  // maximize -s  s.t.  g_i(x) - s <= 0,  s >= -1.
  ConcaveProgram phase;
  phase.num_variables = n + 1;
  const Eigen::Index si = n;
  phase.objective = affine_function({{si, -1.0}}, 0.0);
  for (const auto& c : prog.constraints) {
    SmoothFunction g;
    g.value = [c, n, si](const Eigen::VectorXd& z) { return c.value(z.head(n)) - z(si); };
    g.gradient = [c, n, si](const Eigen::VectorXd& z, SparseVector& out) {
      c.gradient(z.head(n), out);
      out.emplace_back(si, -1.0);
    };
    if (c.add_hessian) {
      // the slack enters linearly, so the original Hessian indices carry over
      g.add_hessian = [c, n](const Eigen::VectorXd& z, double w, Eigen::MatrixXd& h) {
        c.add_hessian(z.head(n), w, h);
      };
    }
    phase.constraints.push_back(std::move(g));
  }
  phase.lower = Eigen::VectorXd::Constant(n + 1, -kInf);
  phase.upper = Eigen::VectorXd::Constant(n + 1, kInf);
  if (prog.lower.size()) phase.lower.head(n) = prog.lower;
  if (prog.upper.size()) phase.upper.head(n) = prog.upper;
  phase.lower(si) = -1.0;
  phase.start.resize(n + 1);
  phase.start.head(n) = x0;
  phase.start(si) = worst + 1.0;

  BarrierOptions opts = options;
  opts.gap_tol = 1e-6;
  opts.stop_when = [si](const Eigen::VectorXd& z) { return z(si) < -0.5; };
  const ConcaveSolution res = solve_concave(phase, opts);
  Eigen::VectorXd x = res.x.head(n);
  if (res.x(si) < 0.0 && strictly_feasible(prog, x)) return x;
  throw StartInfeasible("no strictly feasible point found");
}

}  // namespace ubcn::solver
