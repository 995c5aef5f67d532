#pragma once

// Brute-force reference solutions used to check the optimizers on small cases.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ubcn/metrics.hpp"
#include "ubcn/scenario.hpp"
#include "ubcn/scheduler_opt.hpp"
#include "ubcn/solver/linear_program.hpp"

namespace oracle {

using ubcn::solver::LinearProgram;
using ubcn::solver::RowSense;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Rows of lp plus its variable bounds, all as a . x <= b.
struct Halfspaces {
  std::vector<Eigen::VectorXd> a;
  std::vector<double> b;
  std::vector<bool> equality;
};

inline Halfspaces halfspaces(const LinearProgram& lp) {
  const auto n = static_cast<Eigen::Index>(lp.num_variables());
  Halfspaces h;
  auto push = [&](Eigen::VectorXd a, double b, bool eq) {
    h.a.push_back(std::move(a));
    h.b.push_back(b);
    h.equality.push_back(eq);
  };
  for (const auto& row : lp.constraints) {
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(row.coefficients.data(), n);
    switch (row.sense) {
      case RowSense::LessEqual: push(a, row.rhs, false); break;
      case RowSense::GreaterEqual: push(-a, -row.rhs, false); break;
      case RowSense::Equal: push(a, row.rhs, true); break;
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(j) = -1.0;
    push(e, lp.lower.empty() ? 0.0 : -lp.lower[static_cast<std::size_t>(j)], false);
    const double up = lp.upper.empty() ? ubcn::solver::kInfinity : lp.upper[static_cast<std::size_t>(j)];
    if (std::isfinite(up)) push(-e, up, false);
  }
  return h;
}

inline bool feasible(const Halfspaces& h, const Eigen::VectorXd& x, double tol) {
  for (std::size_t i = 0; i < h.a.size(); ++i) {
    const double r = h.a[i].dot(x) - h.b[i];
    if (r > tol || (h.equality[i] && r < -tol)) return false;
  }
  return true;
}

/// Best vertex of a bounded LP by enumerating every choice of n tight
/// constraints (n <= 8). nullopt when no vertex is feasible.
inline std::optional<double> lp_by_vertices(const LinearProgram& lp) {
  const std::size_t n = lp.num_variables();
  const Halfspaces h = halfspaces(lp);
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(lp.objective.data(), static_cast<Eigen::Index>(n));
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) {
    if (depth == n) {
      Eigen::MatrixXd A(n, n);
      Eigen::VectorXd b(n);
      for (std::size_t i = 0; i < n; ++i) {
        A.row(static_cast<Eigen::Index>(i)) = h.a[pick[i]].transpose();
        b(static_cast<Eigen::Index>(i)) = h.b[pick[i]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.rank() < static_cast<Eigen::Index>(n)) return;
      const Eigen::VectorXd x = lu.solve(b);
      if (!feasible(h, x, 1e-7)) return;
      const double v = c.dot(x);
      if (!best || v > *best) best = v;
      return;
    }
    for (std::size_t i = from; i < h.a.size(); ++i) {
      pick[depth] = i;
      rec(depth + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Best integer point of lp with every variable in [0, box], by enumeration.
inline std::optional<double> mip_by_enumeration(const LinearProgram& lp, int box,
                                                std::vector<double>* argmax = nullptr) {
  const std::size_t n = lp.num_variables();
  std::vector<double> x(n, 0.0);
  std::optional<double> best;
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j == n) {
      if (ubcn::solver::max_violation(lp, x) > 1e-9) return;
      const double v = std::inner_product(lp.objective.begin(), lp.objective.end(), x.begin(), 0.0);
      if (!best || v > *best) {
        best = v;
        if (argmax) *argmax = x;
      }
      return;
    }
    for (int v = 0; v <= box; ++v) {
      x[j] = v;
      rec(j + 1);
    }
  };
  rec(0);
  return best;
}

/// Every integer point of lp in [0, box]^n.
inline std::vector<std::vector<double>> integer_points(const LinearProgram& lp, int box) {
  const std::size_t n = lp.num_variables();
  std::vector<std::vector<double>> out;
  std::vector<double> x(n, 0.0);
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j == n) {
      if (ubcn::solver::max_violation(lp, x) <= 1e-9) out.push_back(x);
      return;
    }
    for (int v = 0; v <= box; ++v) {
      x[j] = v;
      rec(j + 1);
    }
  };
  rec(0);
  return out;
}

/// Best schedule by trying, in every slot, "nobody" or each BD in turn.
inline std::optional<double> schedule_by_enumeration(const ubcn::Scenario& s, const ubcn::SchedulingInstance& inst) {
  const std::size_t K = s.num_bds(), N = s.num_slots();
  const double ts = s.slot_length();
  std::vector<std::size_t> choice(N, K);  // K = nobody
  std::optional<double> best;
  std::function<void(std::size_t)> rec = [&](std::size_t n) {
    if (n == N) {
      Eigen::VectorXd thr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
      Eigen::VectorXd eng = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
      double obj = 0.0;
      for (std::size_t t = 0; t < N; ++t)
        for (std::size_t k = 0; k < K; ++k) {
          const auto kk = static_cast<Eigen::Index>(k), tt = static_cast<Eigen::Index>(t);
          if (choice[t] == k) {
            thr(kk) += ts * inst.rate(kk, tt);
            obj += inst.rate(kk, tt);
          } else {
            eng(kk) += inst.energy(kk, tt);
          }
        }
      for (std::size_t k = 0; k < K; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (thr(kk) < s.qbar(k) - 1e-9 || eng(kk) < s.ebar(k) * (1.0 - 1e-12)) return;
      }
      if (!best || obj > *best) best = obj;
      return;
    }
    for (std::size_t k = 0; k <= K; ++k) {
      choice[n] = k;
      rec(n + 1);
    }
  };
  rec(0);
  return best;
}

/// Maximizer of f on [lo, hi] over a uniform grid with the given step.
inline std::pair<double, double> grid_argmax(const std::function<double(double)>& f, double lo, double hi,
                                             double step) {
  double best_x = lo, best_v = f(lo);
  const auto steps = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 1; i <= steps; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double v = f(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return {best_x, best_v};
}

/// Euclidean projection onto {x : a_i . x <= b_i} by Dykstra's alternating
/// projections.
inline Eigen::VectorXd project_polyhedron(const Eigen::VectorXd& y, const std::vector<Eigen::VectorXd>& a,
                                          const std::vector<double>& b, std::size_t sweeps = 5000) {
  Eigen::VectorXd x = y;
  std::vector<Eigen::VectorXd> incr(a.size(), Eigen::VectorXd::Zero(y.size()));
  for (std::size_t s = 0; s < sweeps; ++s) {
    double change = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Eigen::VectorXd z = x + incr[i];
      const double viol = a[i].dot(z) - b[i];
      Eigen::VectorXd p = z;
      if (viol > 0.0) p -= viol / a[i].squaredNorm() * a[i];
      incr[i] = z - p;
      change += (p - x).squaredNorm();
      x = p;
    }
    if (change < 1e-26) break;
  }
  return x;
}

/// Maximizer of the concave quadratic -0.5 x'Qx + c'x over a polyhedron by
/// projected gradient ascent with step 1/L.
inline Eigen::VectorXd projected_gradient_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                                             const std::vector<Eigen::VectorXd>& a, const std::vector<double>& b,
                                             Eigen::VectorXd x, std::size_t iters = 20000) {
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff();
  x = project_polyhedron(x, a, b);
  for (std::size_t k = 0; k < iters; ++k) {
    const Eigen::VectorXd next = project_polyhedron(x + (c - Q * x) / L, a, b);
    const double step = (next - x).norm();
    x = next;
    if (step < 1e-12) break;
  }
  return x;
}

/// Shortest closed tour through every point, by enumerating orders that start at 0.
inline double exact_tour_length(const std::vector<ubcn::Point>& pts) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double len = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) len += (pts[order[(i + 1) % order.size()]] - pts[order[i]]).norm();
    best = std::min(best, len);
  } while (std::next_permutation(order.begin() + 1, order.end()));
  return best;
}

}  // namespace oracle
