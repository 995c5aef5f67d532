#include "ubcn/hover_fly.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include "ubcn/errors.hpp"
#include "ubcn/solver/linear_program.hpp"
#include "ubcn/trajectory_opt.hpp"

namespace ubcn {

namespace {

using solver::SmoothFunction;
using solver::SparseVector;

constexpr double kImprovementEps = 1e-10;

double dist(const std::vector<Point>& p, std::size_t a, std::size_t b) { return (p[a] - p[b]).norm(); }

bool two_opt_pass(const std::vector<Point>& p, std::vector<std::size_t>& t) {
  const std::size_t K = t.size();
  bool improved = false;
  for (std::size_t i = 0; i + 2 < K; ++i) {
    for (std::size_t j = i + 2; j < K; ++j) {
      if (i == 0 && j == K - 1) continue;  // the two edges share a node
      const std::size_t a = t[i], b = t[i + 1], c = t[j], d = t[(j + 1) % K];
      const double delta = dist(p, a, c) + dist(p, b, d) - dist(p, a, b) - dist(p, c, d);
      if (delta < -kImprovementEps) {
        std::reverse(t.begin() + static_cast<std::ptrdiff_t>(i + 1), t.begin() + static_cast<std::ptrdiff_t>(j + 1));
        improved = true;
      }
    }
  }
  return improved;
}

/// Moves one segment of 1..3 consecutive stops elsewhere, possibly reversed.
bool or_opt_move(const std::vector<Point>& p, std::vector<std::size_t>& t) {
  const std::size_t K = t.size();
  for (std::size_t len = 1; len <= 3 && len + 2 <= K; ++len) {
    for (std::size_t s = 0; s + len <= K; ++s) {
      const std::size_t first = t[s], last = t[s + len - 1];
      const std::size_t prev = t[(s + K - 1) % K], next = t[(s + len) % K];
      const double removed = dist(p, prev, first) + dist(p, last, next) - dist(p, prev, next);
      std::vector<std::size_t> rest;
      rest.reserve(K - len);
      for (std::size_t j = 0; j < K; ++j)
        if (j < s || j >= s + len) rest.push_back(t[j]);
      for (std::size_t q = 0; q < rest.size(); ++q) {
        const std::size_t b = rest[q], c = rest[(q + 1) % rest.size()];
        if (b == prev && c == next) continue;
        const double fwd = dist(p, b, first) + dist(p, last, c) - dist(p, b, c);
        const double rev = dist(p, b, last) + dist(p, first, c) - dist(p, b, c);
        const double added = std::min(fwd, rev);
        if (added - removed < -kImprovementEps) {
          std::vector<std::size_t> seg(t.begin() + static_cast<std::ptrdiff_t>(s),
                                       t.begin() + static_cast<std::ptrdiff_t>(s + len));
          if (rev < fwd) std::reverse(seg.begin(), seg.end());
          rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(q + 1), seg.begin(), seg.end());
          t = std::move(rest);
          return true;
        }
      }
    }
  }
  return false;
}

std::vector<std::size_t> stop_of_bd(const HoverPlan& plan) {
  std::vector<std::size_t> stop(plan.order.size());
  for (std::size_t i = 0; i < plan.order.size(); ++i) stop[plan.order[i]] = i;
  return stop;
}

double hover_kappa(const Scenario& s, std::size_t bd, double power) {
  return s.params().beta0 * s.ce_bd_gain(bd) * power / s.noise_power();
}

double travel_time(const Scenario& s, const HoverPlan& plan) { return plan.legs.sum() / s.params().v_max; }

void check_plan_shape(const Scenario& s, const HoverPlan& plan) {
  const auto K = static_cast<Eigen::Index>(s.num_bds());
  if (plan.order.size() != s.num_bds() || plan.positions.cols() != K + 1 || plan.times.size() != K ||
      plan.powers.size() != K || plan.legs.size() != K)
    throw std::invalid_argument("hover plan does not match the scenario");
}

/// Accepts `next` only when it is audit-clean and does not lower the EE.
HoverPlan keep_better(const Scenario& s, const HoverPlan& cur, HoverPlan next) {
  if (!evaluate_plan(s, next).feasible()) return cur;
  return benchmark_ee(s, next) >= benchmark_ee(s, cur) ? next : cur;
}

/// constant + sum weight * log2(1 + slope * x_var).
struct LogTerm {
  Eigen::Index var;
  double weight, slope;
};

SmoothFunction log_terms(std::vector<LogTerm> terms, double constant) {
  SmoothFunction f;
  f.value = [terms, constant](const Eigen::VectorXd& x) {
    double v = constant;
    for (const auto& t : terms) v += t.weight * std::log2(1.0 + t.slope * x(t.var));
    return v;
  };
  f.gradient = [terms](const Eigen::VectorXd& x, SparseVector& out) {
    out.clear();
    for (const auto& t : terms)
      out.emplace_back(t.var, t.weight * std::numbers::log2e * t.slope / (1.0 + t.slope * x(t.var)));
  };
  f.add_hessian = [terms](const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) {
    for (const auto& t : terms) {
      const double d = 1.0 + t.slope * x(t.var);
      h(t.var, t.var) -= w * t.weight * std::numbers::log2e * t.slope * t.slope / (d * d);
    }
  };
  return f;
}

/// Dinkelbach on numerator / denominator over prog's feasible set, with
/// barrier solves of the parametric problems.
Eigen::VectorXd maximize_ratio(const solver::ConcaveProgram& prog, const SmoothFunction& numerator,
                               const SmoothFunction& denominator, const Eigen::VectorXd& strict,
                               const HoverConfig& config) {
  const Eigen::Index n = prog.num_variables;
  solver::FractionalObjective frac{numerator.value, denominator.value};
  auto parametric = [&](double lambda, const Eigen::VectorXd& warm) {
    solver::ConcaveProgram sub = prog;
    sub.objective.value = [&, lambda](const Eigen::VectorXd& x) {
      return numerator.value(x) - lambda * denominator.value(x);
    };
    sub.objective.gradient = [&, lambda, n](const Eigen::VectorXd& x, SparseVector& out) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      SparseVector part;
      numerator.gradient(x, part);
      for (const auto& [j, v] : part) g(j) += v;
      denominator.gradient(x, part);
      for (const auto& [j, v] : part) g(j) -= lambda * v;
      out.clear();
      for (Eigen::Index j = 0; j < n; ++j)
        if (g(j) != 0.0) out.emplace_back(j, g(j));
    };
    sub.objective.add_hessian = [&, lambda](const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) {
      if (numerator.add_hessian) numerator.add_hessian(x, w, h);
      if (denominator.add_hessian) denominator.add_hessian(x, -lambda * w, h);
    };
    sub.start = solver::strictly_feasible(prog, warm) ? warm : strict;
    return solver::solve_concave(sub, config.barrier).x;
  };
  return solver::dinkelbach(frac, parametric, strict, config.dinkelbach).x;
}

/// Strictly feasible point near `guess`, or nothing when the interior is empty.
std::optional<Eigen::VectorXd> interior_point(const solver::ConcaveProgram& prog, const Eigen::VectorXd& guess,
                                              const HoverConfig& config) {
  if (solver::strictly_feasible(prog, guess)) return guess;
  try {
    return solver::find_strictly_feasible(prog, guess, config.barrier);
  } catch (const StartInfeasible&) {
    return std::nullopt;
  }
}

/// Data of one position SCA round. Variables: hover points of stops 0..K-1
/// (two each) followed by the leg slacks z that are in use.
struct PositionModel {
  std::size_t K = 0;
  double v_max = 0, smoothing = 0, mission_time = 0;
  std::vector<Point> w, expand;
  std::vector<double> time, power, alpha, phi, base, leg_cost;
  std::vector<Eigen::Index> zvar;  // -1 when the leg's slack is unused
  Eigen::Index nvar = 0;

  std::size_t prev(std::size_t i) const { return (i + K - 1) % K; }
  bool has_legs() const { return K > 1; }
  Eigen::Vector2d delta(const Eigen::VectorXd& x, std::size_t i) const {
    return x.segment<2>(static_cast<Eigen::Index>(2 * i)) - x.segment<2>(static_cast<Eigen::Index>(2 * prev(i)));
  }
  Eigen::Vector2d delta_expand(std::size_t i) const { return expand[i] - expand[prev(i)]; }
  double smooth_norm(const Eigen::Vector2d& d) const { return std::sqrt(d.squaredNorm() + smoothing * smoothing); }
  double bound(const Eigen::VectorXd& x, std::size_t i) const {
    return alpha[i] - phi[i] * ((w[i] - x.segment<2>(static_cast<Eigen::Index>(2 * i))).squaredNorm() - base[i]);
  }
};

using ModelPtr = std::shared_ptr<const PositionModel>;

void add_leg_gradient(const PositionModel& md, std::size_t i, const Eigen::Vector2d& g, SparseVector& out) {
  const auto a = static_cast<Eigen::Index>(2 * i), b = static_cast<Eigen::Index>(2 * md.prev(i));
  out.emplace_back(a, g(0));
  out.emplace_back(a + 1, g(1));
  out.emplace_back(b, -g(0));
  out.emplace_back(b + 1, -g(1));
}

void add_leg_block(const PositionModel& md, std::size_t i, const Eigen::Matrix2d& m, Eigen::MatrixXd& h) {
  const auto a = static_cast<Eigen::Index>(2 * i), b = static_cast<Eigen::Index>(2 * md.prev(i));
  h.block<2, 2>(a, a) += m;
  h.block<2, 2>(b, b) += m;
  h.block<2, 2>(a, b) -= m;
  h.block<2, 2>(b, a) -= m;
}

/// Hessian of the smoothed leg length.
Eigen::Matrix2d smooth_norm_hessian(const PositionModel& md, const Eigen::Vector2d& d) {
  const double r = md.smooth_norm(d);
  return Eigen::Matrix2d::Identity() / r - d * d.transpose() / (r * r * r);
}

/// scale * sum_i weight_i * bound_i + constant over the given stops.
SmoothFunction rate_bound_sum(ModelPtr md, std::vector<std::pair<std::size_t, double>> stops, double constant) {
  SmoothFunction f;
  f.value = [md, stops, constant](const Eigen::VectorXd& x) {
    double v = constant;
    for (const auto& [i, wt] : stops) v += wt * md->bound(x, i);
    return v;
  };
  f.gradient = [md, stops](const Eigen::VectorXd& x, SparseVector& out) {
    out.clear();
    for (const auto& [i, wt] : stops) {
      const auto a = static_cast<Eigen::Index>(2 * i);
      const Eigen::Vector2d g = -2.0 * wt * md->phi[i] * (x.segment<2>(a) - md->w[i]);
      out.emplace_back(a, g(0));
      out.emplace_back(a + 1, g(1));
    }
  };
  f.add_hessian = [md, stops](const Eigen::VectorXd&, double w, Eigen::MatrixXd& h) {
    for (const auto& [i, wt] : stops) {
      const auto a = static_cast<Eigen::Index>(2 * i);
      h(a, a) -= w * 2.0 * wt * md->phi[i];
      h(a + 1, a + 1) -= w * 2.0 * wt * md->phi[i];
    }
  };
  return f;
}

/// constant + sum_i weight_i * smoothed ||leg_i||.
SmoothFunction leg_length_sum(ModelPtr md, std::vector<double> weight, double constant) {
  SmoothFunction f;
  f.value = [md, weight, constant](const Eigen::VectorXd& x) {
    double v = constant;
    if (md->has_legs())
      for (std::size_t i = 0; i < md->K; ++i) v += weight[i] * md->smooth_norm(md->delta(x, i));
    return v;
  };
  f.gradient = [md, weight](const Eigen::VectorXd& x, SparseVector& out) {
    out.clear();
    if (!md->has_legs()) return;
    for (std::size_t i = 0; i < md->K; ++i) {
      const Eigen::Vector2d d = md->delta(x, i);
      add_leg_gradient(*md, i, weight[i] * d / md->smooth_norm(d), out);
    }
  };
  f.add_hessian = [md, weight](const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) {
    if (!md->has_legs()) return;
    for (std::size_t i = 0; i < md->K; ++i)
      add_leg_block(*md, i, w * weight[i] * smooth_norm_hessian(*md, md->delta(x, i)), h);
  };
  return f;
}

/// z_i^2 minus the linear lower bound of ||leg_i||^2.
SmoothFunction leg_slack_constraint(ModelPtr md, std::size_t i) {
  SmoothFunction f;
  const Eigen::Index zv = md->zvar[i];
  f.value = [md, i, zv](const Eigen::VectorXd& x) {
    const double z = x(zv);
    return z * z - squared_length_lower_bound(md->delta(x, i), md->delta_expand(i));
  };
  f.gradient = [md, i, zv](const Eigen::VectorXd& x, SparseVector& out) {
    out.clear();
    out.emplace_back(zv, 2.0 * x(zv));
    add_leg_gradient(*md, i, -2.0 * md->delta_expand(i), out);
  };
  f.add_hessian = [zv](const Eigen::VectorXd&, double w, Eigen::MatrixXd& h) { h(zv, zv) += 2.0 * w; };
  return f;
}

}  // namespace

double HoverPlan::leg(std::size_t i) const {
  return (positions.col(static_cast<Eigen::Index>(i + 1)) - positions.col(static_cast<Eigen::Index>(i))).norm();
}

void refresh_legs(HoverPlan& plan) {
  plan.legs.resize(static_cast<Eigen::Index>(plan.num_stops()));
  for (std::size_t i = 0; i < plan.num_stops(); ++i) plan.legs(static_cast<Eigen::Index>(i)) = plan.leg(i);
}

double tour_length(const std::vector<Point>& points, const std::vector<std::size_t>& order) {
  double len = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) len += dist(points, order[i], order[(i + 1) % order.size()]);
  return len;
}

std::vector<std::size_t> tsp_order(const std::vector<Point>& points) {
  const std::size_t K = points.size();
  std::vector<std::size_t> best(K);
  std::iota(best.begin(), best.end(), std::size_t{0});
  if (K <= 3) return best;
  double best_len = std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start < K; ++start) {
    std::vector<std::size_t> tour{start};
    std::vector<char> used(K, 0);
    used[start] = 1;
    while (tour.size() < K) {
      std::size_t pick = K;
      for (std::size_t j = 0; j < K; ++j)
        if (!used[j] && (pick == K || dist(points, tour.back(), j) < dist(points, tour.back(), pick))) pick = j;
      used[pick] = 1;
      tour.push_back(pick);
    }
    for (bool again = true; again;) again = two_opt_pass(points, tour) || or_opt_move(points, tour);
    const double len = tour_length(points, tour);
    if (len < best_len - kImprovementEps) {
      best_len = len;
      best = tour;
    }
  }
  std::rotate(best.begin(), std::find(best.begin(), best.end(), std::size_t{0}), best.end());
  return best;
}

double squared_length_lower_bound(const Point& d, const Point& d_expand) {
  return 2.0 * d_expand.dot(d) - d_expand.squaredNorm();
}

EnergyBreakdown benchmark_energy(const Scenario& s, const HoverPlan& plan) {
  const UavPhysics& uav = s.params().uav;
  const double v = s.params().v_max;
  EnergyBreakdown e;
  e.uav = propulsion_power(uav, v) * plan.legs.sum() / v + propulsion_power(uav, 0.0) * plan.times.sum();
  for (std::size_t i = 0; i < plan.num_stops(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    e.ce += plan.powers(ii) * (plan.times(ii) + plan.legs(ii) / v);
  }
  return e;
}

double benchmark_bd_energy(const HoverPlan& plan, const Scenario& s, std::size_t bd) {
  const double v = s.params().v_max;
  const std::size_t m = s.ce_of(bd);
  double sum = 0.0;
  for (std::size_t j = 0; j < plan.num_stops(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (s.ce_of(plan.order[j]) == m) sum += plan.powers(jj) * (plan.times(jj) + plan.legs(jj) / v);
    if (plan.order[j] == bd) sum -= plan.powers(jj) * plan.times(jj);
  }
  return s.eta(bd) * s.ce_bd_gain(bd) * sum;
}

double benchmark_stop_throughput(const Scenario& s, const HoverPlan& plan, std::size_t i) {
  const auto ii = static_cast<Eigen::Index>(i);
  const std::size_t bd = plan.order[i];
  return plan.times(ii) * exact_rate(hover_kappa(s, bd, plan.powers(ii)), s.altitude(), s.bd_position(bd), plan.hover(i));
}

double benchmark_ee(const Scenario& s, const HoverPlan& plan) {
  double thr = 0.0;
  for (std::size_t i = 0; i < plan.num_stops(); ++i) thr += benchmark_stop_throughput(s, plan, i);
  return thr / benchmark_energy(s, plan).total();
}

SolutionReport evaluate_plan(const Scenario& s, const HoverPlan& plan, double tol) {
  check_plan_shape(s, plan);
  const std::size_t K = s.num_bds();
  SolutionReport r;
  r.per_bd_throughput = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  r.per_bd_energy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < K; ++i) {
    const auto bd = static_cast<Eigen::Index>(plan.order[i]);
    r.per_bd_throughput(bd) = benchmark_stop_throughput(s, plan, i);
    r.per_bd_energy(bd) = benchmark_bd_energy(plan, s, plan.order[i]);
  }
  const EnergyBreakdown e = benchmark_energy(s, plan);
  r.uav_energy = e.uav;
  r.ce_energy = e.ce;
  r.ee = r.total_throughput() / e.total();

  auto add = [&](std::string id, double slack) { r.constraint_audit.push_back({std::move(id), slack, slack >= -tol}); };
  for (std::size_t k = 0; k < K; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    add("throughput[bd=" + std::to_string(k) + "]", r.per_bd_throughput(kk) - s.qbar(k));
    add("harvest[bd=" + std::to_string(k) + "]", r.per_bd_energy(kk) - s.ebar(k));
  }
  for (std::size_t i = 0; i < K; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    add("power[i=" + std::to_string(i) + "]", std::min(plan.powers(ii), s.params().p_max - plan.powers(ii)));
    add("hover_time[i=" + std::to_string(i) + "]", plan.times(ii));
  }
  add("time", s.params().mission_time - plan.times.sum() - travel_time(s, plan));
  add("closure", -(plan.positions.col(0) - plan.positions.col(static_cast<Eigen::Index>(K))).norm());
  return r;
}

HoverPlan initial_plan(const Scenario& s) {
  const std::size_t K = s.num_bds();
  if (K == 0) throw ConfigError("hover-and-fly needs at least one BD");
  HoverPlan plan;
  plan.order = tsp_order(s.params().bd_positions);
  plan.positions.resize(2, static_cast<Eigen::Index>(K + 1));
  for (std::size_t i = 0; i < K; ++i) plan.positions.col(static_cast<Eigen::Index>(i + 1)) = s.bd_position(plan.order[i]);
  plan.positions.col(0) = plan.positions.col(static_cast<Eigen::Index>(K));
  refresh_legs(plan);

  const double avail = s.params().mission_time - travel_time(s, plan);
  if (!(avail > 0.0)) throw Infeasible("the hover tour alone takes longer than the mission time");
  plan.times = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(K), avail / static_cast<double>(K));
  plan.powers = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(K), s.params().p_max / 2.0);
  if (evaluate_plan(s, plan).feasible()) return plan;

  // Full power; hover times from an LP that maximizes the smallest relative
  // margin of the throughput and harvesting requirements.
  plan.powers.setConstant(s.params().p_max);
  const double v = s.params().v_max;
  const std::vector<std::size_t> stop = stop_of_bd(plan);
  solver::LinearProgram lp;
  lp.objective.assign(K + 1, 0.0);
  lp.objective[K] = 1.0;  // margin
  lp.lower.assign(K + 1, 0.0);
  lp.upper.assign(K + 1, solver::kInfinity);
  lp.upper[K] = 1.0;
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t i = stop[k];
    if (s.qbar(k) > 0.0) {
      std::vector<double> row(K + 1, 0.0);
      row[i] = exact_rate(hover_kappa(s, k, plan.powers(static_cast<Eigen::Index>(i))), s.altitude(), s.bd_position(k),
                          plan.hover(i)) / s.qbar(k);
      row[K] = -1.0;
      lp.add_row(std::move(row), solver::RowSense::GreaterEqual, 1.0);
    }
    if (s.ebar(k) > 0.0) {
      const double c = s.eta(k) * s.ce_bd_gain(k) / s.ebar(k);
      std::vector<double> row(K + 1, 0.0);
      double fixed = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        if (s.ce_of(plan.order[j]) != s.ce_of(k) || j == i) continue;
        row[j] = c * s.params().p_max;
      }
      for (std::size_t j = 0; j < K; ++j)
        if (s.ce_of(plan.order[j]) == s.ce_of(k)) fixed += c * s.params().p_max * plan.legs(static_cast<Eigen::Index>(j)) / v;
      row[K] = -1.0;
      lp.add_row(std::move(row), solver::RowSense::GreaterEqual, 1.0 - fixed);
    }
  }
  std::vector<double> total(K + 1, 1.0);
  total[K] = 0.0;
  lp.add_row(std::move(total), solver::RowSense::LessEqual, avail);
  solver::LpSolution sol;
  try {
    sol = solver::solve_lp(lp);
  } catch (const Infeasible&) {
    throw Infeasible("hover-and-fly: no hover-time split meets the requirements at full power");
  }
  for (std::size_t i = 0; i < K; ++i) plan.times(static_cast<Eigen::Index>(i)) = sol.x[i];
  const SolutionReport rep = evaluate_plan(s, plan);
  if (!rep.feasible()) {
    std::ostringstream msg;
    msg << "hover-and-fly: no feasible initial plan:";
    for (const auto& c : rep.constraint_audit)
      if (!c.satisfied) msg << ' ' << c.id << " (slack " << c.slack << ')';
    throw Infeasible(msg.str());
  }
  return plan;
}

HoverPlan optimize_hover_power(const Scenario& s, const HoverPlan& plan, const HoverConfig& config) {
  check_plan_shape(s, plan);
  const std::size_t K = s.num_bds();
  const auto n = static_cast<Eigen::Index>(K);
  const double v = s.params().v_max;
  const std::vector<std::size_t> stop = stop_of_bd(plan);
  Eigen::VectorXd tau(n);
  for (Eigen::Index i = 0; i < n; ++i) tau(i) = plan.times(i) + plan.legs(i) / v;

  solver::ConcaveProgram prog;
  prog.num_variables = n;
  prog.lower = Eigen::VectorXd::Zero(n);
  prog.upper = Eigen::VectorXd::Constant(n, s.params().p_max);
  std::vector<LogTerm> all;
  for (std::size_t i = 0; i < K; ++i) {
    const std::size_t bd = plan.order[i];
    const auto ii = static_cast<Eigen::Index>(i);
    const double d2 = s.altitude() * s.altitude() + (s.bd_position(bd) - plan.hover(i)).squaredNorm();
    all.push_back({ii, plan.times(ii), hover_kappa(s, bd, 1.0) / d2});
  }
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t i = stop[k];
    if (s.qbar(k) > 0.0) {
      LogTerm t = all[i];
      t.weight = -t.weight / s.qbar(k);
      prog.constraints.push_back(log_terms({t}, 1.0));
    }
    if (s.ebar(k) > 0.0) {
      const double c = s.eta(k) * s.ce_bd_gain(k) / s.ebar(k);
      SparseVector coeff;
      for (std::size_t j = 0; j < K; ++j) {
        if (s.ce_of(plan.order[j]) != s.ce_of(k)) continue;
        const auto jj = static_cast<Eigen::Index>(j);
        const double weight = tau(jj) - (j == i ? plan.times(jj) : 0.0);
        if (weight != 0.0) coeff.emplace_back(jj, -c * weight);
      }
      prog.constraints.push_back(solver::affine_function(std::move(coeff), 1.0));
    }
  }
  const auto strict = interior_point(prog, plan.powers, config);
  if (!strict) return plan;

  const SmoothFunction numerator = log_terms(all, 0.0);
  SparseVector den;
  for (Eigen::Index i = 0; i < n; ++i) den.emplace_back(i, tau(i));
  const EnergyBreakdown e = benchmark_energy(s, plan);
  const SmoothFunction denominator = solver::affine_function(std::move(den), e.uav);

  HoverPlan next = plan;
  next.powers = maximize_ratio(prog, numerator, denominator, *strict, config).cwiseMax(0.0).cwiseMin(s.params().p_max);
  return keep_better(s, plan, std::move(next));
}

HoverPlan optimize_hover_times(const Scenario& s, const HoverPlan& plan, const HoverConfig& config) {
  check_plan_shape(s, plan);
  const std::size_t K = s.num_bds();
  const auto n = static_cast<Eigen::Index>(K);
  const double v = s.params().v_max;
  const double p_hov = propulsion_power(s.params().uav, 0.0);
  const double p_tra = propulsion_power(s.params().uav, v);
  const std::vector<std::size_t> stop = stop_of_bd(plan);

  solver::ConcaveProgram prog;
  prog.num_variables = n;
  prog.lower = Eigen::VectorXd::Zero(n);
  prog.upper = Eigen::VectorXd();
  SparseVector num, den;
  double den0 = p_tra * plan.legs.sum() / v;
  std::vector<double> rate(K);
  for (std::size_t i = 0; i < K; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::size_t bd = plan.order[i];
    rate[i] = exact_rate(hover_kappa(s, bd, plan.powers(ii)), s.altitude(), s.bd_position(bd), plan.hover(i));
    num.emplace_back(ii, rate[i]);
    den.emplace_back(ii, p_hov + plan.powers(ii));
    den0 += plan.powers(ii) * plan.legs(ii) / v;
  }
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t i = stop[k];
    if (s.qbar(k) > 0.0)
      prog.constraints.push_back(
          solver::affine_function({{static_cast<Eigen::Index>(i), -rate[i] / s.qbar(k)}}, 1.0));
    if (s.ebar(k) > 0.0) {
      const double c = s.eta(k) * s.ce_bd_gain(k) / s.ebar(k);
      SparseVector coeff;
      double fixed = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        if (s.ce_of(plan.order[j]) != s.ce_of(k)) continue;
        const auto jj = static_cast<Eigen::Index>(j);
        fixed += c * plan.powers(jj) * plan.legs(jj) / v;
        if (j != i) coeff.emplace_back(jj, -c * plan.powers(jj));
      }
      prog.constraints.push_back(solver::affine_function(std::move(coeff), 1.0 - fixed));
    }
  }
  {
    const double T = s.params().mission_time;
    SparseVector coeff;
    for (Eigen::Index i = 0; i < n; ++i) coeff.emplace_back(i, 1.0 / T);
    prog.constraints.push_back(solver::affine_function(std::move(coeff), travel_time(s, plan) / T - 1.0));
  }
  const auto strict = interior_point(prog, plan.times, config);
  if (!strict) return plan;

  HoverPlan next = plan;
  next.times = maximize_ratio(prog, solver::affine_function(std::move(num), 0.0),
                              solver::affine_function(std::move(den), den0), *strict, config)
                   .cwiseMax(0.0);
  return keep_better(s, plan, std::move(next));
}

HoverPlan optimize_hover_positions(const Scenario& s, const HoverPlan& plan, const HoverConfig& config,
                                   std::vector<HoverPlan>* history) {
  check_plan_shape(s, plan);
  const std::size_t K = s.num_bds();
  const double v = s.params().v_max;
  const double p_tra = propulsion_power(s.params().uav, v);
  const double p_hov = propulsion_power(s.params().uav, 0.0);
  const std::vector<std::size_t> stop = stop_of_bd(plan);
  HoverPlan cur = plan;
  double ee = benchmark_ee(s, cur);

  for (std::size_t round = 0; round < config.sca_rounds; ++round) {
    auto md = std::make_shared<PositionModel>();
    md->K = K;
    md->v_max = v;
    md->smoothing = config.norm_smoothing;
    md->mission_time = s.params().mission_time;
    md->nvar = static_cast<Eigen::Index>(2 * K);
    for (std::size_t i = 0; i < K; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const std::size_t bd = cur.order[i];
      const double kappa = hover_kappa(s, bd, cur.powers(ii));
      md->w.push_back(s.bd_position(bd));
      md->expand.push_back(cur.hover(i));
      md->time.push_back(cur.times(ii));
      md->power.push_back(cur.powers(ii));
      md->alpha.push_back(exact_rate(kappa, s.altitude(), md->w[i], md->expand[i]));
      md->phi.push_back(rate_bound_slope(kappa, s.altitude(), md->w[i], md->expand[i]));
      md->base.push_back((md->w[i] - md->expand[i]).squaredNorm());
      md->leg_cost.push_back((p_tra + cur.powers(ii)) / v);
    }
    // A leg slack is needed only when the leg is nonzero and it feeds a
    // harvesting requirement.
    md->zvar.assign(K, -1);
    for (std::size_t i = 0; i < K && md->has_legs(); ++i) {
      if (md->delta_expand(i).norm() <= 1e-9 || cur.powers(static_cast<Eigen::Index>(i)) <= 0.0) continue;
      bool used = false;
      for (std::size_t k : s.group(s.ce_of(cur.order[i]))) used = used || s.ebar(k) > 0.0;
      if (used) md->zvar[i] = md->nvar++;
    }

    solver::ConcaveProgram prog;
    prog.num_variables = md->nvar;
    prog.lower = Eigen::VectorXd::Constant(md->nvar, -std::numeric_limits<double>::infinity());
    prog.upper = Eigen::VectorXd::Constant(md->nvar, std::numeric_limits<double>::infinity());
    prog.lower.tail(md->nvar - static_cast<Eigen::Index>(2 * K)).setZero();
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t i = stop[k];
      if (s.qbar(k) > 0.0) prog.constraints.push_back(rate_bound_sum(md, {{i, -md->time[i] / s.qbar(k)}}, 1.0));
      if (s.ebar(k) > 0.0) {
        const double c = s.eta(k) * s.ce_bd_gain(k) / s.ebar(k);
        SparseVector coeff;
        double fixed = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
          if (s.ce_of(cur.order[j]) != s.ce_of(k)) continue;
          if (j != i) fixed += c * md->power[j] * md->time[j];
          if (md->zvar[j] >= 0) coeff.emplace_back(md->zvar[j], -c * md->power[j] / v);
        }
        prog.constraints.push_back(solver::affine_function(std::move(coeff), 1.0 - fixed));
      }
    }
    for (std::size_t i = 0; i < K; ++i)
      if (md->zvar[i] >= 0) prog.constraints.push_back(leg_slack_constraint(md, i));
    if (md->has_legs()) {
      const double T = s.params().mission_time;
      prog.constraints.push_back(leg_length_sum(md, std::vector<double>(K, 1.0 / (v * T)), cur.times.sum() / T - 1.0));
    }

    Eigen::VectorXd guess(md->nvar);
    for (std::size_t i = 0; i < K; ++i) guess.segment<2>(static_cast<Eigen::Index>(2 * i)) = md->expand[i];
    for (std::size_t i = 0; i < K; ++i)
      if (md->zvar[i] >= 0) guess(md->zvar[i]) = (1.0 - 1e-3) * md->delta_expand(i).norm();
    const auto strict = interior_point(prog, guess, config);
    if (!strict) break;

    std::vector<std::pair<std::size_t, double>> weighted;
    double fixed_energy = p_hov * cur.times.sum();
    for (std::size_t i = 0; i < K; ++i) {
      weighted.emplace_back(i, md->time[i]);
      fixed_energy += md->power[i] * md->time[i];
    }
    const SmoothFunction numerator = rate_bound_sum(md, std::move(weighted), 0.0);
    const SmoothFunction denominator = leg_length_sum(md, md->leg_cost, fixed_energy);
    const Eigen::VectorXd x = maximize_ratio(prog, numerator, denominator, *strict, config);

    HoverPlan next = cur;
    for (std::size_t i = 0; i < K; ++i)
      next.positions.col(static_cast<Eigen::Index>(i + 1)) = x.segment<2>(static_cast<Eigen::Index>(2 * i));
    next.positions.col(0) = next.positions.col(static_cast<Eigen::Index>(K));
    refresh_legs(next);
    if (!evaluate_plan(s, next).feasible()) break;
    const double next_ee = benchmark_ee(s, next);
    const double gain = next_ee - ee;
    if (gain < 0.0) break;
    cur = std::move(next);
    ee = next_ee;
    if (history) history->push_back(cur);
    if (gain < config.sca_tol) break;
  }
  return cur;
}

HoverResult optimize_hover_fly(const Scenario& s, const HoverConfig& config) {
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  HoverResult out;
  HoverPlan plan = initial_plan(s);
  double ee = benchmark_ee(s, plan);
  out.trace.initial_ee = ee;

  auto check_step = [&](double before, double after, const char* block, std::size_t it) {
    if (after < before - config.monotone_slack) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "hover-and-fly EE decreased in the " << block << " block of iteration " << it << ": " << before << " -> "
          << after;
      throw InvariantViolation(msg.str());
    }
  };

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    HoverIteration rec;
    rec.iteration = it;
    plan = optimize_hover_power(s, plan, config);
    rec.ee_power = benchmark_ee(s, plan);
    check_step(ee, rec.ee_power, "power", it);
    plan = optimize_hover_times(s, plan, config);
    rec.ee_time = benchmark_ee(s, plan);
    check_step(rec.ee_power, rec.ee_time, "hover-time", it);
    std::vector<HoverPlan> rounds;
    plan = optimize_hover_positions(s, plan, config, &rounds);
    rec.ee_position = benchmark_ee(s, plan);
    rec.sca_rounds = rounds.size();
    check_step(rec.ee_time, rec.ee_position, "position", it);

    const SolutionReport rep = evaluate_plan(s, plan);
    if (!rep.feasible()) throw InvariantViolation("hover-and-fly iterate " + std::to_string(it) + " fails the audit");
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.trace.iterations.push_back(rec);
    const double gain = rec.ee_position - ee;
    ee = rec.ee_position;
    if (gain < config.epsilon) {
      out.trace.converged = true;
      break;
    }
  }
  out.report = evaluate_plan(s, plan);
  out.plan = std::move(plan);
  return out;
}

}  // namespace ubcn
