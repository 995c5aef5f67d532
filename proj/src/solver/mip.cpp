#include "ubcn/solver/mip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>

#include "simplex_model.hpp"
#include "ubcn/errors.hpp"

namespace ubcn::solver {

namespace {

double objective_of(const LinearProgram& lp, const std::vector<double>& x) {
  return std::inner_product(lp.objective.begin(), lp.objective.end(), x.begin(), 0.0);
}

std::vector<double> snap(std::vector<double> x, const std::vector<bool>& integer_vars) {
  for (std::size_t j = 0; j < x.size(); ++j)
    if (integer_vars[j]) x[j] = std::round(x[j]);
  return x;
}

bool is_integral(const std::vector<double>& x, const std::vector<bool>& integer_vars, double tol) {
  for (std::size_t j = 0; j < x.size(); ++j)
    if (integer_vars[j] && std::abs(x[j] - std::round(x[j])) > tol) return false;
  return true;
}

struct Node {
  double bound;
  std::size_t id;
  std::vector<double> lower, upper;
};

struct NodeLp {
  std::vector<double> x;
  double objective;
  std::vector<double> raise_cost;
};

std::optional<NodeLp> solve_node(const LinearProgram& base, const std::vector<double>& lower,
                                 const std::vector<double>& upper, const LpOptions& options) {
  LinearProgram sub = base;
  sub.lower = lower;
  sub.upper = upper;
  try {
    detail::SimplexModel model(sub, {}, options);
    model.solve();
    return NodeLp{model.primal(), model.objective(), model.raise_costs()};
  } catch (const Infeasible&) {
    return std::nullopt;
  }
}

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MipResult solve_mip(const LinearProgram& lp, const std::vector<bool>& integer_vars, const MipOptions& options,
                    const std::optional<std::vector<double>>& incumbent) {
  const std::size_t n = lp.num_variables();
  if (integer_vars.size() != n) throw std::invalid_argument("integer flag size mismatch");

  MipResult result;
  detail::SimplexModel model(lp, integer_vars, options.lp);
  model.solve();
  result.relaxation_objective = model.objective();

  // Cutting-plane phase.
  try {
    for (std::size_t round = 0; round <= options.cut_rounds; ++round) {
      if (model.integral(options.integrality_tol)) {
        auto x = snap(model.primal(), integer_vars);
        if (max_violation(lp, x) <= options.feasibility_tol) {
          result.x = std::move(x);
          result.objective = objective_of(lp, result.x);
          result.cuts = model.cuts();
          return result;
        }
        break;
      }
      if (round == options.cut_rounds) break;
      if (model.add_gomory_round(options.cuts_per_round, options.min_fractionality) == 0) break;
      ++result.cut_rounds;
    }
  } catch (const Infeasible&) {
    // valid cuts cannot empty a nonempty integer set; let branch-and-bound decide
  } catch (const NumericalFailure&) {
  }
  result.cuts = model.cuts();

  // Branch-and-bound over the relaxation strengthened by the root cuts. Each
  // cut's rhs is relaxed slightly so tableau roundoff cannot exclude an
  // integer point that lies exactly on it.
  LinearProgram base = lp;
  for (const Cut& cut : result.cuts) {
    double scale = 1.0;
    for (double a : cut.coefficients) scale = std::max(scale, std::abs(a));
    base.add_row(cut.coefficients, RowSense::GreaterEqual, cut.rhs - options.cut_relaxation * scale);
  }
  std::vector<double> lower = lp.lower.empty() ? std::vector<double>(n, 0.0) : lp.lower;
  std::vector<double> upper = lp.upper.empty() ? std::vector<double>(n, kInfinity) : lp.upper;

  std::optional<std::vector<double>> best;
  double best_value = -kInfinity;
  const auto offer = [&](const std::vector<double>& candidate) {
    if (!is_integral(candidate, integer_vars, options.integrality_tol)) return;
    auto x = snap(candidate, integer_vars);
    if (max_violation(lp, x) > options.feasibility_tol) return;
    const double v = objective_of(lp, x);
    if (!best || v > best_value) {
      best_value = v;
      best = std::move(x);
    }
  };
  if (incumbent && incumbent->size() == n) offer(*incumbent);

  const auto prune_gap = [&](double bound) { return bound <= best_value + 1e-9 * (1.0 + std::abs(best_value)); };
  const auto most_fractional = [&](const std::vector<double>& x) {
    std::size_t branch = n;
    double best_frac = options.integrality_tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!integer_vars[j]) continue;
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > best_frac) {
        best_frac = f;
        branch = j;
      }
    }
    return branch;
  };
  // Integer points of a node with x_j >= lower_j + t score at most z - t * d_j.
  const auto tighten = [&](const NodeLp& node, const std::vector<double>& lo, std::vector<double>& up) {
    if (!best) return;
    const double room = node.objective - best_value;
    for (std::size_t j = 0; j < n; ++j) {
      if (!integer_vars[j] || node.raise_cost[j] <= 0.0) continue;
      const double t = std::floor(room / node.raise_cost[j] + 1e-7);
      up[j] = std::min(up[j], lo[j] + std::max(t, 0.0));
    }
  };

  // Dive: repeatedly round the largest fractional variable up, stepping back
  // to rounding down once when that empties the relaxation.
  const auto dive = [&](std::vector<double> lo, std::vector<double> up) {
    auto node = solve_node(base, lo, up, options.lp);
    while (node && !(best && prune_gap(node->objective))) {
      ++result.nodes;
      if (most_fractional(node->x) == n) {
        offer(node->x);
        return;
      }
      std::size_t pick = n;
      double frac = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!integer_vars[j]) continue;
        const double f = node->x[j] - std::floor(node->x[j]);
        if (f > options.integrality_tol && f < 1.0 - options.integrality_tol && f > frac) {
          frac = f;
          pick = j;
        }
      }
      if (std::ceil(node->x[pick]) <= lo[pick] || std::floor(node->x[pick]) >= up[pick]) return;
      auto raised = lo;
      raised[pick] = std::ceil(node->x[pick]);
      auto child = raised[pick] <= up[pick] ? solve_node(base, raised, up, options.lp) : std::nullopt;
      if (child) {
        lo = std::move(raised);
        node = std::move(child);
        continue;
      }
      up[pick] = std::floor(node->x[pick]);
      if (up[pick] < lo[pick]) return;
      node = solve_node(base, lo, up, options.lp);
    }
  };
  dive(lower, upper);

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::size_t next_id = 0;
  open.push({kInfinity, next_id++, lower, upper});

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (best && prune_gap(node.bound)) break;
    if (++result.nodes > options.max_nodes) {
      if (options.best_effort && best) {
        result.proven_optimal = false;
        break;
      }
      throw NumericalFailure("branch-and-bound node budget exhausted");
    }
    if (options.dive_interval > 0 && result.nodes % options.dive_interval == 0) dive(node.lower, node.upper);

    const auto sol = solve_node(base, node.lower, node.upper, options.lp);
    if (!sol) continue;
    if (best && prune_gap(sol->objective)) continue;

    const std::size_t branch = most_fractional(sol->x);
    if (branch == n) {
      offer(sol->x);
      continue;
    }
    tighten(*sol, node.lower, node.upper);
    const double v = sol->x[branch];
    Node down{sol->objective, next_id++, node.lower, node.upper};
    down.upper[branch] = std::min(down.upper[branch], std::floor(v));
    Node up{sol->objective, next_id++, std::move(node.lower), std::move(node.upper)};
    up.lower[branch] = std::ceil(v);
    if (down.lower[branch] <= down.upper[branch]) open.push(std::move(down));
    if (up.lower[branch] <= up.upper[branch]) open.push(std::move(up));
  }

  if (!best) throw Infeasible("no integer-feasible point exists");
  result.x = std::move(*best);
  result.objective = best_value;
  return result;
}

}  // namespace ubcn::solver
