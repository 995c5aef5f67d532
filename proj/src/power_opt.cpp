#include "ubcn/power_opt.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ubcn/errors.hpp"

namespace ubcn {

namespace {

constexpr double kLog2e = std::numbers::log2e;

using solver::SmoothFunction;
using solver::SparseVector;

Eigen::Index pvar(const PowerInstance& inst, std::size_t m, std::size_t n) {
  return static_cast<Eigen::Index>(m * inst.num_slots + n);
}

PowerProfile unflatten(const PowerInstance& inst, const Eigen::VectorXd& x) {
  PowerProfile p(static_cast<Eigen::Index>(inst.num_ces), static_cast<Eigen::Index>(inst.num_slots));
  for (std::size_t m = 0; m < inst.num_ces; ++m)
    for (std::size_t n = 0; n < inst.num_slots; ++n)
      p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = x(pvar(inst, m, n));
  return p;
}

Eigen::VectorXd flatten(const PowerInstance& inst, const PowerProfile& p) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(inst.num_ces * inst.num_slots));
  for (std::size_t m = 0; m < inst.num_ces; ++m)
    for (std::size_t n = 0; n < inst.num_slots; ++n)
      x(pvar(inst, m, n)) = p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  return x;
}

struct Term {
  Eigen::Index var;
  double slope;
};

/// Scheduled (variable, c2) pairs of one BD.
std::vector<Term> scheduled_terms(const PowerInstance& inst, std::size_t k) {
  std::vector<Term> out;
  for (std::size_t n = 0; n < inst.num_slots; ++n) {
    const auto kk = static_cast<Eigen::Index>(k), nn = static_cast<Eigen::Index>(n);
    if (inst.scheduled(kk, nn) > 0.5) out.push_back({pvar(inst, inst.ce[k], n), inst.snr_slope(kk, nn)});
  }
  return out;
}

/// scale * sum log2(1 + c x_v) over the terms, with derivatives.
SmoothFunction log_sum(std::vector<Term> terms, double scale, double constant) {
  SmoothFunction f;
  f.value = [terms, scale, constant](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const auto& t : terms) v += std::log2(1.0 + t.slope * x(t.var));
    return constant + scale * v;
  };
  f.gradient = [terms, scale](const Eigen::VectorXd& x, SparseVector& out) {
    out.clear();
    for (const auto& t : terms) out.emplace_back(t.var, scale * kLog2e * t.slope / (1.0 + t.slope * x(t.var)));
  };
  f.add_hessian = [terms, scale](const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) {
    for (const auto& t : terms) {
      const double d = 1.0 + t.slope * x(t.var);
      h(t.var, t.var) -= w * scale * kLog2e * t.slope * t.slope / (d * d);
    }
  };
  return f;
}

}  // namespace

PowerInstance build_power_instance(const Scenario& s, const Schedule& b, const Trajectory& q) {
  check_shapes(s, &b, nullptr, &q);
  PowerInstance inst;
  inst.num_ces = s.num_ces();
  inst.num_slots = s.num_slots();
  inst.slot_length = s.slot_length();
  inst.p_max = s.params().p_max;
  for (std::size_t n = 0; n < s.num_slots(); ++n) inst.uav_energy += propulsion_power(s.params().uav, slot_speed(s, q, n));
  inst.uav_energy *= s.slot_length();
  const auto K = static_cast<Eigen::Index>(s.num_bds()), N = static_cast<Eigen::Index>(s.num_slots());
  inst.snr_slope.resize(K, N);
  inst.scheduled.resize(K, N);
  const double h2 = s.altitude() * s.altitude();
  for (std::size_t k = 0; k < s.num_bds(); ++k) {
    inst.ce.push_back(s.ce_of(k));
    inst.qbar.push_back(s.qbar(k));
    inst.ebar.push_back(s.ebar(k));
    inst.harvest.push_back(s.slot_length() * s.eta(k) * s.ce_bd_gain(k));
    for (std::size_t n = 0; n < s.num_slots(); ++n) {
      const auto kk = static_cast<Eigen::Index>(k), nn = static_cast<Eigen::Index>(n);
      const double d2 = h2 + (s.bd_position(k) - q.col(nn + 1)).squaredNorm();
      inst.snr_slope(kk, nn) = s.params().beta0 * s.ce_bd_gain(k) / (s.noise_power() * d2);
      inst.scheduled(kk, nn) = b.of(s, k, n);
    }
  }
  return inst;
}

Eigen::VectorXd power_throughput(const PowerInstance& inst, const PowerProfile& p) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.ce.size()));
  for (std::size_t k = 0; k < inst.ce.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    for (std::size_t n = 0; n < inst.num_slots; ++n) {
      const auto nn = static_cast<Eigen::Index>(n);
      if (inst.scheduled(kk, nn) > 0.5)
        out(kk) += std::log2(1.0 + inst.snr_slope(kk, nn) * p(static_cast<Eigen::Index>(inst.ce[k]), nn));
    }
    out(kk) *= inst.slot_length;
  }
  return out;
}

Eigen::VectorXd power_harvest(const PowerInstance& inst, const PowerProfile& p) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(inst.ce.size()));
  for (std::size_t k = 0; k < inst.ce.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    double sum = 0.0;
    for (std::size_t n = 0; n < inst.num_slots; ++n) {
      const auto nn = static_cast<Eigen::Index>(n);
      sum += p(static_cast<Eigen::Index>(inst.ce[k]), nn) * (1.0 - inst.scheduled(kk, nn));
    }
    out(kk) = inst.harvest[k] * sum;
  }
  return out;
}

double power_ratio(const PowerInstance& inst, const PowerProfile& p) {
  return power_throughput(inst, p).sum() / (inst.uav_energy + inst.slot_length * p.sum());
}

bool power_feasible(const PowerInstance& inst, const PowerProfile& p, double tol) {
  if (static_cast<std::size_t>(p.rows()) != inst.num_ces || static_cast<std::size_t>(p.cols()) != inst.num_slots)
    return false;
  if (!p.allFinite() || p.minCoeff() < -tol || p.maxCoeff() > inst.p_max + tol) return false;
  const Eigen::VectorXd thr = power_throughput(inst, p);
  const Eigen::VectorXd eng = power_harvest(inst, p);
  for (std::size_t k = 0; k < inst.ce.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (thr(kk) < inst.qbar[k] - tol || eng(kk) < inst.ebar[k] - tol) return false;
  }
  return true;
}

PowerResult optimize_power(const PowerInstance& inst, const std::optional<PowerProfile>& incumbent,
                           const PowerOptions& options) {
  const auto nvar = static_cast<Eigen::Index>(inst.num_ces * inst.num_slots);
  const std::size_t K = inst.ce.size();
  const double ts = inst.slot_length;

  {
    const PowerProfile full =
        PowerProfile::Constant(static_cast<Eigen::Index>(inst.num_ces), static_cast<Eigen::Index>(inst.num_slots), inst.p_max);
    const Eigen::VectorXd thr = power_throughput(inst, full);
    const Eigen::VectorXd eng = power_harvest(inst, full);
    for (std::size_t k = 0; k < K; ++k) {
      if (thr(static_cast<Eigen::Index>(k)) < inst.qbar[k])
        throw Infeasible("BD " + std::to_string(k) + " misses its throughput requirement even at full power");
      if (eng(static_cast<Eigen::Index>(k)) < inst.ebar[k])
        throw Infeasible("BD " + std::to_string(k) + " misses its harvested-energy requirement even at full power");
    }
  }

  std::vector<std::vector<Term>> terms(K);
  std::vector<Term> all_terms;
  for (std::size_t k = 0; k < K; ++k) {
    terms[k] = scheduled_terms(inst, k);
    all_terms.insert(all_terms.end(), terms[k].begin(), terms[k].end());
  }

  solver::ConcaveProgram prog;
  prog.num_variables = nvar;
  prog.lower = Eigen::VectorXd::Zero(nvar);
  prog.upper = Eigen::VectorXd::Constant(nvar, inst.p_max);
  for (std::size_t k = 0; k < K; ++k) {
    if (inst.qbar[k] > 0.0) prog.constraints.push_back(log_sum(terms[k], -ts / inst.qbar[k], 1.0));
    if (inst.ebar[k] > 0.0) {
      SparseVector coeff;
      const double scale = inst.harvest[k] / inst.ebar[k];
      for (std::size_t n = 0; n < inst.num_slots; ++n) {
        const double idle = 1.0 - inst.scheduled(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
        if (idle > 0.0) coeff.emplace_back(pvar(inst, inst.ce[k], n), -scale * idle);
      }
      prog.constraints.push_back(solver::affine_function(std::move(coeff), 1.0));
    }
  }
  const SmoothFunction numerator = log_sum(all_terms, ts, 0.0);

  Eigen::VectorXd strict = Eigen::VectorXd::Constant(nvar, inst.p_max / 2.0);
  if (!solver::strictly_feasible(prog, strict)) {
    Eigen::VectorXd guess = Eigen::VectorXd::Constant(nvar, 0.9 * inst.p_max);
    if (incumbent) guess = flatten(inst, *incumbent);
    strict = solver::find_strictly_feasible(prog, guess, options.barrier);
  }

  solver::FractionalObjective frac;
  frac.numerator = numerator.value;
  frac.denominator = [&inst, ts](const Eigen::VectorXd& x) { return inst.uav_energy + ts * x.sum(); };

  const bool incumbent_ok = incumbent && power_feasible(inst, *incumbent);
  const Eigen::VectorXd start = incumbent_ok ? flatten(inst, *incumbent) : strict;

  auto parametric = [&](double lambda, const Eigen::VectorXd& warm) {
    solver::ConcaveProgram sub = prog;
    sub.objective.value = [&numerator, lambda, ts](const Eigen::VectorXd& x) {
      return numerator.value(x) - lambda * ts * x.sum();
    };
    sub.objective.gradient = [&numerator, lambda, ts, nvar](const Eigen::VectorXd& x, SparseVector& out) {
      numerator.gradient(x, out);
      // every variable carries the linear energy cost
      std::vector<double> dense(static_cast<std::size_t>(nvar), -lambda * ts);
      for (const auto& [j, v] : out) dense[static_cast<std::size_t>(j)] += v;
      out.clear();
      for (Eigen::Index j = 0; j < nvar; ++j) out.emplace_back(j, dense[static_cast<std::size_t>(j)]);
    };
    sub.objective.add_hessian = numerator.add_hessian;
    sub.start = solver::strictly_feasible(prog, warm) ? warm : strict;
    return solver::solve_concave(sub, options.barrier).x;
  };

  PowerResult res;
  res.dinkelbach = solver::dinkelbach(frac, parametric, start, options.dinkelbach);
  res.power = unflatten(inst, res.dinkelbach.x).cwiseMax(0.0).cwiseMin(inst.p_max);
  res.ratio = power_ratio(inst, res.power);
  if (incumbent_ok) {
    const double before = power_ratio(inst, *incumbent);
    if (before >= res.ratio || !power_feasible(inst, res.power)) {
      res.power = *incumbent;
      res.ratio = before;
      res.kept_incumbent = true;
    }
  }
  return res;
}

PowerResult optimize_power(const Scenario& s, const Schedule& b, const Trajectory& q,
                           const std::optional<PowerProfile>& incumbent, const PowerOptions& options) {
  return optimize_power(build_power_instance(s, b, q), incumbent, options);
}

}  // namespace ubcn
