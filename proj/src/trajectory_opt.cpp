#include "ubcn/trajectory_opt.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "ubcn/errors.hpp"

namespace ubcn {

double exact_rate(double c3, double altitude, const Point& w, const Point& q) {
  return std::log2(1.0 + c3 / (altitude * altitude + (w - q).squaredNorm()));
}

double rate_bound_slope(double c3, double altitude, const Point& w, const Point& q_expand) {
  const double d = altitude * altitude + (w - q_expand).squaredNorm();
  return std::numbers::log2e * c3 / ((d + c3) * d);
}

double rate_lower_bound(double c3, double altitude, const Point& w, const Point& q, const Point& q_expand) {
  const double alpha = exact_rate(c3, altitude, w, q_expand);
  const double phi = rate_bound_slope(c3, altitude, w, q_expand);
  return alpha - phi * ((w - q).squaredNorm() - (w - q_expand).squaredNorm());
}

double slack_rhs(double v0, double slot_length, const Point& q_prev, const Point& q, double y) {
  const double scale = v0 * v0 * slot_length * slot_length;
  return y * y + (q - q_prev).squaredNorm() / scale;
}

double slack_rhs_lower_bound(double v0, double slot_length, const Point& q_prev, const Point& q,
                             const Point& q_expand_prev, const Point& q_expand, double y, double y_expand) {
  const double scale = v0 * v0 * slot_length * slot_length;
  const Point de = q_expand - q_expand_prev;
  return y_expand * y_expand + 2.0 * y_expand * (y - y_expand) - de.squaredNorm() / scale +
         2.0 * de.dot(q - q_prev) / scale;
}

Eigen::VectorXd exact_slack(const Scenario& s, const Trajectory& q) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(s.num_slots()));
  for (std::size_t n = 0; n < s.num_slots(); ++n)
    y(static_cast<Eigen::Index>(n)) = induced_factor(s.params().uav, slot_speed(s, q, n));
  return y;
}

double slack_residual(const UavPhysics& physics, double speed, double y) {
  const double f = induced_factor(physics, speed);
  return std::abs(y * y - f * f);
}

namespace {

using solver::SmoothFunction;
using solver::SparseVector;

struct Item {
  std::size_t slot;
  Point w;
  double alpha, phi, base;  // base = ||w - q_l||^2
};

/// Shared data of one SCA round. Waypoint N is waypoint 0, so the variables are
/// q(0..N-1) followed by y(0..N-1); slot n flies from waypoint n to n+1.
struct Model {
  std::size_t N = 0;
  double ts = 0, pb = 0, pi = 0, cp = 0, utip = 0, v0 = 0, step = 0, e_ce = 0;
  std::vector<Item> items;
  std::vector<std::vector<std::size_t>> bd_items;
  Trajectory ql;
  Eigen::VectorXd yl;

  Eigen::Index nvar() const { return static_cast<Eigen::Index>(3 * N); }
  Eigen::Index qa(std::size_t n) const { return static_cast<Eigen::Index>(2 * ((n + 1) % N)); }
  Eigen::Index qb(std::size_t n) const { return static_cast<Eigen::Index>(2 * n); }
  Eigen::Index yv(std::size_t n) const { return static_cast<Eigen::Index>(2 * N + n); }
  bool moving(std::size_t n) const { return qa(n) != qb(n); }
  Eigen::Vector2d delta(const Eigen::VectorXd& z, std::size_t n) const {
    return z.segment<2>(qa(n)) - z.segment<2>(qb(n));
  }
  Eigen::Vector2d delta_l(std::size_t n) const {
    return ql.col(static_cast<Eigen::Index>(n + 1)) - ql.col(static_cast<Eigen::Index>(n));
  }
};

void add_delta_gradient(const Model& md, std::size_t n, const Eigen::Vector2d& g, Eigen::VectorXd& grad) {
  grad.segment<2>(md.qa(n)) += g;
  grad.segment<2>(md.qb(n)) -= g;
}

void add_delta_block(const Model& md, std::size_t n, const Eigen::Matrix2d& m, Eigen::MatrixXd& h) {
  const Eigen::Index a = md.qa(n), b = md.qb(n);
  h.block<2, 2>(a, a) += m;
  h.block<2, 2>(b, b) += m;
  h.block<2, 2>(a, b) -= m;
  h.block<2, 2>(b, a) -= m;
}

double item_bound(const Item& it, const Eigen::VectorXd& z, Eigen::Index qa) {
  return it.alpha - it.phi * ((it.w - z.segment<2>(qa)).squaredNorm() - it.base);
}

double surrogate_numerator(const Model& md, const Eigen::VectorXd& z) {
  double v = 0.0;
  for (const auto& it : md.items) v += item_bound(it, z, md.qa(it.slot));
  return md.ts * v;
}

double denominator(const Model& md, const Eigen::VectorXd& z) {
  double v = 0.0;
  for (std::size_t n = 0; n < md.N; ++n) {
    const double d = md.moving(n) ? md.delta(z, n).norm() : 0.0;
    const double speed2 = d * d / (md.ts * md.ts);
    v += md.pb * (1.0 + 3.0 * speed2 / (md.utip * md.utip)) + md.pi * z(md.yv(n)) +
         md.cp * d * d * d / (md.ts * md.ts * md.ts);
  }
  return md.ts * v + md.e_ce;
}

/// Gradient of numerator - lambda * denominator into a dense vector.
void objective_gradient(const Model& md, double lambda, const Eigen::VectorXd& z, Eigen::VectorXd& g) {
  g.setZero(md.nvar());
  for (const auto& it : md.items) {
    const Eigen::Index a = md.qa(it.slot);
    g.segment<2>(a) += -2.0 * md.ts * it.phi * (z.segment<2>(a) - it.w);
  }
  const double t3 = md.ts * md.ts * md.ts;
  for (std::size_t n = 0; n < md.N; ++n) {
    g(md.yv(n)) -= lambda * md.ts * md.pi;
    if (!md.moving(n)) continue;
    const Eigen::Vector2d d = md.delta(z, n);
    const Eigen::Vector2d gd =
        md.ts * (6.0 * md.pb / (md.utip * md.utip * md.ts * md.ts) * d + 3.0 * md.cp / t3 * d.norm() * d);
    add_delta_gradient(md, n, -lambda * gd, g);
  }
}

void objective_hessian(const Model& md, double lambda, const Eigen::VectorXd& z, double w, Eigen::MatrixXd& h) {
  for (const auto& it : md.items) {
    const Eigen::Index a = md.qa(it.slot);
    h.block<2, 2>(a, a) += w * (-2.0 * md.ts * it.phi) * Eigen::Matrix2d::Identity();
  }
  const double t3 = md.ts * md.ts * md.ts;
  for (std::size_t n = 0; n < md.N; ++n) {
    if (!md.moving(n)) continue;
    const Eigen::Vector2d d = md.delta(z, n);
    const double norm = d.norm();
    Eigen::Matrix2d m = 6.0 * md.pb / (md.utip * md.utip * md.ts * md.ts) * Eigen::Matrix2d::Identity();
    if (norm > 0.0) m += 3.0 * md.cp / t3 * (norm * Eigen::Matrix2d::Identity() + d * d.transpose() / norm);
    add_delta_block(md, n, -w * lambda * md.ts * m, h);
  }
}

SparseVector to_sparse(const Eigen::VectorXd& g) {
  SparseVector out;
  out.reserve(static_cast<std::size_t>(g.size()));
  for (Eigen::Index j = 0; j < g.size(); ++j)
    if (g(j) != 0.0) out.emplace_back(j, g(j));
  return out;
}

SmoothFunction throughput_constraint(std::shared_ptr<const Model> md, std::vector<std::size_t> idx, double qbar) {
  SmoothFunction f;
  const double scale = md->ts / qbar;
  f.value = [md, idx, scale](const Eigen::VectorXd& z) {
    double v = 0.0;
    for (std::size_t i : idx) v += item_bound(md->items[i], z, md->qa(md->items[i].slot));
    return 1.0 - scale * v;
  };
  f.gradient = [md, idx, scale](const Eigen::VectorXd& z, SparseVector& out) {
    out.clear();
    for (std::size_t i : idx) {
      const Item& it = md->items[i];
      const Eigen::Index a = md->qa(it.slot);
      const Eigen::Vector2d g = 2.0 * scale * it.phi * (z.segment<2>(a) - it.w);
      out.emplace_back(a, g(0));
      out.emplace_back(a + 1, g(1));
    }
  };
  f.add_hessian = [md, idx, scale](const Eigen::VectorXd&, double w, Eigen::MatrixXd& h) {
    for (std::size_t i : idx) {
      const Eigen::Index a = md->qa(md->items[i].slot);
      const double c = w * 2.0 * scale * md->items[i].phi;
      h(a, a) += c;
      h(a + 1, a + 1) += c;
    }
  };
  return f;
}

SmoothFunction slack_constraint(std::shared_ptr<const Model> md, std::size_t n) {
  SmoothFunction f;
  const double scale = md->v0 * md->v0 * md->ts * md->ts;
  f.value = [md, n, scale](const Eigen::VectorXd& z) {
    const double y = z(md->yv(n));
    const double ye = md->yl(static_cast<Eigen::Index>(n));
    const Eigen::Vector2d de = md->delta_l(n);
    const double lin_q = md->moving(n) ? (-de.squaredNorm() + 2.0 * de.dot(md->delta(z, n))) / scale : 0.0;
    return 1.0 / (y * y) - (ye * ye + 2.0 * ye * (y - ye) + lin_q);
  };
  f.gradient = [md, n, scale](const Eigen::VectorXd& z, SparseVector& out) {
    out.clear();
    const double y = z(md->yv(n));
    const double ye = md->yl(static_cast<Eigen::Index>(n));
    out.emplace_back(md->yv(n), -2.0 / (y * y * y) - 2.0 * ye);
    if (md->moving(n)) {
      const Eigen::Vector2d g = -2.0 * md->delta_l(n) / scale;
      out.emplace_back(md->qa(n), g(0));
      out.emplace_back(md->qa(n) + 1, g(1));
      out.emplace_back(md->qb(n), -g(0));
      out.emplace_back(md->qb(n) + 1, -g(1));
    }
  };
  f.add_hessian = [md, n](const Eigen::VectorXd& z, double w, Eigen::MatrixXd& h) {
    const double y = z(md->yv(n));
    h(md->yv(n), md->yv(n)) += w * 6.0 / (y * y * y * y);
  };
  return f;
}

SmoothFunction speed_constraint(std::shared_ptr<const Model> md, std::size_t n) {
  SmoothFunction f;
  const double inv = 1.0 / (md->step * md->step);
  f.value = [md, n, inv](const Eigen::VectorXd& z) { return md->delta(z, n).squaredNorm() * inv - 1.0; };
  f.gradient = [md, n, inv](const Eigen::VectorXd& z, SparseVector& out) {
    out.clear();
    const Eigen::Vector2d g = 2.0 * inv * md->delta(z, n);
    out.emplace_back(md->qa(n), g(0));
    out.emplace_back(md->qa(n) + 1, g(1));
    out.emplace_back(md->qb(n), -g(0));
    out.emplace_back(md->qb(n) + 1, -g(1));
  };
  f.add_hessian = [md, n, inv](const Eigen::VectorXd&, double w, Eigen::MatrixXd& h) {
    add_delta_block(*md, n, 2.0 * w * inv * Eigen::Matrix2d::Identity(), h);
  };
  return f;
}

Trajectory to_trajectory(const Model& md, const Eigen::VectorXd& z) {
  Trajectory q(2, static_cast<Eigen::Index>(md.N + 1));
  for (std::size_t j = 0; j < md.N; ++j) q.col(static_cast<Eigen::Index>(j)) = z.segment<2>(static_cast<Eigen::Index>(2 * j));
  q.col(static_cast<Eigen::Index>(md.N)) = q.col(0);
  return q;
}

}  // namespace

TrajectoryResult optimize_trajectory(const Scenario& s, const Schedule& b, const PowerProfile& p,
                                     const Trajectory& q_init, const std::optional<Eigen::VectorXd>& y_init,
                                     const TrajectoryOptions& options) {
  check_shapes(s, &b, &p, &q_init);
  const std::size_t N = s.num_slots();
  const UavPhysics& uav = s.params().uav;

  TrajectoryResult res;
  res.trajectory = q_init;
  res.trajectory.col(static_cast<Eigen::Index>(N)) = q_init.col(0);
  res.slack = exact_slack(s, res.trajectory);
  if (y_init) {
    if (y_init->size() != static_cast<Eigen::Index>(N)) throw std::invalid_argument("y_init has the wrong size");
    if (((y_init->array() - res.slack.array()) < -1e-9).any())
      throw std::invalid_argument("y_init is below the exact slack of q_init");
    res.slack = *y_init;
  }
  res.ee = energy_efficiency(s, b, p, res.trajectory);
  for (std::size_t n = 0; n < N; ++n)
    res.max_slack_residual = std::max(
        res.max_slack_residual, slack_residual(uav, slot_speed(s, res.trajectory, n), res.slack(static_cast<Eigen::Index>(n))));
  res.kept_incumbent = true;

  for (std::size_t round = 0; round < options.max_rounds; ++round) {
    auto md = std::make_shared<Model>();
    md->N = N;
    md->ts = s.slot_length();
    md->pb = blade_profile_power(uav);
    md->pi = induced_power(uav);
    md->cp = parasite_coefficient(uav);
    md->utip = uav.tip_speed;
    md->v0 = uav.mean_induced_velocity;
    md->step = s.params().v_max * s.slot_length();
    md->e_ce = s.slot_length() * p.sum();
    md->ql = res.trajectory;
    md->yl = exact_slack(s, res.trajectory);
    md->bd_items.assign(s.num_bds(), {});
    const double h = s.altitude();
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t k = 0; k < s.num_bds(); ++k) {
        if (!b.of(s, k, n)) continue;
        const double c3 = s.params().beta0 * s.ce_bd_gain(k) *
                          p(static_cast<Eigen::Index>(s.ce_of(k)), static_cast<Eigen::Index>(n)) / s.noise_power();
        const Point qe = md->ql.col(static_cast<Eigen::Index>(n + 1));
        const Point& w = s.bd_position(k);
        md->bd_items[k].push_back(md->items.size());
        md->items.push_back({n, w, exact_rate(c3, h, w, qe), rate_bound_slope(c3, h, w, qe), (w - qe).squaredNorm()});
      }
    }

    solver::ConcaveProgram prog;
    prog.num_variables = md->nvar();
    prog.lower = Eigen::VectorXd::Constant(md->nvar(), -std::numeric_limits<double>::infinity());
    prog.upper = Eigen::VectorXd::Constant(md->nvar(), std::numeric_limits<double>::infinity());
    prog.lower.tail(static_cast<Eigen::Index>(N)).setZero();
    for (std::size_t k = 0; k < s.num_bds(); ++k)
      if (s.qbar(k) > 0.0) prog.constraints.push_back(throughput_constraint(md, md->bd_items[k], s.qbar(k)));
    for (std::size_t n = 0; n < N; ++n) {
      prog.constraints.push_back(slack_constraint(md, n));
      if (md->moving(n)) prog.constraints.push_back(speed_constraint(md, n));
    }

    Eigen::VectorXd z0(md->nvar());
    for (std::size_t j = 0; j < N; ++j)
      z0.segment<2>(static_cast<Eigen::Index>(2 * j)) = md->ql.col(static_cast<Eigen::Index>(j));
    z0.tail(static_cast<Eigen::Index>(N)) = md->yl;
    Eigen::VectorXd strict = z0;
    strict.tail(static_cast<Eigen::Index>(N)) *= 1.0 + 1e-3;
    if (!solver::strictly_feasible(prog, strict)) strict = solver::find_strictly_feasible(prog, strict, options.barrier);

    solver::FractionalObjective frac;
    frac.numerator = [md](const Eigen::VectorXd& z) { return surrogate_numerator(*md, z); };
    frac.denominator = [md](const Eigen::VectorXd& z) { return denominator(*md, z); };

    auto parametric = [&](double lambda, const Eigen::VectorXd& warm) {
      solver::ConcaveProgram sub = prog;
      sub.objective.value = [md, lambda](const Eigen::VectorXd& z) {
        return surrogate_numerator(*md, z) - lambda * denominator(*md, z);
      };
      sub.objective.gradient = [md, lambda](const Eigen::VectorXd& z, SparseVector& out) {
        Eigen::VectorXd g;
        objective_gradient(*md, lambda, z, g);
        out = to_sparse(g);
      };
      sub.objective.add_hessian = [md, lambda](const Eigen::VectorXd& z, double w, Eigen::MatrixXd& hm) {
        objective_hessian(*md, lambda, z, w, hm);
      };
      sub.start = solver::strictly_feasible(prog, warm) ? warm : strict;
      return solver::solve_concave(sub, options.barrier).x;
    };

    const solver::DinkelbachResult dk = solver::dinkelbach(frac, parametric, z0, options.dinkelbach);
    ScaRound rec;
    rec.surrogate_ratio = dk.ratio;
    rec.dinkelbach_iterations = dk.iterations;
    const Trajectory q_new = to_trajectory(*md, dk.x);
    const Eigen::VectorXd y_new = dk.x.tail(static_cast<Eigen::Index>(N));
    for (std::size_t n = 0; n < N; ++n)
      rec.max_slack_residual = std::max(
          rec.max_slack_residual, slack_residual(uav, slot_speed(s, q_new, n), y_new(static_cast<Eigen::Index>(n))));
    rec.ee = energy_efficiency(s, b, p, q_new);

    const bool feasible = all_satisfied(audit(s, b, p, q_new));
    const double gain = rec.ee - res.ee;
    rec.accepted = feasible && gain >= 0.0;
    res.rounds.push_back(rec);
    if (!rec.accepted) break;
    res.trajectory = q_new;
    res.slack = y_new;
    res.ee = rec.ee;
    res.max_slack_residual = rec.max_slack_residual;
    res.kept_incumbent = false;
    if (gain < options.improvement_tol && rec.max_slack_residual <= options.slack_tol) break;
  }
  return res;
}

}  // namespace ubcn
