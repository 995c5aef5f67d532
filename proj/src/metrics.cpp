#include "ubcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ubcn {

Schedule::Schedule(std::size_t num_ces, std::size_t max_group, std::size_t num_slots)
    : num_ces_(num_ces), max_group_(max_group), num_slots_(num_slots), data_(num_ces * max_group * num_slots, 0) {}

Schedule::Schedule(const Scenario& s) : Schedule(s.num_ces(), s.max_group_size(), s.num_slots()) {}

std::optional<std::size_t> Schedule::scheduled_bd(const Scenario& s, std::size_t n) const {
  std::optional<std::size_t> found;
  for (std::size_t k = 0; k < s.num_bds(); ++k) {
    if (of(s, k, n) != 0) {
      if (found) return std::nullopt;
      found = k;
    }
  }
  return found;
}

bool SolutionReport::feasible() const { return all_satisfied(constraint_audit); }

void check_shapes(const Scenario& s, const Schedule* b, const PowerProfile* p, const Trajectory* q) {
  const std::size_t m = s.num_ces();
  const std::size_t n = s.num_slots();
  if (b && (b->num_ces() != m || b->max_group() != s.max_group_size() || b->num_slots() != n))
    throw std::invalid_argument("schedule shape does not match scenario");
  if (p && (static_cast<std::size_t>(p->rows()) != m || static_cast<std::size_t>(p->cols()) != n))
    throw std::invalid_argument("power profile shape does not match scenario");
  if (q && static_cast<std::size_t>(q->cols()) != n + 1)
    throw std::invalid_argument("trajectory must have N+1 waypoints");
}

double slot_speed(const Scenario& s, const Trajectory& q, std::size_t n) {
  return (q.col(static_cast<Eigen::Index>(n + 1)) - q.col(static_cast<Eigen::Index>(n))).norm() / s.slot_length();
}

double slot_rate(const Scenario& s, std::size_t bd, std::size_t n, const PowerProfile& p, const Trajectory& q) {
  const double h = s.altitude();
  const Point pos = q.col(static_cast<Eigen::Index>(n + 1));
  const double d2 = h * h + (s.bd_position(bd) - pos).squaredNorm();
  const double power = p(static_cast<Eigen::Index>(s.ce_of(bd)), static_cast<Eigen::Index>(n));
  const double snr = s.params().beta0 * s.ce_bd_gain(bd) * power / (s.noise_power() * d2);
  return std::log2(1.0 + snr);
}

Eigen::VectorXd bd_throughput(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q) {
  check_shapes(s, &b, &p, &q);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.num_bds()));
  for (std::size_t k = 0; k < s.num_bds(); ++k) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.num_slots(); ++n) {
      if (b.of(s, k, n) != 0) sum += static_cast<double>(b.of(s, k, n)) * slot_rate(s, k, n, p, q);
    }
    out(static_cast<Eigen::Index>(k)) = s.slot_length() * sum;
  }
  return out;
}

Eigen::VectorXd bd_harvested_energy(const Scenario& s, const Schedule& b, const PowerProfile& p) {
  check_shapes(s, &b, &p, nullptr);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.num_bds()));
  for (std::size_t k = 0; k < s.num_bds(); ++k) {
    const auto m = static_cast<Eigen::Index>(s.ce_of(k));
    double sum = 0.0;
    for (std::size_t n = 0; n < s.num_slots(); ++n)
      sum += p(m, static_cast<Eigen::Index>(n)) * (1.0 - static_cast<double>(b.of(s, k, n)));
    out(static_cast<Eigen::Index>(k)) = s.slot_length() * s.eta(k) * s.ce_bd_gain(k) * sum;
  }
  return out;
}

EnergyBreakdown total_energy(const Scenario& s, const PowerProfile& p, const Trajectory& q) {
  check_shapes(s, nullptr, &p, &q);
  EnergyBreakdown e;
  for (std::size_t n = 0; n < s.num_slots(); ++n) e.uav += propulsion_power(s.params().uav, slot_speed(s, q, n));
  e.uav *= s.slot_length();
  e.ce = s.slot_length() * p.sum();
  return e;
}

double energy_efficiency(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q) {
  const double throughput = bd_throughput(s, b, p, q).sum();
  return throughput / total_energy(s, p, q).total();
}

std::vector<ConstraintCheck> audit(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q,
                                   double tol) {
  check_shapes(s, &b, &p, &q);
  std::vector<ConstraintCheck> out;
  auto add = [&](std::string id, double slack) { out.push_back({std::move(id), slack, slack >= -tol}); };

  const Eigen::VectorXd thr = bd_throughput(s, b, p, q);
  const Eigen::VectorXd eng = bd_harvested_energy(s, b, p);
  for (std::size_t k = 0; k < s.num_bds(); ++k) {
    add("throughput[bd=" + std::to_string(k) + "]", thr(static_cast<Eigen::Index>(k)) - s.qbar(k));
  }
  for (std::size_t k = 0; k < s.num_bds(); ++k) {
    add("harvest[bd=" + std::to_string(k) + "]", eng(static_cast<Eigen::Index>(k)) - s.ebar(k));
  }
  for (std::size_t n = 0; n < s.num_slots(); ++n) {
    double sum = 0.0;
    for (std::size_t m = 0; m < b.num_ces(); ++m)
      for (std::size_t j = 0; j < b.max_group(); ++j) sum += b.at(m, j, n);
    add("tdma[n=" + std::to_string(n) + "]", 1.0 - sum);
  }
  double worst_binary = 0.0;
  std::string worst_id = "binary";
  for (std::size_t m = 0; m < b.num_ces(); ++m) {
    for (std::size_t j = 0; j < b.max_group(); ++j) {
      const bool exists = j < s.group(m).size();
      for (std::size_t n = 0; n < s.num_slots(); ++n) {
        const std::uint8_t v = b.at(m, j, n);
        const bool ok = exists ? (v <= 1) : (v == 0);
        if (!ok) {
          worst_binary = -1.0;
          worst_id = "binary[m=" + std::to_string(m) + ",k=" + std::to_string(j) + ",n=" + std::to_string(n) + "]";
          add(worst_id, -1.0);
        }
      }
    }
  }
  if (worst_binary == 0.0) add("binary", 0.0);
  for (Eigen::Index m = 0; m < p.rows(); ++m) {
    for (Eigen::Index n = 0; n < p.cols(); ++n) {
      const double v = p(m, n);
      add("power[m=" + std::to_string(m) + ",n=" + std::to_string(n) + "]",
          std::isfinite(v) ? std::min(v, s.params().p_max - v) : -1.0);
    }
  }
  const double step = s.params().v_max * s.slot_length();
  for (std::size_t n = 0; n < s.num_slots(); ++n) {
    const double d = (q.col(static_cast<Eigen::Index>(n + 1)) - q.col(static_cast<Eigen::Index>(n))).norm();
    add("speed[n=" + std::to_string(n) + "]", step - d);
  }
  add("closure", -(q.col(0) - q.col(q.cols() - 1)).norm());
  return out;
}

bool all_satisfied(const std::vector<ConstraintCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.satisfied; });
}

SolutionReport evaluate(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q, double tol) {
  SolutionReport r;
  r.per_bd_throughput = bd_throughput(s, b, p, q);
  r.per_bd_energy = bd_harvested_energy(s, b, p);
  const EnergyBreakdown e = total_energy(s, p, q);
  r.uav_energy = e.uav;
  r.ce_energy = e.ce;
  r.ee = r.per_bd_throughput.sum() / e.total();
  r.constraint_audit = audit(s, b, p, q, tol);
  return r;
}

}  // namespace ubcn
