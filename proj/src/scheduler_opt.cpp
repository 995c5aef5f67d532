#include "ubcn/scheduler_opt.hpp"

#include <cmath>
#include <string>

#include "ubcn/errors.hpp"

namespace ubcn {

SchedulingInstance build_scheduling_instance(const Scenario& s, const PowerProfile& p, const Trajectory& q) {
  check_shapes(s, nullptr, &p, &q);
  const auto k_count = static_cast<Eigen::Index>(s.num_bds());
  const auto n_count = static_cast<Eigen::Index>(s.num_slots());
  SchedulingInstance inst{Eigen::MatrixXd(k_count, n_count), Eigen::MatrixXd(k_count, n_count)};
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto bd = static_cast<std::size_t>(k);
    const auto m = static_cast<Eigen::Index>(s.ce_of(bd));
    const double harvest = s.slot_length() * s.eta(bd) * s.ce_bd_gain(bd);
    for (Eigen::Index n = 0; n < n_count; ++n) {
      inst.rate(k, n) = slot_rate(s, bd, static_cast<std::size_t>(n), p, q);
      inst.energy(k, n) = harvest * p(m, n);
    }
  }
  return inst;
}

double schedule_objective(const Scenario& s, const SchedulingInstance& inst, const Schedule& b) {
  double v = 0.0;
  for (std::size_t k = 0; k < s.num_bds(); ++k)
    for (std::size_t n = 0; n < s.num_slots(); ++n)
      if (b.of(s, k, n)) v += inst.rate(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  return v;
}

ScheduleResult optimize_schedule(const Scenario& s, const PowerProfile& p, const Trajectory& q,
                                 const std::optional<Schedule>& incumbent, const solver::MipOptions& options) {
  const SchedulingInstance inst = build_scheduling_instance(s, p, q);
  const std::size_t K = s.num_bds(), N = s.num_slots();
  const double ts = s.slot_length();
  auto var = [N](std::size_t k, std::size_t n) { return k * N + n; };

  for (std::size_t k = 0; k < K; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (s.qbar(k) > 0.0 && ts * inst.rate.row(kk).sum() < s.qbar(k))
      throw Infeasible("throughput requirement of BD " + std::to_string(k) +
                       " exceeds its capacity even when scheduled in every slot");
    if (s.ebar(k) > 0.0 && inst.energy.row(kk).sum() < s.ebar(k))
      throw Infeasible("harvested-energy requirement of BD " + std::to_string(k) +
                       " is unattainable even when never scheduled");
  }
  double min_slots = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (s.qbar(k) <= 0.0) continue;
    const double best = inst.rate.row(static_cast<Eigen::Index>(k)).maxCoeff();
    min_slots += std::ceil(s.qbar(k) / (ts * best) - 1e-7);
  }
  if (min_slots > static_cast<double>(N))
    throw Infeasible("throughput requirements need more slots than the mission provides");

  solver::LinearProgram lp;
  lp.objective.assign(K * N, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      lp.objective[var(k, n)] = inst.rate(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < K; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (s.qbar(k) > 0.0) {
      std::vector<double> row(K * N, 0.0);
      for (std::size_t n = 0; n < N; ++n) row[var(k, n)] = ts * inst.rate(kk, static_cast<Eigen::Index>(n));
      lp.add_row(std::move(row), solver::RowSense::GreaterEqual, s.qbar(k));
    }
    if (s.ebar(k) > 0.0) {
      std::vector<double> row(K * N, 0.0);
      for (std::size_t n = 0; n < N; ++n) row[var(k, n)] = inst.energy(kk, static_cast<Eigen::Index>(n));
      lp.add_row(std::move(row), solver::RowSense::LessEqual, inst.energy.row(kk).sum() - s.ebar(k));
    }
  }
  for (std::size_t n = 0; n < N; ++n) {
    std::vector<double> row(K * N, 0.0);
    for (std::size_t k = 0; k < K; ++k) row[var(k, n)] = 1.0;
    lp.add_row(std::move(row), solver::RowSense::LessEqual, 1.0);
  }

  std::optional<std::vector<double>> warm;
  if (incumbent) {
    check_shapes(s, &*incumbent, nullptr, nullptr);
    std::vector<double> x(K * N, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t n = 0; n < N; ++n) x[var(k, n)] = incumbent->of(s, k, n);
    warm = std::move(x);
  }

  ScheduleResult res;
  res.mip = solver::solve_mip(lp, std::vector<bool>(K * N, true), options, warm);
  res.schedule = Schedule(s);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      res.schedule.of(s, k, n) = res.mip.x[var(k, n)] > 0.5 ? 1 : 0;
  res.objective = schedule_objective(s, inst, res.schedule);
  return res;
}

}  // namespace ubcn
