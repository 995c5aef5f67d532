#include "ubcn/bcd_driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ubcn/errors.hpp"
#include "ubcn/scheduler_opt.hpp"

namespace ubcn {

namespace {

std::string failed_checks(const std::vector<ConstraintCheck>& checks) {
  std::ostringstream out;
  std::size_t shown = 0;
  for (const auto& c : checks) {
    if (c.satisfied) continue;
    if (shown++ < 8) out << ' ' << c.id << " (slack " << c.slack << ')';
  }
  if (shown > 8) out << " and " << shown - 8 << " more";
  return out.str();
}

Trajectory initial_circle(const Scenario& s, std::uint64_t seed) {
  const std::size_t N = s.num_slots();
  Point centre = Point::Zero();
  for (std::size_t k = 0; k < s.num_bds(); ++k) centre += s.bd_position(k);
  centre /= static_cast<double>(s.num_bds());
  const double speed = std::min(min_power_speed(s.params().uav), s.params().v_max);
  const double radius = speed * s.params().mission_time / (2.0 * std::numbers::pi);
  std::mt19937_64 rng(seed);
  const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  Trajectory q(2, static_cast<Eigen::Index>(N + 1));
  for (std::size_t n = 0; n < N; ++n) {
    const double a = phase + 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(N);
    q.col(static_cast<Eigen::Index>(n)) = centre + radius * Point(std::cos(a), std::sin(a));
  }
  q.col(static_cast<Eigen::Index>(N)) = q.col(0);
  return q;
}

/// Full power in scheduled slots, the smallest uniform per-CE level that meets
/// every harvesting requirement elsewhere.
PowerProfile initial_power(const Scenario& s, const Schedule& b) {
  const std::size_t N = s.num_slots();
  const double pmax = s.params().p_max;
  PowerProfile p = PowerProfile::Zero(static_cast<Eigen::Index>(s.num_ces()), static_cast<Eigen::Index>(N));
  for (std::size_t m = 0; m < s.num_ces(); ++m) {
    std::vector<char> busy(N, 0);
    for (std::size_t k : s.group(m))
      for (std::size_t n = 0; n < N; ++n)
        if (b.of(s, k, n)) busy[n] = 1;
    const auto free_slots = static_cast<double>(std::count(busy.begin(), busy.end(), 0));
    double level = 0.0;
    for (std::size_t k : s.group(m)) {
      if (s.ebar(k) <= 0.0) continue;
      const double per_watt_slot = s.slot_length() * s.eta(k) * s.ce_bd_gain(k);
      double sibling_slots = 0.0;
      for (std::size_t n = 0; n < N; ++n)
        if (busy[n] && !b.of(s, k, n)) sibling_slots += 1.0;
      const double missing = s.ebar(k) - per_watt_slot * pmax * sibling_slots;
      if (missing <= 0.0) continue;
      if (free_slots == 0.0) throw Infeasible("BD " + std::to_string(k) + " has no slot left to harvest in");
      level = std::max(level, missing / (per_watt_slot * free_slots));
    }
    level = std::min(pmax, level * (1.0 + 1e-3));
    for (std::size_t n = 0; n < N; ++n)
      p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = busy[n] ? pmax : level;
  }
  return p;
}

}  // namespace

InitialPoint initialize(const Scenario& s, std::uint64_t seed) {
  const std::size_t K = s.num_bds(), N = s.num_slots();
  InitialPoint init;
  init.trajectory = initial_circle(s, seed);
  init.schedule = Schedule(s);

  const PowerProfile full =
      PowerProfile::Constant(static_cast<Eigen::Index>(s.num_ces()), static_cast<Eigen::Index>(N), s.params().p_max);
  Eigen::MatrixXd rate(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      rate(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = slot_rate(s, k, n, full, init.trajectory);

  std::vector<std::size_t> order(K);
  for (std::size_t k = 0; k < K; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t c) { return s.ce_bd_gain(a) > s.ce_bd_gain(c); });

  std::vector<char> taken(N, 0);
  std::vector<double> got(K, 0.0);
  auto claim = [&](std::size_t k) {
    std::size_t best = N;
    for (std::size_t n = 0; n < N; ++n)
      if (!taken[n] && (best == N || rate(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) >
                                         rate(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(best))))
        best = n;
    if (best == N) return false;
    taken[best] = 1;
    init.schedule.of(s, k, best) = 1;
    got[k] += s.slot_length() * rate(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(best));
    return true;
  };
  auto short_of = [&](std::size_t k) { return s.qbar(k) > 0.0 && got[k] < s.qbar(k) * (1.0 + 1e-6); };

  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t k : order) {
      if (!short_of(k)) continue;
      if (!claim(k)) throw Infeasible("not enough slots to meet the throughput requirement of BD " + std::to_string(k));
      progress = true;
    }
  }

  // Repair: grow slot counts of BDs whose audited throughput still falls short.
  for (std::size_t attempt = 0; attempt <= N; ++attempt) {
    init.power = initial_power(s, init.schedule);
    const auto checks = audit(s, init.schedule, init.power, init.trajectory);
    if (all_satisfied(checks)) return init;
    const Eigen::VectorXd thr = bd_throughput(s, init.schedule, init.power, init.trajectory);
    bool grew = false;
    for (std::size_t k : order)
      if (thr(static_cast<Eigen::Index>(k)) < s.qbar(k) && claim(k)) grew = true;
    if (!grew) throw Infeasible("no feasible initial point:" + failed_checks(checks));
  }
  throw Infeasible("initial point repair budget exhausted");
}

BcdResult run_bcd(const Scenario& s, const BcdConfig& config, std::uint64_t seed) {
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const InitialPoint init = initialize(s, seed);

  Solution cur;
  cur.schedule = init.schedule;
  cur.power = init.power;
  cur.trajectory = init.trajectory;
  cur.slack = exact_slack(s, cur.trajectory);

  BcdResult out;
  double ee = energy_efficiency(s, cur.schedule, cur.power, cur.trajectory);
  out.trace.initial_ee = ee;

  auto check_step = [&](double before, double after, const char* block, std::size_t it) {
    if (after < before - config.monotone_slack) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "EE decreased in the " << block << " block of iteration " << it << ": " << before << " -> " << after;
      throw InvariantViolation(msg.str());
    }
  };

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = it;
    try {
      const ScheduleResult sched = optimize_schedule(s, cur.power, cur.trajectory, cur.schedule, config.mip);
      cur.schedule = sched.schedule;
      rec.schedule_proven = sched.mip.proven_optimal;
      rec.ee_schedule = energy_efficiency(s, cur.schedule, cur.power, cur.trajectory);
      check_step(ee, rec.ee_schedule, "scheduling", it);

      const PowerResult pow = optimize_power(s, cur.schedule, cur.trajectory, cur.power, config.power);
      cur.power = pow.power;
      rec.ee_power = energy_efficiency(s, cur.schedule, cur.power, cur.trajectory);
      check_step(rec.ee_schedule, rec.ee_power, "power", it);

      const TrajectoryResult traj =
          optimize_trajectory(s, cur.schedule, cur.power, cur.trajectory, std::nullopt, config.trajectory);
      cur.trajectory = traj.trajectory;
      cur.slack = traj.slack;
      rec.ee_trajectory = energy_efficiency(s, cur.schedule, cur.power, cur.trajectory);
      rec.sca_rounds = traj.rounds.size();
      rec.max_slack_residual = traj.max_slack_residual;
      check_step(rec.ee_power, rec.ee_trajectory, "trajectory", it);
    } catch (const Infeasible& e) {
      throw InvariantViolation(std::string("a block reported infeasibility after a feasible iterate: ") + e.what());
    }
    const auto checks = audit(s, cur.schedule, cur.power, cur.trajectory);
    if (!all_satisfied(checks))
      throw InvariantViolation("iterate " + std::to_string(it) + " fails the audit:" + failed_checks(checks));

    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.trace.iterations.push_back(rec);
    const double gain = rec.ee_trajectory - ee;
    ee = rec.ee_trajectory;
    if (gain < config.epsilon) {
      out.trace.status = BcdStatus::Converged;
      break;
    }
  }
  cur.report = evaluate(s, cur.schedule, cur.power, cur.trajectory);
  out.solution = std::move(cur);
  return out;
}

}  // namespace ubcn
