#pragma once

#include <cstdint>
#include <vector>

#include "ubcn/metrics.hpp"
#include "ubcn/power_opt.hpp"
#include "ubcn/scenario.hpp"
#include "ubcn/solver/mip.hpp"
#include "ubcn/trajectory_opt.hpp"

namespace ubcn {

/// Scheduling MIP settings used inside BCD: a bounded branch-and-bound that
/// keeps the best schedule found (never worse than the warm incumbent).
inline solver::MipOptions bcd_mip_options() {
  solver::MipOptions o;
  o.max_nodes = 1000;
  o.best_effort = true;
  return o;
}

struct BcdConfig {
  double epsilon = 1e-4;
  std::size_t max_iters = 100;
  double monotone_slack = 1e-6;
  solver::MipOptions mip = bcd_mip_options();
  PowerOptions power;
  TrajectoryOptions trajectory;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double ee_schedule = 0.0;    // after the scheduling block
  double ee_power = 0.0;       // after the power block
  double ee_trajectory = 0.0;  // after the trajectory block
  double seconds = 0.0;
  std::size_t sca_rounds = 0;
  double max_slack_residual = 0.0;
  bool schedule_proven = true;  // scheduling MIP closed its gap
};

enum class BcdStatus { Converged, MaxIterations };

struct ConvergenceTrace {
  double initial_ee = 0.0;
  std::vector<IterationRecord> iterations;
  BcdStatus status = BcdStatus::MaxIterations;
};

struct Solution {
  Schedule schedule;
  PowerProfile power;
  Trajectory trajectory;
  Eigen::VectorXd slack;
  SolutionReport report;
};

struct BcdResult {
  Solution solution;
  ConvergenceTrace trace;
};

struct InitialPoint {
  Schedule schedule;
  PowerProfile power;
  Trajectory trajectory;
};

/// Circle around the BD centroid flown at the minimum-power speed (capped at
/// V_max), a round-robin schedule in descending CE-BD gain meeting every
/// throughput requirement at full power, full power in scheduled slots and the
/// smallest uniform level meeting the harvesting requirements elsewhere. The
/// seed sets the starting angle. Throws Infeasible when no such point exists.
InitialPoint initialize(const Scenario& s, std::uint64_t seed);

/// Alternates the scheduling, power and trajectory blocks until the EE gain of
/// a full iteration drops below epsilon. Throws InvariantViolation if the EE
/// ever decreases beyond the slack, an iterate fails the audit, or a block
/// reports infeasibility after a feasible iterate existed.
BcdResult run_bcd(const Scenario& s, const BcdConfig& config, std::uint64_t seed);

}  // namespace ubcn
