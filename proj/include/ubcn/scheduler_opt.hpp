#pragma once

#include <optional>

#include <Eigen/Core>

#include "ubcn/metrics.hpp"
#include "ubcn/scenario.hpp"
#include "ubcn/solver/mip.hpp"

namespace ubcn {

/// Fixed-power, fixed-trajectory data of the scheduling block, indexed (BD, slot).
struct SchedulingInstance {
  Eigen::MatrixXd rate;    // log2(1 + c1), bits/Hz/s
  Eigen::MatrixXd energy;  // T_s * eta * beta * P_m(n), J harvested when not scheduled
};

SchedulingInstance build_scheduling_instance(const Scenario& s, const PowerProfile& p, const Trajectory& q);

/// Sum of rate * b over the schedule (the numerator without T_s).
double schedule_objective(const Scenario& s, const SchedulingInstance& inst, const Schedule& b);

struct ScheduleResult {
  Schedule schedule;
  double objective = 0.0;
  solver::MipResult mip;
};

/// Optimal schedule for fixed power and trajectory. The incumbent, when
/// feasible, warm-starts the branch-and-bound bound. Throws Infeasible naming
/// the first BD whose aggregate throughput or energy bound cannot be met.
ScheduleResult optimize_schedule(const Scenario& s, const PowerProfile& p, const Trajectory& q,
                                 const std::optional<Schedule>& incumbent = std::nullopt,
                                 const solver::MipOptions& options = {});

}  // namespace ubcn
