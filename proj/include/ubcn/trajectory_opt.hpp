#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ubcn/metrics.hpp"
#include "ubcn/scenario.hpp"
#include "ubcn/solver/concave_program.hpp"
#include "ubcn/solver/dinkelbach.hpp"

namespace ubcn {

/// Exact rate log2(1 + c3 / (H^2 + ||w - q||^2)).
double exact_rate(double c3, double altitude, const Point& w, const Point& q);

/// First-order lower bound of exact_rate in ||w - q||^2 around q_expand:
/// alpha - phi (||w - q||^2 - ||w - q_expand||^2). Tight at q = q_expand.
double rate_lower_bound(double c3, double altitude, const Point& w, const Point& q, const Point& q_expand);

/// Slope phi of rate_lower_bound; always positive.
double rate_bound_slope(double c3, double altitude, const Point& w, const Point& q_expand);

/// y^2 + ||q - q_prev||^2 / (v0^2 T_s^2).
double slack_rhs(double v0, double slot_length, const Point& q_prev, const Point& q, double y);

/// Affine lower bound of slack_rhs around (q_expand pair, y_expand).
double slack_rhs_lower_bound(double v0, double slot_length, const Point& q_prev, const Point& q,
                             const Point& q_expand_prev, const Point& q_expand, double y, double y_expand);

/// y(n) satisfying y^2 = sqrt(1 + V^4/(4 v0^4)) - V^2/(2 v0^2) for every slot speed.
Eigen::VectorXd exact_slack(const Scenario& s, const Trajectory& q);

/// |y^2 - (sqrt(1 + V^4/(4 v0^4)) - V^2/(2 v0^2))| for one slot.
double slack_residual(const UavPhysics& physics, double speed, double y);

struct TrajectoryOptions {
  std::size_t max_rounds = 200;
  double improvement_tol = 1e-5;
  double slack_tol = 5e-5;  // rounds continue while the slack residual exceeds this
  solver::BarrierOptions barrier;
  solver::DinkelbachOptions dinkelbach;
};

struct ScaRound {
  double ee = 0.0;                  // true EE at the round's solution
  double surrogate_ratio = 0.0;     // Dinkelbach ratio of the surrogate problem
  double max_slack_residual = 0.0;  // over slots, for the optimizer's y
  std::size_t dinkelbach_iterations = 0;
  bool accepted = false;
};

struct TrajectoryResult {
  Trajectory trajectory;
  Eigen::VectorXd slack;            // y of the accepted solution
  double ee = 0.0;
  double max_slack_residual = 0.0;  // of the accepted solution
  std::vector<ScaRound> rounds;
  bool kept_incumbent = false;
};

/// SCA over the trajectory with Dinkelbach inner solves. q_init must satisfy
/// the speed and closure constraints and the throughput requirements under the
/// fixed schedule and power. y_init defaults to the exact slack of q_init.
TrajectoryResult optimize_trajectory(const Scenario& s, const Schedule& b, const PowerProfile& p,
                                     const Trajectory& q_init,
                                     const std::optional<Eigen::VectorXd>& y_init = std::nullopt,
                                     const TrajectoryOptions& options = {});

}  // namespace ubcn
