#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ubcn/metrics.hpp"
#include "ubcn/scenario.hpp"
#include "ubcn/solver/concave_program.hpp"
#include "ubcn/solver/dinkelbach.hpp"

namespace ubcn {

/// Visiting order over BD positions: nearest-neighbour tours from every start,
/// each polished with 2-opt and or-opt moves, shortest kept. The returned cycle
/// starts at index 0 and is deterministic given the input order.
std::vector<std::size_t> tsp_order(const std::vector<Point>& points);

/// Length of the closed tour visiting `points` in `order`.
double tour_length(const std::vector<Point>& points, const std::vector<std::size_t>& order);

/// Hover-and-fly plan. Stop i (0-based) serves BD order[i]: the UAV flies leg i
/// from hover point i-1 to hover point i at V_max, then hovers for times[i]
/// while the serving CE transmits powers[i] throughout leg and hover.
/// positions has K+1 columns with column 0 equal to column K; column i+1 is the
/// hover point of stop i, so leg i runs from column i to column i+1.
struct HoverPlan {
  std::vector<std::size_t> order;
  Eigen::Matrix2Xd positions;
  Eigen::VectorXd times;   // s
  Eigen::VectorXd powers;  // W
  Eigen::VectorXd legs;    // path length of each leg, m

  std::size_t num_stops() const { return order.size(); }
  Point hover(std::size_t i) const { return positions.col(static_cast<Eigen::Index>(i + 1)); }
  double leg(std::size_t i) const;  // recomputed from positions
};

/// Rebuilds plan.legs from plan.positions.
void refresh_legs(HoverPlan& plan);

/// UAV and CE energy of a plan: UAV flies every leg at V_max and hovers
/// otherwise; the serving CE transmits for leg plus hover time.
EnergyBreakdown benchmark_energy(const Scenario& s, const HoverPlan& plan);

/// Energy harvested by BD `bd` (global index): it harvests from its CE during
/// every leg and hover of its CE group except its own hover.
double benchmark_bd_energy(const HoverPlan& plan, const Scenario& s, std::size_t bd);

/// Throughput of the BD served at stop i, bits/Hz.
double benchmark_stop_throughput(const Scenario& s, const HoverPlan& plan, std::size_t i);

double benchmark_ee(const Scenario& s, const HoverPlan& plan);

/// Signed-slack audit: throughput[bd=], harvest[bd=], power[i=], hover_time[i=],
/// time and closure.
SolutionReport evaluate_plan(const Scenario& s, const HoverPlan& plan, double tol = kFeasibilityTol);

/// Linear lower bound 2 d_e.d - ||d_e||^2 of ||d||^2 around d_e.
double squared_length_lower_bound(const Point& d, const Point& d_expand);

struct HoverConfig {
  double epsilon = 1e-4;
  std::size_t max_iters = 100;
  double monotone_slack = 1e-6;
  std::size_t sca_rounds = 20;
  double sca_tol = 1e-5;
  double norm_smoothing = 1e-6;  // m, smooths leg lengths at zero
  solver::BarrierOptions barrier;
  solver::DinkelbachOptions dinkelbach;
};

struct HoverIteration {
  std::size_t iteration = 0;
  double ee_power = 0.0;
  double ee_time = 0.0;
  double ee_position = 0.0;
  double seconds = 0.0;
  std::size_t sca_rounds = 0;
};

struct HoverTrace {
  double initial_ee = 0.0;
  std::vector<HoverIteration> iterations;
  bool converged = false;
};

struct HoverResult {
  HoverPlan plan;
  SolutionReport report;
  HoverTrace trace;
};

/// Hover above each BD in TSP order, equal split of the time left after the
/// tour, half power. Falls back to full power and an LP time split when that
/// start is infeasible. Throws Infeasible with the failing checks otherwise.
HoverPlan initial_plan(const Scenario& s);

/// Power block: Dinkelbach over the stop powers. Returns the input when no
/// strict interior exists or the EE does not improve.
HoverPlan optimize_hover_power(const Scenario& s, const HoverPlan& plan, const HoverConfig& config = {});

/// Hover-time block, a linear-fractional program.
HoverPlan optimize_hover_times(const Scenario& s, const HoverPlan& plan, const HoverConfig& config = {});

/// Position block: successive convex approximation rounds. `history`, when
/// given, receives the plan after each accepted round.
HoverPlan optimize_hover_positions(const Scenario& s, const HoverPlan& plan, const HoverConfig& config = {},
                                   std::vector<HoverPlan>* history = nullptr);

/// Block coordinate ascent over powers, times and positions with the visiting
/// order fixed. Throws InvariantViolation if the EE decreases beyond the slack
/// or an iterate fails the audit.
HoverResult optimize_hover_fly(const Scenario& s, const HoverConfig& config = {});

}  // namespace ubcn
