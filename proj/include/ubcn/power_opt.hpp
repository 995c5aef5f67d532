#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ubcn/metrics.hpp"
#include "ubcn/scenario.hpp"
#include "ubcn/solver/concave_program.hpp"
#include "ubcn/solver/dinkelbach.hpp"

namespace ubcn {

/// Power block data for a fixed schedule and trajectory. Row k of `snr_slope`
/// and `scheduled` belongs to BD k, served by CE `ce[k]`.
struct PowerInstance {
  std::size_t num_ces = 0;
  std::size_t num_slots = 0;
  double slot_length = 0.0;
  double p_max = 0.0;
  double uav_energy = 0.0;      // J, fixed by the trajectory
  std::vector<std::size_t> ce;
  Eigen::MatrixXd snr_slope;    // c2 = beta0 beta / (sigma^2 (H^2 + ||w - q||^2))
  Eigen::MatrixXd scheduled;    // 0/1
  std::vector<double> qbar;
  std::vector<double> ebar;
  std::vector<double> harvest;  // T_s * eta * beta per BD
};

PowerInstance build_power_instance(const Scenario& s, const Schedule& b, const Trajectory& q);

/// Per-BD throughput and harvested energy of a profile under the instance.
Eigen::VectorXd power_throughput(const PowerInstance& inst, const PowerProfile& p);
Eigen::VectorXd power_harvest(const PowerInstance& inst, const PowerProfile& p);
/// Throughput over (E_UAV + T_s * sum P).
double power_ratio(const PowerInstance& inst, const PowerProfile& p);
/// Box, throughput and energy constraints within tol.
bool power_feasible(const PowerInstance& inst, const PowerProfile& p, double tol = kFeasibilityTol);

struct PowerOptions {
  solver::BarrierOptions barrier;
  solver::DinkelbachOptions dinkelbach;
};

struct PowerResult {
  PowerProfile power;
  double ratio = 0.0;
  solver::DinkelbachResult dinkelbach;
  bool kept_incumbent = false;
};

/// Dinkelbach over the concave power program. A feasible incumbent seeds the
/// first ratio and is returned unchanged if the solve cannot beat it.
/// Throws Infeasible when even P = P_max everywhere violates a requirement.
PowerResult optimize_power(const PowerInstance& inst, const std::optional<PowerProfile>& incumbent = std::nullopt,
                           const PowerOptions& options = {});

PowerResult optimize_power(const Scenario& s, const Schedule& b, const Trajectory& q,
                           const std::optional<PowerProfile>& incumbent = std::nullopt,
                           const PowerOptions& options = {});

}  // namespace ubcn
