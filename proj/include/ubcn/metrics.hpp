#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ubcn/scenario.hpp"

namespace ubcn {

/// Binary scheduling tensor b_{m,k}(n) of shape M x Kbar x N. Slot n is
/// 0-based and is flown between waypoints n and n+1.
class Schedule {
 public:
  Schedule() = default;
  Schedule(std::size_t num_ces, std::size_t max_group, std::size_t num_slots);
  explicit Schedule(const Scenario& scenario);

  std::size_t num_ces() const { return num_ces_; }
  std::size_t max_group() const { return max_group_; }
  std::size_t num_slots() const { return num_slots_; }

  std::uint8_t& at(std::size_t m, std::size_t local, std::size_t n) {
    return data_[(m * max_group_ + local) * num_slots_ + n];
  }
  std::uint8_t at(std::size_t m, std::size_t local, std::size_t n) const {
    return data_[(m * max_group_ + local) * num_slots_ + n];
  }

  /// Convenience accessors through the scenario's BD grouping.
  std::uint8_t& of(const Scenario& s, std::size_t bd, std::size_t n) { return at(s.ce_of(bd), s.local_index(bd), n); }
  std::uint8_t of(const Scenario& s, std::size_t bd, std::size_t n) const {
    return at(s.ce_of(bd), s.local_index(bd), n);
  }

  /// Global index of the BD scheduled in slot n, if exactly one is.
  std::optional<std::size_t> scheduled_bd(const Scenario& s, std::size_t n) const;

  const std::vector<std::uint8_t>& raw() const { return data_; }
  bool operator==(const Schedule&) const = default;

 private:
  std::size_t num_ces_ = 0, max_group_ = 0, num_slots_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Transmit power P_m(n), watts, M x N.
using PowerProfile = Eigen::MatrixXd;

/// Waypoints q(0..N), 2 x (N+1), metres.
using Trajectory = Eigen::Matrix2Xd;

struct EnergyBreakdown {
  double uav = 0.0;  // J
  double ce = 0.0;   // J
  double total() const { return uav + ce; }
};

struct ConstraintCheck {
  std::string id;   // e.g. "throughput[bd=2]" or "speed[n=17]"
  double slack;     // >= 0 when satisfied, native units
  bool satisfied;
};

struct SolutionReport {
  double ee = 0.0;                      // bits/Hz/J
  Eigen::VectorXd per_bd_throughput;    // bits/Hz
  Eigen::VectorXd per_bd_energy;        // J
  double uav_energy = 0.0;
  double ce_energy = 0.0;
  std::vector<ConstraintCheck> constraint_audit;

  bool feasible() const;
  double total_throughput() const { return per_bd_throughput.sum(); }
};

inline constexpr double kFeasibilityTol = 1e-6;

/// Horizontal UAV speed in slot n (0-based).
double slot_speed(const Scenario& s, const Trajectory& q, std::size_t n);

/// log2(1 + beta0 beta P_m(n) / (sigma^2 (H^2 + ||w - q(n+1)||^2))) for a BD in slot n.
double slot_rate(const Scenario& s, std::size_t bd, std::size_t n, const PowerProfile& p, const Trajectory& q);

Eigen::VectorXd bd_throughput(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q);
Eigen::VectorXd bd_harvested_energy(const Scenario& s, const Schedule& b, const PowerProfile& p);
EnergyBreakdown total_energy(const Scenario& s, const PowerProfile& p, const Trajectory& q);
double energy_efficiency(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q);

/// Signed slack of every instance of the throughput, harvested-energy, TDMA,
/// binary, power-box, speed and closure constraints.
std::vector<ConstraintCheck> audit(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q,
                                   double tol = kFeasibilityTol);

bool all_satisfied(const std::vector<ConstraintCheck>& checks);

SolutionReport evaluate(const Scenario& s, const Schedule& b, const PowerProfile& p, const Trajectory& q,
                        double tol = kFeasibilityTol);

/// Throws std::invalid_argument when tensor shapes disagree with the scenario.
void check_shapes(const Scenario& s, const Schedule* b, const PowerProfile* p, const Trajectory* q);

}  // namespace ubcn
