#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ubcn/uav_power.hpp"

namespace ubcn {

using Point = Eigen::Vector2d;

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

enum class Profile { Desk, Paper };

/// Serializable world description. Per-BD vectors (eta, qbar, ebar) may hold a
/// single value that applies to every BD.
struct ScenarioParams {
  std::vector<Point> ce_positions;
  std::vector<Point> bd_positions;
  double altitude = 20.0;          // H, m
  double mission_time = 50.0;      // T, s
  std::size_t num_slots = 200;     // N
  double beta0 = 1e-3;             // reference channel gain at 1 m
  double noise_power_dbm = -144.0;
  std::vector<double> eta{0.5};
  std::vector<double> qbar{30.0};  // bits/Hz
  std::vector<double> ebar{1e-4};  // J
  double p_max = 6.0;              // W
  double v_max = 10.0;             // m/s
  UavPhysics uav;
  double carrier_freq = 900e6;     // Hz, descriptive only

  bool operator==(const ScenarioParams&) const = default;
};

/// Non-geometric defaults for a profile. Desk: N=50, T=30 s; Paper: N=200, T=50 s.
ScenarioParams default_params(Profile profile);

struct LayoutDefaults {
  std::size_t num_ces;
  std::size_t num_bds;
  double area_side;
};

/// Desk: 2 CEs, 4 BDs on a 40 m square; Paper: 4 CEs, 12 BDs on a 56 m square.
LayoutDefaults default_layout(Profile profile);

/// Maps every BD to its nearest CE; ties go to the lowest CE index.
std::vector<std::size_t> associate_bds(const std::vector<Point>& ce_positions,
                                       const std::vector<Point>& bd_positions);

/// Validated, immutable world. BDs keep their input order (global index) and
/// are additionally grouped per CE; (m, local) pairs index the schedule tensor.
class Scenario {
 public:
  explicit Scenario(ScenarioParams params);

  const ScenarioParams& params() const { return params_; }

  std::size_t num_ces() const { return params_.ce_positions.size(); }
  std::size_t num_bds() const { return params_.bd_positions.size(); }
  std::size_t num_slots() const { return params_.num_slots; }
  /// K-bar: largest number of BDs served by one CE.
  std::size_t max_group_size() const { return max_group_size_; }
  double slot_length() const { return params_.mission_time / static_cast<double>(params_.num_slots); }
  double noise_power() const { return noise_power_; }
  double altitude() const { return params_.altitude; }

  const Point& ce_position(std::size_t m) const { return params_.ce_positions[m]; }
  const Point& bd_position(std::size_t bd) const { return params_.bd_positions[bd]; }
  std::size_t ce_of(std::size_t bd) const { return association_[bd]; }
  std::size_t local_index(std::size_t bd) const { return local_index_[bd]; }
  const std::vector<std::size_t>& group(std::size_t m) const { return groups_[m]; }
  const std::vector<std::size_t>& association() const { return association_; }

  double eta(std::size_t bd) const { return eta_[bd]; }
  double qbar(std::size_t bd) const { return qbar_[bd]; }
  double ebar(std::size_t bd) const { return ebar_[bd]; }

  /// CE-to-BD gain beta_{m,k} for the BD's associated CE.
  double ce_bd_gain(std::size_t bd) const { return ce_bd_gain_[bd]; }

 private:
  ScenarioParams params_;
  std::vector<std::size_t> association_;
  std::vector<std::size_t> local_index_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<double> eta_, qbar_, ebar_;
  std::vector<double> ce_bd_gain_;
  std::size_t max_group_size_ = 0;
  double noise_power_ = 0.0;
};

/// beta_0 / ||w - u||^2 for BD `local` of CE m. Throws ConfigError when co-located.
double channel_gain_ce_bd(const Scenario& scenario, std::size_t m, std::size_t local);

/// beta_0 / (H^2 + ||w - q||^2) for a BD (global index) and horizontal UAV position q.
double channel_gain_bd_uav(const Scenario& scenario, std::size_t bd, const Point& q);

/// Deterministic layout: CEs at the cell centres of a near-square grid over the
/// area, K/M BDs uniform in each CE's cell (uniform over the whole area when K
/// is not a multiple of M). Remaining fields come from `base`.
Scenario generate_scenario(std::uint64_t seed, std::size_t num_ces, std::size_t num_bds, double area_side,
                           ScenarioParams base = default_params(Profile::Paper));

}  // namespace ubcn
