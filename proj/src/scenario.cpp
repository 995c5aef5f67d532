#include "ubcn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ubcn/errors.hpp"

namespace ubcn {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

ScenarioParams default_params(Profile profile) {
  ScenarioParams p;
  if (profile == Profile::Desk) {
    p.num_slots = 50;
    p.mission_time = 30.0;
  }
  return p;
}

LayoutDefaults default_layout(Profile profile) {
  if (profile == Profile::Desk) return {2, 4, 40.0};
  return {4, 12, 56.0};
}

std::vector<std::size_t> associate_bds(const std::vector<Point>& ce_positions,
                                       const std::vector<Point>& bd_positions) {
  std::vector<std::size_t> association(bd_positions.size(), 0);
  for (std::size_t k = 0; k < bd_positions.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < ce_positions.size(); ++m) {
      const double d2 = (bd_positions[k] - ce_positions[m]).squaredNorm();
      if (d2 < best) {
        best = d2;
        association[k] = m;
      }
    }
  }
  return association;
}

namespace {

std::vector<double> broadcast(const std::vector<double>& values, std::size_t count, const char* name) {
  if (values.size() == count) return values;
  if (values.size() == 1) return std::vector<double>(count, values.front());
  throw ConfigError(std::string("per-BD parameter '") + name + "' must have 1 or K entries");
}

bool finite_point(const Point& p) { return std::isfinite(p.x()) && std::isfinite(p.y()); }

}  // namespace

Scenario::Scenario(ScenarioParams params) : params_(std::move(params)) {
  const auto& p = params_;
  if (p.ce_positions.empty()) throw ConfigError("scenario needs at least one CE");
  if (p.bd_positions.empty()) throw ConfigError("scenario needs at least one BD");
  if (!std::all_of(p.ce_positions.begin(), p.ce_positions.end(), finite_point) ||
      !std::all_of(p.bd_positions.begin(), p.bd_positions.end(), finite_point))
    throw ConfigError("device positions must be finite");
  if (!(p.altitude > 0.0)) throw ConfigError("altitude must be positive");
  if (!(p.mission_time > 0.0)) throw ConfigError("mission time must be positive");
  if (p.num_slots < 1) throw ConfigError("need at least one time slot");
  if (!(p.beta0 > 0.0)) throw ConfigError("beta0 must be positive");
  if (!std::isfinite(p.noise_power_dbm)) throw ConfigError("noise power must be finite");
  if (!(p.p_max > 0.0)) throw ConfigError("p_max must be positive");
  if (!(p.v_max > 0.0)) throw ConfigError("v_max must be positive");
  validate(p.uav);

  const std::size_t k_count = p.bd_positions.size();
  eta_ = broadcast(p.eta, k_count, "eta");
  qbar_ = broadcast(p.qbar, k_count, "qbar");
  ebar_ = broadcast(p.ebar, k_count, "ebar");
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!(eta_[k] >= 0.0 && eta_[k] <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
    if (!(qbar_[k] >= 0.0) || !std::isfinite(qbar_[k])) throw ConfigError("qbar must be non-negative");
    if (!(ebar_[k] >= 0.0) || !std::isfinite(ebar_[k])) throw ConfigError("ebar must be non-negative");
  }

  noise_power_ = dbm_to_watts(p.noise_power_dbm);
  association_ = associate_bds(p.ce_positions, p.bd_positions);
  groups_.assign(p.ce_positions.size(), {});
  local_index_.resize(k_count);
  ce_bd_gain_.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    auto& g = groups_[association_[k]];
    local_index_[k] = g.size();
    g.push_back(k);
    const double d2 = (p.bd_positions[k] - p.ce_positions[association_[k]]).squaredNorm();
    if (!(d2 > 0.0)) throw ConfigError("BD " + std::to_string(k) + " is co-located with its CE");
    ce_bd_gain_[k] = p.beta0 / d2;
  }
  for (const auto& g : groups_) max_group_size_ = std::max(max_group_size_, g.size());
}

double channel_gain_ce_bd(const Scenario& scenario, std::size_t m, std::size_t local) {
  const std::size_t bd = scenario.group(m).at(local);
  const double d2 = (scenario.bd_position(bd) - scenario.ce_position(m)).squaredNorm();
  if (!(d2 > 0.0)) throw ConfigError("co-located CE and BD");
  return scenario.params().beta0 / d2;
}

double channel_gain_bd_uav(const Scenario& scenario, std::size_t bd, const Point& q) {
  const double h = scenario.altitude();
  return scenario.params().beta0 / (h * h + (scenario.bd_position(bd) - q).squaredNorm());
}

Scenario generate_scenario(std::uint64_t seed, std::size_t num_ces, std::size_t num_bds, double area_side,
                           ScenarioParams base) {
  if (num_ces < 1 || num_bds < 1) throw ConfigError("generate_scenario: need M >= 1 and K >= 1");
  if (!(area_side > 0.0) || !std::isfinite(area_side)) throw ConfigError("generate_scenario: area side must be positive");

  std::mt19937_64 rng(seed);
  // 53-bit uniform in [0,1); independent of the standard library's distribution code.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(num_ces))));
  const std::size_t rows = (num_ces + cols - 1) / cols;
  const double cell_w = area_side / static_cast<double>(cols);
  const double cell_h = area_side / static_cast<double>(rows);

  base.ce_positions.clear();
  for (std::size_t m = 0; m < num_ces; ++m) {
    const double cx = (static_cast<double>(m % cols) + 0.5) * cell_w;
    const double cy = (static_cast<double>(m / cols) + 0.5) * cell_h;
    base.ce_positions.emplace_back(cx, cy);
  }

  base.bd_positions.clear();
  if (num_bds % num_ces == 0) {
    const std::size_t per_ce = num_bds / num_ces;
    for (std::size_t m = 0; m < num_ces; ++m) {
      const double x0 = static_cast<double>(m % cols) * cell_w;
      const double y0 = static_cast<double>(m / cols) * cell_h;
      for (std::size_t j = 0; j < per_ce; ++j) {
        const double x = x0 + uniform() * cell_w;
        const double y = y0 + uniform() * cell_h;
        base.bd_positions.emplace_back(x, y);
      }
    }
  } else {
    for (std::size_t k = 0; k < num_bds; ++k) {
      const double x = uniform() * area_side;
      const double y = uniform() * area_side;
      base.bd_positions.emplace_back(x, y);
    }
    const auto assoc = associate_bds(base.ce_positions, base.bd_positions);
    std::vector<std::size_t> order(num_bds);
    for (std::size_t k = 0; k < num_bds; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return assoc[a] < assoc[b]; });
    std::vector<Point> sorted;
    for (std::size_t k : order) sorted.push_back(base.bd_positions[k]);
    base.bd_positions = std::move(sorted);
  }
  return Scenario(std::move(base));
}

}  // namespace ubcn
