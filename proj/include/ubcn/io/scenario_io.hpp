#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ubcn/scenario.hpp"

namespace ubcn::io {

/// Parses "<number> <unit>" with unit W, mW or dBm into watts. Throws
/// ConfigError when the unit is missing or unknown.
double parse_power_watts(const std::string& text);

/// Parses "<number> <unit>" into dBm.
double parse_power_dbm(const std::string& text);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_exact(double value);

nlohmann::ordered_json scenario_to_json(const ScenarioParams& params);

/// Throws ConfigError on missing keys, wrong types or unit-less powers.
ScenarioParams scenario_from_json(const nlohmann::json& doc);

void save_scenario(const std::filesystem::path& path, const ScenarioParams& params);
ScenarioParams load_scenario(const std::filesystem::path& path);

/// Generation inputs that are not part of the scenario document itself.
struct GenerationSpec {
  std::uint64_t seed = 1;
  Profile profile = Profile::Desk;
  std::size_t num_ces = 0;  // 0: profile default
  std::size_t num_bds = 0;
  double area_side = 0.0;
};

/// Applies "key=value" overrides. Layout keys (M, K, area_side) go to `gen`;
/// everything else to `params`. Accepted keys: M, K, area_side, T, N, H,
/// beta0, noise_power, eta, qbar, ebar, p_max, v_max, carrier_freq.
void apply_overrides(const std::vector<std::string>& overrides, GenerationSpec& gen, ScenarioParams& params);

/// Profile defaults, overrides, then the seeded layout.
Scenario generate_from_spec(const GenerationSpec& gen, const std::vector<std::string>& overrides);

}  // namespace ubcn::io
