#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ubcn/io/artifacts.hpp"
#include "ubcn/io/scenario_io.hpp"
#include "ubcn/scenario.hpp"

namespace ubcn::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,  // bad flags, unreadable or invalid configuration
  kInfeasible = 2,
  kNumerical = 3,
  kInvariant = 4,
};

enum class Scheme { Fly, Hover };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

/// Writes <out_dir>/scenario.json and returns its path.
std::filesystem::path cmd_gen_scenario(const io::GenerationSpec& gen, const std::vector<std::string>& overrides,
                                       const std::filesystem::path& out_dir);

struct RunOutcome {
  io::RunArtifacts files;
  double ee = 0.0;
  std::size_t iterations = 0;
  double throughput = 0.0;
  double uav_energy = 0.0;
  double ce_energy = 0.0;
};

/// Runs one scheme and writes its artifact tables into out_dir. Exceptions
/// from the optimizers propagate.
RunOutcome cmd_optimize(const Scenario& s, Scheme scheme, std::uint64_t seed, const std::filesystem::path& out_dir);

/// Scenario with one parameter replaced: "qbar" sets every BD's requirement,
/// "T" sets the mission time and rescales N to keep the slot length.
Scenario with_parameter(const ScenarioParams& base, const std::string& param, double value);

/// Both schemes at every value, run on up to `workers` threads. Rows are
/// ordered by value, then fly before hover; failures become rows.
std::vector<io::SweepRow> cmd_sweep(const ScenarioParams& base, const std::string& param,
                                    const std::vector<double>& values, std::uint64_t seed, std::size_t workers,
                                    const std::filesystem::path& out_dir);

/// Maps an optimizer exception to its exit code and status label.
std::pair<int, std::string> classify(const std::exception& e);

/// Entry point of the ubcn executable.
int run(int argc, char** argv);

}  // namespace ubcn::cli
