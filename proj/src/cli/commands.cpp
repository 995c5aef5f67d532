#include "ubcn/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "ubcn/bcd_driver.hpp"
#include "ubcn/errors.hpp"
#include "ubcn/hover_fly.hpp"

namespace ubcn::cli {

namespace fs = std::filesystem;

Scheme parse_scheme(const std::string& name) {
  if (name == "fly") return Scheme::Fly;
  if (name == "hover") return Scheme::Hover;
  throw ConfigError("unknown scheme '" + name + "' (use fly or hover)");
}

std::string scheme_name(Scheme scheme) { return scheme == Scheme::Fly ? "fly" : "hover"; }

fs::path cmd_gen_scenario(const io::GenerationSpec& gen, const std::vector<std::string>& overrides,
                          const fs::path& out_dir) {
  const Scenario s = io::generate_from_spec(gen, overrides);
  const fs::path path = out_dir / "scenario.json";
  io::save_scenario(path, s.params());
  return path;
}

RunOutcome cmd_optimize(const Scenario& s, Scheme scheme, std::uint64_t seed, const fs::path& out_dir) {
  RunOutcome out;
  const SolutionReport* report = nullptr;
  if (scheme == Scheme::Fly) {
    const BcdResult r = run_bcd(s, BcdConfig{}, seed);
    out.files = io::write_fly_artifacts(out_dir, s, r, seed);
    out.iterations = r.trace.iterations.size();
    out.ee = r.solution.report.ee;
    report = &r.solution.report;
    out.throughput = report->total_throughput();
    out.uav_energy = report->uav_energy;
    out.ce_energy = report->ce_energy;
  } else {
    const HoverResult r = optimize_hover_fly(s);
    out.files = io::write_hover_artifacts(out_dir, s, r, seed);
    out.iterations = r.trace.iterations.size();
    out.ee = r.report.ee;
    report = &r.report;
    out.throughput = report->total_throughput();
    out.uav_energy = report->uav_energy;
    out.ce_energy = report->ce_energy;
  }
  return out;
}

Scenario with_parameter(const ScenarioParams& base, const std::string& param, double value) {
  ScenarioParams p = base;
  if (param == "qbar") {
    p.qbar = {value};
  } else if (param == "T") {
    const double slot = base.mission_time / static_cast<double>(base.num_slots);
    p.mission_time = value;
    p.num_slots = static_cast<std::size_t>(std::max(1.0, std::round(value / slot)));
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "' (use qbar or T)");
  }
  return Scenario(std::move(p));
}

std::pair<int, std::string> classify(const std::exception& e) {
  if (dynamic_cast<const Infeasible*>(&e)) return {kInfeasible, "infeasible"};
  if (dynamic_cast<const NumericalFailure*>(&e) || dynamic_cast<const StartInfeasible*>(&e))
    return {kNumerical, "numerical"};
  if (dynamic_cast<const InvariantViolation*>(&e)) return {kInvariant, "invariant"};
  if (dynamic_cast<const ConfigError*>(&e)) return {kUsage, "config"};
  return {kUsage, "error"};
}

std::vector<io::SweepRow> cmd_sweep(const ScenarioParams& base, const std::string& param,
                                    const std::vector<double>& values, std::uint64_t seed, std::size_t workers,
                                    const fs::path& out_dir) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (param != "qbar" && param != "T") throw ConfigError("unknown sweep parameter '" + param + "' (use qbar or T)");
  const Scheme schemes[] = {Scheme::Fly, Scheme::Hover};
  std::vector<io::SweepRow> rows(values.size() * 2);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t job = next++; job < rows.size(); job = next++) {
      io::SweepRow& row = rows[job];
      row.param = param;
      row.value = values[job / 2];
      const Scheme scheme = schemes[job % 2];
      row.scheme = scheme_name(scheme);
      try {
        const Scenario s = with_parameter(base, param, row.value);
        const fs::path dir = out_dir / "points" / (param + "_" + io::format_number(row.value) + "_" + row.scheme);
        const RunOutcome r = cmd_optimize(s, scheme, seed, dir);
        row.status = "ok";
        row.ee = r.ee;
        row.iterations = r.iterations;
        row.throughput = r.throughput;
        row.uav_energy = r.uav_energy;
        row.ce_energy = r.ce_energy;
      } catch (const std::exception& e) {
        row.status = classify(e).second;
        row.message = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, rows.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  io::write_sweep_table(out_dir / "sweep.csv", rows);
  return rows;
}

namespace {

Profile parse_profile(const std::string& name) {
  if (name == "desk") return Profile::Desk;
  if (name == "paper") return Profile::Paper;
  throw ConfigError("unknown profile '" + name + "' (use desk or paper)");
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : CLI::detail::split(text, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Energy-efficiency optimizer for UAV-assisted bistatic backscatter networks"};
  app.require_subcommand(1);

  std::string scenario_path, scheme = "fly", profile = "desk", param, values, out_dir = ".";
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::vector<std::string> overrides;

  auto* gen = app.add_subcommand("gen-scenario", "Generate a scenario document");
  gen->add_option("--seed", seed, "Layout seed");
  gen->add_option("--profile", profile, "Default set: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  gen->add_option("--out-dir", out_dir, "Directory for scenario.json");
  gen->add_option("--set", overrides, "Override key=value (M, K, area_side, T, N, H, qbar, ebar, eta, p_max, ...)");

  auto* opt = app.add_subcommand("optimize", "Optimize one scenario with one scheme");
  opt->add_option("--scenario", scenario_path, "Scenario document (generated from --profile and --seed if omitted)");
  opt->add_option("--scheme", scheme, "fly or hover")->check(CLI::IsMember({"fly", "hover"}));
  opt->add_option("--seed", seed, "Seed for the initial point and generated layouts");
  opt->add_option("--profile", profile, "Default set when no scenario is given")->check(CLI::IsMember({"desk", "paper"}));
  opt->add_option("--out-dir", out_dir, "Directory for the artifact tables");

  auto* sweep = app.add_subcommand("sweep", "Run both schemes over a parameter grid");
  sweep->add_option("--scenario", scenario_path, "Scenario document (generated from --profile and --seed if omitted)");
  sweep->add_option("--param", param, "qbar or T")->required()->check(CLI::IsMember({"qbar", "T"}));
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--seed", seed, "Seed for the initial point and generated layouts");
  sweep->add_option("--profile", profile, "Default set when no scenario is given")->check(CLI::IsMember({"desk", "paper"}));
  sweep->add_option("--workers", workers, "Parallel sweep points")->check(CLI::PositiveNumber);
  sweep->add_option("--out-dir", out_dir, "Directory for sweep.csv and per-point tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  auto load = [&]() -> ScenarioParams {
    if (!scenario_path.empty()) return io::load_scenario(scenario_path);
    io::GenerationSpec g;
    g.seed = seed;
    g.profile = parse_profile(profile);
    return io::generate_from_spec(g, {}).params();
  };

  try {
    if (gen->parsed()) {
      io::GenerationSpec g;
      g.seed = seed;
      g.profile = parse_profile(profile);
      std::cout << cmd_gen_scenario(g, overrides, out_dir).string() << '\n';
      return kOk;
    }
    if (opt->parsed()) {
      try {
        const Scenario s(load());
        const RunOutcome r = cmd_optimize(s, parse_scheme(scheme), seed, out_dir);
        std::cout << scheme << " ee " << io::format_number(r.ee) << " iterations " << r.iterations << " -> "
                  << out_dir << '\n';
        return kOk;
      } catch (const std::exception& e) {
        const auto [code, status] = classify(e);
        io::write_error_record(out_dir, status, code, e.what());
        std::cerr << status << ": " << e.what() << '\n';
        return code;
      }
    }
    const auto rows = cmd_sweep(load(), param, parse_values(values), seed, workers, out_dir);
    for (const auto& r : rows)
      std::cout << r.param << '=' << io::format_number(r.value) << ' ' << r.scheme << ' ' << r.status
                << (r.status == "ok" ? " ee " + io::format_number(r.ee) : " " + r.message) << '\n';
    return kOk;
  } catch (const std::exception& e) {
    const auto [code, status] = classify(e);
    std::cerr << status << ": " << e.what() << '\n';
    return code;
  }
}

}  // namespace ubcn::cli
