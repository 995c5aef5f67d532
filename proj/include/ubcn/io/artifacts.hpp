#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ubcn/bcd_driver.hpp"
#include "ubcn/hover_fly.hpp"
#include "ubcn/metrics.hpp"
#include "ubcn/scenario.hpp"

namespace ubcn::io {

/// Nine significant digits, the precision of every emitted table.
std::string format_number(double value);

/// Paths of the files emitted for one optimization run.
struct RunArtifacts {
  std::filesystem::path summary;      // summary.json
  std::filesystem::path trajectory;   // trajectory.csv
  std::filesystem::path schedule;     // schedule.csv
  std::filesystem::path power;        // power.csv
  std::filesystem::path convergence;  // convergence.csv
  std::filesystem::path hover_plan;   // hover_plan.csv, hover scheme only
};

/// Tables of a communicate-while-fly run:
///   trajectory.csv  slot,x,y,speed,propulsion_power,scheduled,ce_power
///                   (row n: waypoint n and the slot flown from it; row N closes the loop)
///   schedule.csv    index,ce,local,bd,duration   (one row per scheduled slot)
///   power.csv       index,ce,power               (every slot and CE)
///   convergence.csv iteration,ee_schedule,ee_power,ee_trajectory,sca_rounds,max_slack_residual,
///                   schedule_proven
RunArtifacts write_fly_artifacts(const std::filesystem::path& dir, const Scenario& s, const BcdResult& result,
                                 std::uint64_t seed);

/// Tables of a hover-and-fly run, same layout where it applies: row i of the
/// trajectory describes leg i and the hover of stop i; schedule and power rows
/// are per stop; hover_plan.csv lists
/// stop,bd,ce,x,y,hover_time,power,leg_length,throughput,harvested.
RunArtifacts write_hover_artifacts(const std::filesystem::path& dir, const Scenario& s, const HoverResult& result,
                                   std::uint64_t seed);

/// Machine-readable failure record error.json.
void write_error_record(const std::filesystem::path& dir, const std::string& status, int exit_code,
                        const std::string& message);

struct SweepRow {
  std::string param;
  double value = 0.0;
  std::string scheme;
  std::string status;  // ok, infeasible, numerical, invariant, error
  double ee = 0.0;
  std::size_t iterations = 0;
  double throughput = 0.0;
  double uav_energy = 0.0;
  double ce_energy = 0.0;
  std::string message;
};

/// sweep.csv: param,value,scheme,status,ee,iterations,throughput,uav_energy,ce_energy,message
void write_sweep_table(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_table(const std::filesystem::path& path);

/// Header plus rows of a comma-separated table; double-quoted fields may
/// contain commas.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

struct FlyTables {
  Schedule schedule;
  PowerProfile power;
  Trajectory trajectory;
};

/// Rebuilds a fly-scheme solution from its tables.
FlyTables read_fly_artifacts(const std::filesystem::path& dir, const Scenario& s);

/// Rebuilds a hover plan from hover_plan.csv.
HoverPlan read_hover_plan(const std::filesystem::path& dir, const Scenario& s);

}  // namespace ubcn::io
