// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "instances.hpp"
#include "oracles.hpp"
#include "ubcn/bcd_driver.hpp"
#include "ubcn/cli/commands.hpp"
#include "ubcn/errors.hpp"
#include "ubcn/hover_fly.hpp"
#include "ubcn/io/scenario_io.hpp"
#include "ubcn/trajectory_opt.hpp"
#include "ubcn/uav_power.hpp"

using namespace ubcn;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("%s %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

ScenarioParams desk(std::uint64_t seed) {
  io::GenerationSpec g;
  g.seed = seed;
  return io::generate_from_spec(g, {}).params();
}

/// Every block value is at least the one before it, within the slack.
bool monotone(const ConvergenceTrace& t, double slack) {
  double prev = t.initial_ee;
  for (const IterationRecord& r : t.iterations)
    for (double v : {r.ee_schedule, r.ee_power, r.ee_trajectory}) {
      if (v < prev - slack) return false;
      prev = v;
    }
  return true;
}

double max_slack_residual(const Scenario& s, const BcdResult& r) {
  double worst = 0.0;
  for (const IterationRecord& it : r.trace.iterations) worst = std::max(worst, it.max_slack_residual);
  for (std::size_t n = 0; n < s.num_slots(); ++n)
    worst = std::max(worst, slack_residual(s.params().uav, slot_speed(s, r.solution.trajectory, n),
                                           r.solution.slack(static_cast<Eigen::Index>(n))));
  return worst;
}

struct DeskRun {
  std::optional<BcdResult> fly;
  std::string fly_error;
  std::optional<HoverResult> hover;
  std::string hover_error;
};

std::map<std::uint64_t, DeskRun> desk_runs;
std::vector<double> slack_residuals;

DeskRun& desk_run(std::uint64_t seed) {
  auto it = desk_runs.find(seed);
  if (it != desk_runs.end()) return it->second;
  DeskRun& run = desk_runs[seed];
  const Scenario s(desk(seed));
  try {
    run.fly = run_bcd(s, BcdConfig{}, seed);
    slack_residuals.push_back(max_slack_residual(s, *run.fly));
  } catch (const std::exception& e) {
    run.fly_error = e.what();
  }
  try {
    run.hover = optimize_hover_fly(s);
  } catch (const std::exception& e) {
    run.hover_error = e.what();
  }
  return run;
}

Verdict hover_constants() {
  const UavPhysics u;
  const double pb = blade_profile_power(u), pi = induced_power(u), p0 = propulsion_power(u, 0.0);
  const bool ok = std::abs(pb - 9.1827) <= 1e-3 && std::abs(pi - 11.5274) <= 1e-2 && std::abs(p0 - 20.7101) <= 1e-2;
  return {ok, "P_b=" + fmt(pb, 8) + " (want 9.1827+-0.001) P_i=" + fmt(pi, 8) + " (want 11.5274+-0.01) P(0)=" +
                  fmt(p0, 8) + " (want 20.7101+-0.01)"};
}

Verdict min_speed() {
  const UavPhysics u;
  const double vme = min_power_speed(u);
  const auto [grid_v, grid_p] =
      oracle::grid_argmax([&](double v) { return -propulsion_power(u, v); }, 0.0, u.tip_speed / 2.0, 1e-3);
  const bool ok = std::abs(vme - 5.76) <= 0.05 && std::abs(vme - grid_v) <= 1e-3;
  return {ok, "V_me=" + fmt(vme) + " grid=" + fmt(grid_v) + " P(V_me)=" + fmt(-grid_p)};
}

Verdict scheduler_oracle() {
  std::mt19937_64 rng(2024);
  int matched = 0, tried = 0, draws = 0;
  double worst = 0.0;
  while (tried < 50 && draws < 1000) {
    ++draws;
    const auto c = fixture::random_scheduling_case(rng);
    const SchedulingInstance inst = build_scheduling_instance(c.scenario, c.power, c.trajectory);
    const auto expect = oracle::schedule_by_enumeration(c.scenario, inst);
    if (!expect) continue;
    ++tried;
    const ScheduleResult r = optimize_schedule(c.scenario, c.power, c.trajectory);
    const double diff = std::abs(r.objective - *expect);
    worst = std::max(worst, diff);
    if (diff <= 1e-12 * std::max(1.0, std::abs(*expect))) ++matched;
  }
  return {tried == 50 && matched == 50,
          std::to_string(matched) + "/" + std::to_string(tried) + " feasible instances match enumeration, max |diff|=" +
              fmt(worst)};
}

Verdict dinkelbach_oracle() {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> log_c2(3.0, 9.0), e(1.0, 60.0);
  int ok = 0;
  double worst_p = 0.0, worst_r = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double c2 = std::pow(10.0, log_c2(rng)), uav = e(rng);
    const PowerResult r = optimize_power(fixture::one_slot_power_instance(c2, uav));
    const auto [gp, gv] = oracle::grid_argmax(
        [&](double p) { return 0.6 * std::log2(1.0 + c2 * p) / (uav + 0.6 * p); }, 0.0, 6.0, 1e-4);
    const double dp = std::abs(r.power(0, 0) - gp), dr = std::abs(r.ratio - gv);
    worst_p = std::max(worst_p, dp);
    worst_r = std::max(worst_r, dr);
    if (dp <= 1e-3 && dr <= 1e-5) ++ok;
  }
  return {ok == 20, std::to_string(ok) + "/20 draws, max |dP|=" + fmt(worst_p) + " max |dratio|=" + fmt(worst_r)};
}

Verdict sca_bounds() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-60.0, 60.0), lc(2.0, 10.0), us(-10.0, 10.0), uy(0.05, 1.5);
  int rate_bad = 0, slack_bad = 0;
  double rate_gap = 0.0, slack_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double c3 = std::pow(10.0, lc(rng));
    const Point w(u(rng), u(rng)), q(u(rng), u(rng)), qe(u(rng), u(rng));
    const double exact = exact_rate(c3, 20.0, w, q);
    if (rate_lower_bound(c3, 20.0, w, q, qe) > exact + 1e-12 * std::max(1.0, exact)) ++rate_bad;
    rate_gap = std::max(rate_gap, std::abs(rate_lower_bound(c3, 20.0, w, qe, qe) - exact_rate(c3, 20.0, w, qe)));
  }
  const double v0 = UavPhysics{}.mean_induced_velocity, ts = 0.6;
  for (int i = 0; i < 1000; ++i) {
    const Point qp(us(rng), us(rng)), q(us(rng), us(rng)), ep(us(rng), us(rng)), e(us(rng), us(rng));
    const double y = uy(rng), ye = uy(rng);
    if (slack_rhs_lower_bound(v0, ts, qp, q, ep, e, y, ye) > slack_rhs(v0, ts, qp, q, y) + 1e-12) ++slack_bad;
    slack_gap = std::max(slack_gap, std::abs(slack_rhs_lower_bound(v0, ts, ep, e, ep, e, ye, ye) -
                                             slack_rhs(v0, ts, ep, e, ye)));
  }
  const bool ok = rate_bad == 0 && slack_bad == 0 && rate_gap <= 1e-9 && slack_gap <= 1e-9;
  return {ok, "rate bound violations " + std::to_string(rate_bad) + "/1000, gap at expansion " + fmt(rate_gap) +
                  "; slack bound violations " + std::to_string(slack_bad) + "/1000, gap at expansion " +
                  fmt(slack_gap)};
}

Verdict bcd_monotone() {
  int ok = 0;
  std::size_t most_iters = 0;
  std::string failed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DeskRun& run = desk_run(seed);
    if (!run.fly) {
      failed += " seed " + std::to_string(seed) + " (" + run.fly_error + ")";
      continue;
    }
    const Scenario s(desk(seed));
    const BcdResult& r = *run.fly;
    const bool good = monotone(r.trace, 1e-6) && r.trace.status == BcdStatus::Converged &&
                      r.trace.iterations.size() <= 100 &&
                      evaluate(s, r.solution.schedule, r.solution.power, r.solution.trajectory, 1e-6).feasible();
    most_iters = std::max(most_iters, r.trace.iterations.size());
    if (good) ++ok;
    else failed += " seed " + std::to_string(seed);
  }
  return {ok == 10, std::to_string(ok) + "/10 seeds monotone, converged and audit-clean, at most " +
                        std::to_string(most_iters) + " iterations" + (failed.empty() ? "" : "; failed:" + failed)};
}

Verdict dominance() {
  int dominated = 0, strict = 0;
  std::vector<double> gains;
  std::string hover_infeasible, notes;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DeskRun& run = desk_run(seed);
    if (!run.fly) {
      notes += " seed " + std::to_string(seed) + " fly failed;";
      continue;
    }
    const double fly = run.fly->solution.report.ee;
    if (!run.hover) {
      ++dominated;
      ++strict;
      hover_infeasible += " " + std::to_string(seed);
      continue;
    }
    const double hover = run.hover->report.ee;
    if (fly >= hover) ++dominated;
    if (fly > hover) ++strict;
    else notes += " seed " + std::to_string(seed) + " fly " + fmt(fly) + " <= hover " + fmt(hover) + ";";
    gains.push_back(100.0 * (fly - hover) / hover);
  }
  double mean = 0.0;
  for (double g : gains) mean += g;
  if (!gains.empty()) mean /= static_cast<double>(gains.size());
  const auto [lo, hi] = std::minmax_element(gains.begin(), gains.end());
  std::string detail = "fly >= hover on " + std::to_string(dominated) + "/10, strictly on " + std::to_string(strict) +
                       "/10";
  if (!gains.empty())
    detail += "; gain over feasible hover plans mean " + fmt(mean, 4) + "% (min " + fmt(*lo, 4) + "%, max " +
              fmt(*hi, 4) + "%)";
  if (!hover_infeasible.empty()) detail += "; hover-and-fly infeasible on seeds" + hover_infeasible;
  if (!notes.empty()) detail += ";" + notes;
  return {dominated == 10 && strict >= 9, detail};
}

std::vector<double> fly_sweep(const std::string& param, const std::vector<double>& values) {
  const ScenarioParams base = desk(1);
  std::vector<double> ee;
  for (double v : values) {
    const Scenario s = cli::with_parameter(base, param, v);
    const BcdResult r = run_bcd(s, BcdConfig{}, 1);
    slack_residuals.push_back(max_slack_residual(s, r));
    ee.push_back(r.solution.report.ee);
  }
  return ee;
}

Verdict trends() {
  const std::vector<double> qbars{20, 25, 30, 35, 40}, times{30, 40, 50};
  const std::vector<double> eq = fly_sweep("qbar", qbars), et = fly_sweep("T", times);
  bool ok = true;
  for (std::size_t i = 1; i < eq.size(); ++i) ok = ok && eq[i] <= eq[i - 1] + 1e-4;
  for (std::size_t i = 1; i < et.size(); ++i) ok = ok && et[i] >= et[i - 1] - 1e-4;
  std::string detail = "qbar";
  for (std::size_t i = 0; i < eq.size(); ++i) detail += " " + fmt(qbars[i], 3) + ":" + fmt(eq[i]);
  detail += "; T";
  for (std::size_t i = 0; i < et.size(); ++i) detail += " " + fmt(times[i], 3) + ":" + fmt(et[i]);
  return {ok, detail};
}

Verdict slack_tightness() {
  if (slack_residuals.empty()) return {false, "no fly runs completed"};
  const double worst = *std::max_element(slack_residuals.begin(), slack_residuals.end());
  return {worst <= 1e-4, "max residual " + fmt(worst) + " over " + std::to_string(slack_residuals.size()) + " runs"};
}

Verdict speed_behaviour() {
  const Scenario s = cli::with_parameter(desk(1), "qbar", 0.0);
  const BcdResult r = run_bcd(s, BcdConfig{}, 1);
  const double vme = min_power_speed(s.params().uav);
  std::size_t near = 0;
  double mean = 0.0;
  for (std::size_t n = 0; n < s.num_slots(); ++n) {
    const double v = slot_speed(s, r.solution.trajectory, n);
    mean += v;
    if (std::abs(v - vme) <= 1.5) ++near;
  }
  mean /= static_cast<double>(s.num_slots());
  const double share = static_cast<double>(near) / static_cast<double>(s.num_slots());
  return {share >= 0.8, fmt(100.0 * share, 4) + "% of " + std::to_string(s.num_slots()) +
                            " slot speeds within 1.5 m/s of V_me=" + fmt(vme, 4) + ", mean speed " + fmt(mean, 4)};
}

Verdict tsp_quality() {
  double worst = 0.0;
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 56.0);
    const std::size_t k = 3 + seed % 6;
    std::vector<Point> pts;
    for (std::size_t i = 0; i < k; ++i) pts.emplace_back(u(rng), u(rng));
    const double ratio = tour_length(pts, tsp_order(pts)) / oracle::exact_tour_length(pts);
    worst = std::max(worst, ratio);
    if (ratio <= 1.05 + 1e-12) ++ok;
  }
  return {ok == 100, std::to_string(ok) + "/100 tours within 1.05x of optimal, worst ratio " + fmt(worst, 8)};
}

}  // namespace

int main() {
  criterion("hover power constants", hover_constants);
  criterion("minimum-power speed", min_speed);
  criterion("scheduler matches enumeration", scheduler_oracle);
  criterion("Dinkelbach matches grid search", dinkelbach_oracle);
  criterion("surrogate bounds valid and tight", sca_bounds);
  criterion("BCD monotone, converged and feasible", bcd_monotone);
  criterion("fly dominates hover", dominance);
  criterion("EE trends in qbar and T", trends);
  criterion("slack tightness", slack_tightness);
  criterion("speed near V_me without throughput demand", speed_behaviour);
  criterion("TSP tour quality", tsp_quality);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
