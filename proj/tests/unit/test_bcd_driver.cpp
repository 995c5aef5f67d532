#include "doctest.h"
#include "fixtures.hpp"
#include "ubcn/bcd_driver.hpp"
#include "ubcn/errors.hpp"
#include "ubcn/io/scenario_io.hpp"

using namespace ubcn;

namespace {

Scenario small_scenario(std::uint64_t seed, double qbar = 10.0) {
  io::GenerationSpec g;
  g.seed = seed;
  return io::generate_from_spec(g, {"M=1", "K=2", "N=20", "T=12", "qbar=" + std::to_string(qbar)});
}

void check_trace(const BcdResult& r, const BcdConfig& cfg) {
  double prev = r.trace.initial_ee;
  for (const IterationRecord& it : r.trace.iterations) {
    CHECK(it.ee_schedule >= prev - cfg.monotone_slack);
    CHECK(it.ee_power >= it.ee_schedule - cfg.monotone_slack);
    CHECK(it.ee_trajectory >= it.ee_power - cfg.monotone_slack);
    CHECK(it.max_slack_residual <= 1e-4);
    prev = it.ee_trajectory;
  }
  CHECK(r.trace.status == BcdStatus::Converged);
  CHECK(r.trace.iterations.size() <= cfg.max_iters);
  const auto& its = r.trace.iterations;
  REQUIRE(!its.empty());
  const double before = its.size() > 1 ? its[its.size() - 2].ee_trajectory : r.trace.initial_ee;
  CHECK(its.back().ee_trajectory - before < cfg.epsilon);
  CHECK(r.solution.report.feasible());
  CHECK(r.solution.report.ee == doctest::Approx(its.back().ee_trajectory).epsilon(1e-12));
}

}  // namespace

TEST_CASE("initialization") {
  SUBCASE("no requirements: trivially feasible") {
    const Scenario s(fixture::params({{0, 0}, {30, 0}}, {{4, 3}, {33, 2}}, 20, 12.0));
    const InitialPoint init = initialize(s, 1);
    CHECK(all_satisfied(audit(s, init.schedule, init.power, init.trajectory)));
  }
  SUBCASE("desk scenarios pass the audit and are deterministic") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      io::GenerationSpec g;
      g.seed = seed;
      const Scenario s = io::generate_from_spec(g, {});
      const InitialPoint a = initialize(s, seed);
      CHECK(all_satisfied(audit(s, a.schedule, a.power, a.trajectory)));
      const InitialPoint b = initialize(s, seed);
      CHECK(a.schedule == b.schedule);
      CHECK(a.power == b.power);
      CHECK(a.trajectory == b.trajectory);
      // Uniform speed: every slot flies the same distance.
      const double v0 = slot_speed(s, a.trajectory, 0);
      for (std::size_t n = 0; n < s.num_slots(); ++n) CHECK(slot_speed(s, a.trajectory, n) == doctest::Approx(v0));
      CHECK(v0 <= s.params().v_max + 1e-12);
    }
  }
  SUBCASE("unreachable requirements throw") {
    const Scenario s(fixture::params({{0, 0}}, {{4, 3}, {-3, 4}}, 4, 2.4, 500.0));
    CHECK_THROWS_AS(initialize(s, 1), Infeasible);
  }
}

TEST_CASE("BCD on a small scenario") {
  const Scenario s = small_scenario(3);
  const BcdConfig cfg;
  const BcdResult r = run_bcd(s, cfg, 5);
  check_trace(r, cfg);
  CHECK(r.solution.report.ee > r.trace.initial_ee);

  SUBCASE("same seed, same result") {
    const BcdResult again = run_bcd(s, cfg, 5);
    CHECK(again.solution.schedule == r.solution.schedule);
    CHECK(again.solution.power == r.solution.power);
    CHECK(again.solution.trajectory == r.solution.trajectory);
    CHECK(again.solution.report.ee == r.solution.report.ee);
  }
  SUBCASE("doubling epsilon never raises the final EE") {
    BcdConfig loose = cfg;
    loose.epsilon = 2.0 * cfg.epsilon;
    const BcdResult l = run_bcd(s, loose, 5);
    check_trace(l, loose);
    CHECK(l.solution.report.ee <= r.solution.report.ee + 1e-12);
    CHECK(l.trace.iterations.size() <= r.trace.iterations.size());
  }
  SUBCASE("a huge epsilon stops after one iteration") {
    BcdConfig once = cfg;
    once.epsilon = 1e6;
    const BcdResult o = run_bcd(s, once, 5);
    CHECK(o.trace.iterations.size() == 1);
    CHECK(o.solution.report.feasible());
  }
}

TEST_CASE("BCD configuration and infeasibility") {
  const Scenario s = small_scenario(3);
  BcdConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(run_bcd(s, bad, 1), ConfigError);
  CHECK_THROWS_AS(run_bcd(small_scenario(3, 1e4), BcdConfig{}, 1), Infeasible);
}

TEST_CASE("desk scenario with T = 50 s converges well within 50 iterations") {
  io::GenerationSpec g;
  g.seed = 1;
  const Scenario s = io::generate_from_spec(g, {"T=50"});
  const BcdConfig cfg;
  const BcdResult r = run_bcd(s, cfg, 1);
  check_trace(r, cfg);
  CHECK(r.trace.iterations.size() < 50);
}
