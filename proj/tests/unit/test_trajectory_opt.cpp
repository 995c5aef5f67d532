#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "ubcn/trajectory_opt.hpp"
#include "ubcn/uav_power.hpp"

using namespace ubcn;

namespace {

double mean_distance(const Trajectory& q, const Point& w) {
  double sum = 0.0;
  for (Eigen::Index n = 1; n < q.cols(); ++n) sum += (Point(q.col(n)) - w).norm();
  return sum / static_cast<double>(q.cols() - 1);
}

void check_trajectory_invariants(const Scenario& s, const TrajectoryResult& r) {
  const Trajectory& q = r.trajectory;
  CHECK(q.col(0) == q.col(q.cols() - 1));
  for (std::size_t n = 0; n < s.num_slots(); ++n)
    CHECK(slot_speed(s, q, n) * s.slot_length() <= s.params().v_max * s.slot_length() + 1e-9);
  CHECK(r.max_slack_residual <= 1e-4);
  for (Eigen::Index n = 0; n < r.slack.size(); ++n) {
    CHECK(r.slack(n) > 0.0);
    CHECK(slack_residual(s.params().uav, slot_speed(s, q, static_cast<std::size_t>(n)), r.slack(n)) <= 1e-4);
  }
  double prev = -1.0;
  for (const ScaRound& round : r.rounds) {
    if (!round.accepted) continue;
    CHECK(round.ee >= prev - 1e-6);
    prev = round.ee;
  }
}

}  // namespace

TEST_CASE("rate lower bound is global and tight") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-60.0, 60.0), lc(2.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double c3 = std::pow(10.0, lc(rng));
    const Point w(u(rng), u(rng)), q(u(rng), u(rng)), qe(u(rng), u(rng));
    const double exact = exact_rate(c3, 20.0, w, q);
    CHECK(rate_lower_bound(c3, 20.0, w, q, qe) <= exact + 1e-12 * std::max(1.0, exact));
    CHECK(std::abs(rate_lower_bound(c3, 20.0, w, qe, qe) - exact_rate(c3, 20.0, w, qe)) <= 1e-9);
    CHECK(rate_bound_slope(c3, 20.0, w, qe) > 0.0);
  }
  const Point w(1, 2), q(4, 6);
  const double d2 = 400.0 + 25.0;
  CHECK(exact_rate(1e5, 20.0, w, q) == doctest::Approx(std::log2(1.0 + 1e5 / d2)).epsilon(1e-14));
}

TEST_CASE("slack right-hand side bound is global and tight") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0), uy(0.05, 1.5);
  const double v0 = 2.4868, ts = 0.6;
  for (int i = 0; i < 1000; ++i) {
    const Point qp(u(rng), u(rng)), q(u(rng), u(rng)), ep(u(rng), u(rng)), e(u(rng), u(rng));
    const double y = uy(rng), ye = uy(rng);
    CHECK(slack_rhs_lower_bound(v0, ts, qp, q, ep, e, y, ye) <= slack_rhs(v0, ts, qp, q, y) + 1e-12);
    CHECK(std::abs(slack_rhs_lower_bound(v0, ts, ep, e, ep, e, ye, ye) - slack_rhs(v0, ts, ep, e, ye)) <= 1e-9);
    // The y part alone: 2 y0 y - y0^2 underestimates y^2.
    CHECK(2.0 * ye * y - ye * ye <= y * y + 1e-15);
  }
  const Point a(0, 0), b(3, 4);
  CHECK(slack_rhs(v0, ts, a, b, 0.5) == doctest::Approx(0.25 + 25.0 / (v0 * v0 * ts * ts)));
}

TEST_CASE("exact slack closes the slack equation") {
  const Scenario s(fixture::params({{0, 0}}, {{5, 0}}, 16, 9.6));
  const Trajectory q = fixture::circle(16, {0, 0}, 7.0);
  const Eigen::VectorXd y = exact_slack(s, q);
  for (std::size_t n = 0; n < 16; ++n) {
    const double v = slot_speed(s, q, n);
    CHECK(y(static_cast<Eigen::Index>(n)) == doctest::Approx(induced_factor(s.params().uav, v)).epsilon(1e-12));
    CHECK(slack_residual(s.params().uav, v, y(static_cast<Eigen::Index>(n))) < 1e-12);
  }
  CHECK(slack_residual(s.params().uav, 0.0, 0.5) == doctest::Approx(0.75));
}

TEST_CASE("trajectory moves toward a scheduled BD") {
  const std::size_t N = 20;
  const Scenario s(fixture::params({{0, -6}}, {{0, 0}}, N, 12.0));
  Schedule b(s);
  for (std::size_t n = 0; n < N; ++n) b.of(s, 0, n) = 1;
  const PowerProfile p = fixture::constant_power(s, 3.0);
  const Trajectory start = fixture::circle(N, {25, 25}, 6.0);
  const TrajectoryResult r = optimize_trajectory(s, b, p, start);
  CHECK(mean_distance(r.trajectory, {0, 0}) < mean_distance(start, {0, 0}));
  CHECK(r.ee >= energy_efficiency(s, b, p, start) - 1e-9);
  CHECK(r.ee == doctest::Approx(energy_efficiency(s, b, p, r.trajectory)).epsilon(1e-12));
  check_trajectory_invariants(s, r);
}

TEST_CASE("with nothing scheduled the UAV saves energy around V_me") {
  const std::size_t N = 20;
  const Scenario s(fixture::params({{0, -6}}, {{0, 0}, {8, 0}}, N, 12.0));
  Schedule b(s);
  b.of(s, 1, 0) = 1;  // one slot keeps the numerator positive
  const PowerProfile p = fixture::constant_power(s, 1.0);
  const UavPhysics& u = s.params().uav;
  const double vme = min_power_speed(u);
  const Trajectory start = fixture::circle(N, {4, 0}, 1.0);
  const TrajectoryResult r = optimize_trajectory(s, b, p, start);
  check_trajectory_invariants(s, r);

  const EnergyBreakdown e = total_energy(s, p, r.trajectory);
  CHECK(e.uav < s.params().mission_time * propulsion_power(u, 0.0));
  CHECK(e.uav < s.params().mission_time * propulsion_power(u, s.params().v_max));
  std::size_t near = 0;
  for (std::size_t n = 0; n < N; ++n) near += std::abs(slot_speed(s, r.trajectory, n) - vme) <= 1.5 ? 1 : 0;
  CHECK(near >= N * 8 / 10);
}

TEST_CASE("throughput requirement is kept") {
  const std::size_t N = 16;
  const Scenario s(fixture::params({{0, -6}, {30, 0}}, {{0, 0}, {33, 3}}, N, 9.6, 2.0));
  Schedule b(s);
  for (std::size_t n = 0; n < N; ++n) b.of(s, n % 2, n) = 1;
  const PowerProfile p = fixture::constant_power(s, 4.0);
  const Trajectory start = fixture::circle(N, {15, 0}, 9.0);
  REQUIRE(all_satisfied(audit(s, b, p, start)));
  const TrajectoryResult r = optimize_trajectory(s, b, p, start);
  check_trajectory_invariants(s, r);
  CHECK(all_satisfied(audit(s, b, p, r.trajectory)));
  CHECK(r.ee >= energy_efficiency(s, b, p, start) - 1e-9);
}
