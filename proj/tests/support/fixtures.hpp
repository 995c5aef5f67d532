#pragma once

// Small hand-built scenarios shared by the unit tests.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ubcn/metrics.hpp"
#include "ubcn/scenario.hpp"

namespace fixture {

using ubcn::Point;

inline ubcn::ScenarioParams params(std::vector<Point> ces, std::vector<Point> bds, std::size_t slots,
                                   double mission_time, double qbar = 0.0, double ebar = 0.0) {
  ubcn::ScenarioParams p = ubcn::default_params(ubcn::Profile::Desk);
  p.ce_positions = std::move(ces);
  p.bd_positions = std::move(bds);
  p.num_slots = slots;
  p.mission_time = mission_time;
  p.qbar = {qbar};
  p.ebar = {ebar};
  return p;
}

/// Closed circle of N slots around `centre` at constant speed.
inline ubcn::Trajectory circle(std::size_t slots, const Point& centre, double radius, double phase = 0.0) {
  ubcn::Trajectory q(2, static_cast<Eigen::Index>(slots + 1));
  for (std::size_t n = 0; n <= slots; ++n) {
    const double a = phase + 2.0 * std::numbers::pi * static_cast<double>(n % slots) / static_cast<double>(slots);
    q.col(static_cast<Eigen::Index>(n)) = centre + radius * Point(std::cos(a), std::sin(a));
  }
  return q;
}

/// Trajectory parked at one point.
inline ubcn::Trajectory parked(std::size_t slots, const Point& at) {
  ubcn::Trajectory q(2, static_cast<Eigen::Index>(slots + 1));
  for (Eigen::Index n = 0; n < q.cols(); ++n) q.col(n) = at;
  return q;
}

inline ubcn::PowerProfile constant_power(const ubcn::Scenario& s, double watts) {
  return ubcn::PowerProfile::Constant(static_cast<Eigen::Index>(s.num_ces()), static_cast<Eigen::Index>(s.num_slots()),
                                      watts);
}

/// Random TDMA-valid schedule.
inline ubcn::Schedule random_schedule(const ubcn::Scenario& s, std::mt19937_64& rng) {
  ubcn::Schedule b(s);
  std::uniform_int_distribution<std::size_t> pick(0, s.num_bds());
  for (std::size_t n = 0; n < s.num_slots(); ++n) {
    const std::size_t k = pick(rng);
    if (k < s.num_bds()) b.of(s, k, n) = 1;
  }
  return b;
}

inline const ubcn::ConstraintCheck* find(const std::vector<ubcn::ConstraintCheck>& checks, const std::string& id) {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

}  // namespace fixture
