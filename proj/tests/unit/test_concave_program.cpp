#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ubcn/errors.hpp"
#include "ubcn/solver/concave_program.hpp"

using namespace ubcn;
using namespace ubcn::solver;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

SmoothFunction quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c) {
  SmoothFunction f;
  f.value = [Q, c](const Eigen::VectorXd& x) { return c.dot(x) - 0.5 * x.dot(Q * x); };
  f.gradient = [Q, c](const Eigen::VectorXd& x, SparseVector& out) {
    const Eigen::VectorXd g = c - Q * x;
    out.clear();
    for (Eigen::Index j = 0; j < g.size(); ++j) out.emplace_back(j, g(j));
  };
  f.add_hessian = [Q](const Eigen::VectorXd&, double w, Eigen::MatrixXd& h) { h -= w * Q; };
  return f;
}

SparseVector dense(const Eigen::VectorXd& a) {
  SparseVector s;
  for (Eigen::Index j = 0; j < a.size(); ++j) s.emplace_back(j, a(j));
  return s;
}

}  // namespace

TEST_CASE("maximize -x^2 on [-1, 1]") {
  ConcaveProgram p;
  p.num_variables = 1;
  p.objective = quadratic(Eigen::MatrixXd::Constant(1, 1, 2.0), vec({0.0}));
  p.lower = vec({-1.0});
  p.upper = vec({1.0});
  p.start = vec({0.7});
  const ConcaveSolution s = solve_concave(p);
  CHECK(std::abs(s.x(0)) < 1e-6);
  CHECK(s.status == ConcaveStatus::Optimal);
  CHECK(s.gap <= 1e-7);
}

TEST_CASE("maximize log(1+x) - x/2 on [0, 10]") {
  ConcaveProgram p;
  p.num_variables = 1;
  p.objective.value = [](const Eigen::VectorXd& x) { return std::log1p(x(0)) - 0.5 * x(0); };
  p.objective.gradient = [](const Eigen::VectorXd& x, SparseVector& g) { g = {{0, 1.0 / (1.0 + x(0)) - 0.5}}; };
  p.objective.add_hessian = [](const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) {
    h(0, 0) -= w / ((1.0 + x(0)) * (1.0 + x(0)));
  };
  p.lower = vec({0.0});
  p.upper = vec({10.0});
  p.start = vec({5.0});
  CHECK(solve_concave(p).x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("nonlinear convex constraint") {
  // maximize x + y subject to x^2 + y^2 <= 2: optimum (1, 1).
  ConcaveProgram p;
  p.num_variables = 2;
  p.objective = affine_function({{0, 1.0}, {1, 1.0}}, 0.0);
  SmoothFunction disc;
  disc.value = [](const Eigen::VectorXd& x) { return x.squaredNorm() - 2.0; };
  disc.gradient = [](const Eigen::VectorXd& x, SparseVector& g) { g = {{0, 2.0 * x(0)}, {1, 2.0 * x(1)}}; };
  disc.add_hessian = [](const Eigen::VectorXd&, double w, Eigen::MatrixXd& h) {
    h(0, 0) += 2.0 * w;
    h(1, 1) += 2.0 * w;
  };
  p.constraints.push_back(disc);
  p.start = vec({0.0, 0.0});
  const ConcaveSolution s = solve_concave(p);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.x(1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(disc.value(s.x) <= 0.0);
}

TEST_CASE("random concave quadratics match projected gradient") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 4;
    Eigen::MatrixXd R(n, n);
    for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = g(rng);
    const Eigen::MatrixXd Q = R.transpose() * R + 0.3 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = 3.0 * g(rng);

    std::vector<Eigen::VectorXd> a;
    std::vector<double> b;
    ConcaveProgram p;
    p.num_variables = n;
    p.objective = quadratic(Q, c);
    for (int i = 0; i < n + 2; ++i) {
      Eigen::VectorXd row(n);
      for (int j = 0; j < n; ++j) row(j) = g(rng);
      a.push_back(row);
      b.push_back(u(rng));  // origin strictly inside
      p.constraints.push_back(affine_function(dense(row), -b.back()));
    }
    p.lower = Eigen::VectorXd::Constant(n, -3.0);
    p.upper = Eigen::VectorXd::Constant(n, 3.0);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = 1.0;
      a.push_back(e);
      b.push_back(3.0);
      a.push_back(-e);
      b.push_back(3.0);
    }
    p.start = Eigen::VectorXd::Zero(n);

    const ConcaveSolution s = solve_concave(p);
    const Eigen::VectorXd ref = oracle::projected_gradient_qp(Q, c, a, b, Eigen::VectorXd::Zero(n));
    CHECK((s.x - ref).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(p.objective.value(s.x) >= p.objective.value(ref) - s.gap - 1e-9);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].dot(s.x) <= b[i] + 1e-9);
  }
}

TEST_CASE("start point checks") {
  ConcaveProgram p;
  p.num_variables = 2;
  p.objective = affine_function({{0, 1.0}}, 0.0);
  p.constraints.push_back(affine_function({{0, 1.0}, {1, 1.0}}, -1.0));  // x + y <= 1
  p.lower = Eigen::VectorXd::Zero(2);
  p.upper = Eigen::VectorXd::Constant(2, kInfinity);

  p.start = vec({0.5, 0.5});  // on the boundary
  CHECK(!strictly_feasible(p, p.start));
  CHECK_THROWS_AS(solve_concave(p), StartInfeasible);

  const Eigen::VectorXd inside = find_strictly_feasible(p, vec({2.0, -1.0}));
  CHECK(strictly_feasible(p, inside));
  const Eigen::VectorXd same = vec({0.2, 0.3});
  CHECK(find_strictly_feasible(p, same) == same);

  p.start = inside;
  CHECK(solve_concave(p).x(0) == doctest::Approx(1.0).epsilon(1e-6));

  ConcaveProgram flat = p;
  flat.constraints.push_back(affine_function({{0, -1.0}, {1, -1.0}}, 1.0));  // x + y >= 1
  CHECK_THROWS_AS(find_strictly_feasible(flat, vec({0.2, 0.2})), StartInfeasible);
}

TEST_CASE("early stop callback") {
  ConcaveProgram p;
  p.num_variables = 1;
  p.objective = affine_function({{0, 1.0}}, 0.0);
  p.lower = vec({0.0});
  p.upper = vec({10.0});
  p.start = vec({1.0});
  BarrierOptions o;
  o.stop_when = [](const Eigen::VectorXd& x) { return x(0) > 5.0; };
  const ConcaveSolution s = solve_concave(p, o);
  CHECK(s.status == ConcaveStatus::Stopped);
  CHECK(s.x(0) > 5.0);
  CHECK(s.x(0) < 10.0);
}
