#include "doctest.h"
#include "oracles.hpp"

#include "copier/lp.hpp"
#include "copier/mvc.hpp"
#include "copier/rng.hpp"

#include <sstream>

using namespace copier;
using lp::Sense;
using lp::Status;

namespace {

lp::ProblemD relaxation(int n, const oracle::Edges& edges) {
  auto p = lp::ProblemD::with_variables(n);
  p.objective.setConstant(-1);
  p.upper.setOnes();
  for (auto [u, v] : edges) {
    Vector row = Vector::Zero(n);
    row[u] = row[v] = 1;
    p.add_constraint(row, Sense::greater_equal, 1);
  }
  return p;
}

oracle::Edges random_edges(int n, double density, Rng& rng) {
  oracle::Edges e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (uniform01(rng) < density) e.emplace_back(u, v);
  return e;
}

}  // namespace

TEST_CASE("single bounded variable") {
  auto p = lp::ProblemD::with_variables(1);
  p.objective << 1;
  p.add_constraint(Vector::Ones(1), Sense::less_equal, 1);
  const auto s = lp::solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[0] == doctest::Approx(1));
  CHECK(s.objective == doctest::Approx(1));
}

TEST_CASE("contradictory rows are infeasible") {
  auto p = lp::ProblemD::with_variables(1);
  p.objective << 1;
  p.add_constraint(Vector::Ones(1), Sense::greater_equal, 1);
  p.add_constraint(Vector::Ones(1), Sense::less_equal, 0);
  CHECK(lp::solve_lp(p).status == Status::infeasible);
}

TEST_CASE("unbounded direction is reported") {
  auto p = lp::ProblemD::with_variables(2);
  p.objective << 1, 1;
  Vector row(2);
  row << 1, -1;
  p.add_constraint(row, Sense::less_equal, 3);
  CHECK(lp::solve_lp(p).status == Status::unbounded);
}

TEST_CASE("two-variable vertex") {
  // max x + y, x + 2y <= 4, 3x + y <= 6: optimum at (1.6, 1.2).
  auto p = lp::ProblemD::with_variables(2);
  p.objective << 1, 1;
  Vector r1(2), r2(2);
  r1 << 1, 2;
  r2 << 3, 1;
  p.add_constraint(r1, Sense::less_equal, 4);
  p.add_constraint(r2, Sense::less_equal, 6);
  const auto s = lp::solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[0] == doctest::Approx(1.6));
  CHECK(s.x[1] == doctest::Approx(1.2));
  CHECK(s.objective == doctest::Approx(2.8));
}

TEST_CASE("free, shifted, reflected and fixed variables") {
  // max x0 - x2 s.t. x0 + x1 = 3, x1 in [-2, inf), x0 free, x2 in (-inf, 4] with x2 >= 1 row,
  // x3 fixed at 2 and x0 + x3 <= 10.
  const double inf = std::numeric_limits<double>::infinity();
  auto p = lp::ProblemD::with_variables(4);
  p.objective << 1, 0, -1, 0;
  p.lower << -inf, -2, -inf, 2;
  p.upper << inf, inf, 4, 2;
  Vector a(4), b(4), c(4);
  a << 1, 1, 0, 0;
  b << 0, 0, 1, 0;
  c << 1, 0, 0, 1;
  p.add_constraint(a, Sense::equal, 3);
  p.add_constraint(b, Sense::greater_equal, 1);
  p.add_constraint(c, Sense::less_equal, 10);
  const auto s = lp::solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[0] == doctest::Approx(5));
  CHECK(s.x[1] == doctest::Approx(-2));
  CHECK(s.x[2] == doctest::Approx(1));
  CHECK(s.x[3] == 2);
  CHECK(s.objective == doctest::Approx(4));
  CHECK(lp::max_violation(p, s.x) <= 1e-7);
}

TEST_CASE("Beale's cycling example terminates under Bland's rule") {
  auto p = lp::ProblemD::with_variables(4);
  p.objective << 0.75, -150, 0.02, -6;
  Vector r1(4), r2(4), r3(4);
  r1 << 0.25, -60, -0.04, 9;
  r2 << 0.5, -90, -0.02, 3;
  r3 << 0, 0, 1, 0;
  p.add_constraint(r1, Sense::less_equal, 0);
  p.add_constraint(r2, Sense::less_equal, 0);
  p.add_constraint(r3, Sense::less_equal, 1);
  const auto s = lp::solve_lp(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective == doctest::Approx(0.05));
}

TEST_CASE("example-graph relaxation matches the half-integral oracle") {
  const auto g = mvc::example_graph();
  const auto s = lp::solve_lp(relaxation(g.n, g.edges));
  REQUIRE(s.status == Status::optimal);
  const double expected = -oracle::half_integral_lp_min(g.n, g.edges);
  CHECK(expected == -2.5);
  CHECK(std::abs(s.objective - expected) <= 1e-7);
}

TEST_CASE("random MVC relaxations match the half-integral oracle") {
  Rng rng(20240611);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 9));
    const auto edges = random_edges(n, uniform(rng, 0.2, 0.8), rng);
    const auto p = relaxation(n, edges);
    const auto s = lp::solve_lp(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(std::abs(s.objective + oracle::half_integral_lp_min(n, edges)) <= 1e-7);
    CHECK(lp::max_violation(p, s.x) <= 1e-7);
  }
}

TEST_CASE("solve is deterministic") {
  Rng rng(5);
  const auto p = relaxation(9, random_edges(9, 0.5, rng));
  const auto s1 = lp::solve_lp(p), s2 = lp::solve_lp(p);
  CHECK(s1.pivots == s2.pivots);
  CHECK(s1.x == s2.x);
  CHECK(s1.objective == s2.objective);
}

TEST_CASE("malformed problems are rejected") {
  auto p = lp::ProblemD::with_variables(2);
  p.lower[0] = 1;
  p.upper[0] = 0;
  CHECK_THROWS_AS(lp::solve_lp(p), std::invalid_argument);
  auto q = lp::ProblemD::with_variables(2);
  CHECK_THROWS_AS(q.add_constraint(Vector::Ones(3), Sense::less_equal, 1), std::invalid_argument);
}

TEST_CASE("debug dump lists objective, rows and bounds") {
  const auto g = mvc::example_graph();
  std::ostringstream os;
  lp::write_lp(os, relaxation(g.n, g.edges));
  const std::string s = os.str();
  CHECK(s.rfind("maximize -1 -1 -1 -1 -1\n", 0) == 0);
  CHECK(s.find("c0: 1 1 0 0 0 >= 1\n") != std::string::npos);
  CHECK(s.find("bounds\nx0 0 1\n") != std::string::npos);
}
