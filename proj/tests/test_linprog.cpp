#include <catch2/catch_amalgamated.hpp>

#include "lpopt/linprog.hpp"

using namespace lpopt;

TEST_CASE("linprog solves a basic standard-form LP") {
  // min -x1 - 2 x2  s.t. x1 + x2 + s = 4, x >= 0
  Matrix A(1, 3);
  A << 1, 1, 1;
  Vector b(1);
  b << 4;
  Vector c(3);
  c << -1, -2, 0;
  auto res = linprog(c, A, b);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.objective == Catch::Approx(-8.0));
  CHECK(res.x[1] == Catch::Approx(4.0));
}

TEST_CASE("linprog detects infeasibility") {
  // x1 = -1, x1 >= 0
  Matrix A(1, 1);
  A << 1;
  Vector b(1);
  b << -1;
  Vector c(1);
  c << 0;
  auto res = linprog(c, A, b);
  CHECK(res.status == LpStatus::Infeasible);
}

TEST_CASE("linprog detects unboundedness") {
  // min -x1 s.t. x1 - x2 = 0
  Matrix A(1, 2);
  A << 1, -1;
  Vector b(1);
  b << 0;
  Vector c(2);
  c << -1, 0;
  auto res = linprog(c, A, b);
  CHECK(res.status == LpStatus::Unbounded);
}

TEST_CASE("linprog handles degenerate and redundant rows") {
  // duplicated constraint rows
  Matrix A(3, 4);
  A << 1, 1, 1, 0,  //
      1, 1, 1, 0,   //
      1, 2, 0, 1;
  Vector b(3);
  b << 2, 2, 3;
  Vector c(4);
  c << 1, -1, 0, 0;
  auto res = linprog(c, A, b);
  REQUIRE(res.status == LpStatus::Optimal);
  // optimum: push x2 as high as possible: x2 <= min(2, 1.5) from the rows
  CHECK(res.objective == Catch::Approx(-1.5));
  CHECK(((A * res.x) - b).lpNorm<Eigen::Infinity>() < 1e-9);
}
