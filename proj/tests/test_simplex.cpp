#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "mechlab/rng.hpp"
#include "mechlab/simplex.hpp"
#include "mechlab/vertexenum.hpp"

using namespace mechlab;

namespace {

double vertex_minimum(int dim, const std::vector<double>& c, const std::vector<LpConstraint>& rows) {
  double best = std::numeric_limits<double>::infinity();
  for_each_vertex(dim, rows, [&](const std::vector<double>& x) {
    double val = 0.0;
    for (int j = 0; j < dim; ++j) val += c[j] * x[j];
    best = std::min(best, val);
  });
  return best;
}

}  // namespace

TEST_CASE("simplex solves textbook problems") {
  // max x + y over x + 2y <= 4, 3x + y <= 6  ==  min -(x + y)
  LpResult r = solve_lp_min({-1.0, -1.0}, {{{1.0, 2.0}, Relation::LessEq, 4.0},
                                           {{3.0, 1.0}, Relation::LessEq, 6.0}});
  REQUIRE(r.status == LpResult::Status::Optimal);
  CHECK(r.objective == Catch::Approx(-2.8).margin(1e-9));
  CHECK(r.x[0] == Catch::Approx(1.6).margin(1e-9));
  CHECK(r.x[1] == Catch::Approx(1.2).margin(1e-9));

  // Equality and >= rows force phase 1.
  r = solve_lp_min({1.0, 1.0}, {{{1.0, 1.0}, Relation::Equal, 2.0},
                                {{1.0, 0.0}, Relation::GreaterEq, 0.5}});
  REQUIRE(r.status == LpResult::Status::Optimal);
  CHECK(r.objective == Catch::Approx(2.0).margin(1e-9));

  // Negative right-hand side is normalized internally: -x <= -3  <=>  x >= 3.
  r = solve_lp_min({1.0}, {{{-1.0}, Relation::LessEq, -3.0}});
  REQUIRE(r.status == LpResult::Status::Optimal);
  CHECK(r.objective == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
  LpResult r = solve_lp_min({0.0}, {{{1.0}, Relation::LessEq, 1.0},
                                    {{1.0}, Relation::GreaterEq, 2.0}});
  CHECK(r.status == LpResult::Status::Infeasible);

  r = solve_lp_min({-1.0, 0.0}, {{{0.0, 1.0}, Relation::LessEq, 1.0}});
  CHECK(r.status == LpResult::Status::Unbounded);

  // Bounded objective over an unbounded region is still optimal.
  r = solve_lp_min({1.0, 0.0}, {{{1.0, 1.0}, Relation::GreaterEq, 1.0}});
  REQUIRE(r.status == LpResult::Status::Optimal);
  CHECK(r.objective == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("Bland's rule survives the classic cycling tableau") {
  // Beale's example, notorious for cycling under the largest-coefficient rule.
  std::vector<double> c = {-0.75, 150.0, -0.02, 6.0};
  std::vector<LpConstraint> rows = {
      {{0.25, -60.0, -0.04, 9.0}, Relation::LessEq, 0.0},
      {{0.5, -90.0, -0.02, 3.0}, Relation::LessEq, 0.0},
      {{0.0, 0.0, 1.0, 0.0}, Relation::LessEq, 1.0},
  };
  LpResult r = solve_lp_min(c, rows);
  REQUIRE(r.status == LpResult::Status::Optimal);
  CHECK(r.objective == Catch::Approx(-0.05).margin(1e-9));
  CHECK(r.objective == Catch::Approx(vertex_minimum(4, c, rows)).margin(1e-8));
}

TEST_CASE("simplex agrees with vertex enumeration on random bounded programs") {
  RngStream rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    RngStream t = rng.substream(trial);
    const int dim = static_cast<int>(t.uniform_int(2, 4));
    // Anchor point keeps the program feasible by construction.
    std::vector<double> anchor(dim);
    for (double& v : anchor) v = t.uniform(0.0, 5.0);

    std::vector<LpConstraint> rows;
    const int extra = static_cast<int>(t.uniform_int(1, 4));
    for (int kk = 0; kk < extra; ++kk) {
      LpConstraint row;
      row.a.resize(dim);
      double at_anchor = 0.0;
      for (int j = 0; j < dim; ++j) {
        row.a[j] = t.uniform(-3.0, 3.0);
        at_anchor += row.a[j] * anchor[j];
      }
      const double which = t.uniform();
      if (which < 0.4) {
        row.rel = Relation::LessEq;
        row.b = at_anchor + t.uniform(0.0, 4.0);
      } else if (which < 0.8) {
        row.rel = Relation::GreaterEq;
        row.b = at_anchor - t.uniform(0.0, 4.0);
      } else {
        row.rel = Relation::Equal;
        row.b = at_anchor;
      }
      rows.push_back(row);
    }
    for (int j = 0; j < dim; ++j) {  // box keeps it bounded
      LpConstraint box;
      box.a.assign(dim, 0.0);
      box.a[j] = 1.0;
      box.rel = Relation::LessEq;
      box.b = 10.0;
      rows.push_back(box);
    }
    std::vector<double> c(dim);
    for (double& v : c) v = t.uniform(-2.0, 2.0);

    LpResult r = solve_lp_min(c, rows);
    REQUIRE(r.status == LpResult::Status::Optimal);
    const double oracle = vertex_minimum(dim, c, rows);
    CHECK(r.objective == Catch::Approx(oracle).margin(1e-6));
    // Returned point must actually be feasible.
    for (double v : r.x) CHECK(v >= -1e-9);
    for (const LpConstraint& row : rows) {
      double lhs = 0.0;
      for (int j = 0; j < dim; ++j) lhs += row.a[j] * r.x[j];
      if (row.rel == Relation::LessEq) CHECK(lhs <= row.b + 1e-7);
      if (row.rel == Relation::GreaterEq) CHECK(lhs >= row.b - 1e-7);
      if (row.rel == Relation::Equal) CHECK(lhs == Catch::Approx(row.b).margin(1e-7));
    }
  }
}
