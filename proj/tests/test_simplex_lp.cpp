#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "olo/simplex_lp.hpp"

using olo::BoxedInequalityLp;
using olo::BoxedLpSolution;
using olo::LpStatus;
using olo::Matrix;
using olo::StandardFormLp;
using olo::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Oracle: enumerate candidate vertices of {G z <= h, l <= z <= u} as
// intersections of n active constraints; return the best feasible objective,
// or nullopt when no candidate is feasible (infeasible problem, since the box
// makes the feasible set bounded).
std::optional<double> brute_force_boxed(const Vector& c, const Vector& l,
                                        const Vector& u, const Matrix& G,
                                        const Vector& h) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(h.size());
  // Constraint list: rows of G, then z_i <= u_i, then -z_i <= -l_i.
  auto row = [&](int k) -> std::pair<Vector, double> {
    if (k < m) return {G.row(k).transpose(), h[k]};
    if (k < m + n) return {Vector::Unit(n, k - m), u[k - m]};
    return {-Vector::Unit(n, k - m - n), -l[k - m - n]};
  };
  const int total = m + 2 * n;
  std::optional<double> best;
  std::vector<int> idx(n);
  auto feasible = [&](const Vector& z) {
    for (int k = 0; k < total; ++k) {
      auto [a, b] = row(k);
      if (a.dot(z) > b + 1e-7) return false;
    }
    return true;
  };
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Matrix A(n, n);
      Vector b(n);
      for (int i = 0; i < n; ++i) {
        auto [a, bb] = row(idx[i]);
        A.row(i) = a.transpose();
        b[i] = bb;
      }
      Eigen::FullPivLU<Matrix> lu(A);
      if (lu.rank() < n) return;
      Vector z = lu.solve(b);
      if (feasible(z)) {
        double obj = c.dot(z);
        if (!best || obj < *best) best = obj;
      }
      return;
    }
    for (int k = start; k < total; ++k) {
      idx[depth] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("standard form: textbook optimum") {
  // min -3x - 5y s.t. x + s1 = 4, 2y + s2 = 12, 3x + 2y + s3 = 18.
  StandardFormLp lp(vec({4, 12, 18}));
  lp.add_column(vec({1, 0, 3}), -3);
  lp.add_column(vec({0, 2, 2}), -5);
  lp.add_column(vec({1, 0, 0}), 0);
  lp.add_column(vec({0, 1, 0}), 0);
  lp.add_column(vec({0, 0, 1}), 0);
  auto sol = lp.solve();
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-36.0));
  CHECK(sol.x[0] == doctest::Approx(2.0));
  CHECK(sol.x[1] == doctest::Approx(6.0));
  // Duals reproduce the objective: b.pi == c.x at optimality.
  CHECK(vec({4, 12, 18}).dot(sol.row_dual) == doctest::Approx(-36.0));
}

TEST_CASE("standard form: infeasible system detected") {
  // x1 + x2 = -1 with x >= 0.
  StandardFormLp lp(vec({-1}));
  lp.add_column(vec({1}), 0);
  lp.add_column(vec({1}), 0);
  auto sol = lp.solve();
  CHECK(sol.status == LpStatus::kInfeasible);
}

TEST_CASE("standard form: unbounded ray reported") {
  // x1 - x2 = 0, min -x1: ray (1,1).
  StandardFormLp lp(vec({0}));
  lp.add_column(vec({1}), -1);
  lp.add_column(vec({-1}), 0);
  auto sol = lp.solve();
  REQUIRE(sol.status == LpStatus::kUnbounded);
  REQUIRE(sol.ray.size() == 2);
  // Ray keeps A x = 0 and decreases the cost.
  CHECK(sol.ray[0] - sol.ray[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(-sol.ray[0] < 0.0);
}

TEST_CASE("standard form: negative rhs rows are normalized") {
  // -x1 = -3  <=>  x1 = 3.
  StandardFormLp lp(vec({-3}));
  lp.add_column(vec({-1}), 1);
  auto sol = lp.solve();
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(3.0));
}

TEST_CASE("boxed lp: simple diagonal optimum") {
  BoxedInequalityLp lp(vec({-1, -1}), vec({0, 0}), vec({1, 1}));
  lp.add_row(vec({1, 1}), 1.5);
  auto sol = lp.solve();
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-1.5));
  CHECK(sol.z.sum() == doctest::Approx(1.5));
  CHECK(sol.row_dual[0] >= -1e-9);
}

TEST_CASE("boxed lp: infeasible row yields Farkas weights") {
  BoxedInequalityLp lp(vec({1}), vec({0}), vec({1}));
  lp.add_row(vec({1}), -1.0);  // z <= -1 contradicts z >= 0
  auto sol = lp.solve();
  REQUIRE(sol.status == LpStatus::kInfeasible);
  REQUIRE(sol.farkas.size() == 1);
  CHECK(sol.farkas[0] > 0.0);
}

TEST_CASE("boxed lp: duals satisfy KKT stationarity") {
  BoxedInequalityLp lp(vec({1, 2, -1}), vec({-1, -1, -1}), vec({2, 2, 2}));
  lp.add_row(vec({1, 1, 1}), 1.0);
  lp.add_row(vec({-1, 2, 0}), 2.0);
  auto sol = lp.solve();
  REQUIRE(sol.status == LpStatus::kOptimal);
  Vector grad = vec({1, 2, -1});
  grad += sol.row_dual[0] * vec({1, 1, 1}) + sol.row_dual[1] * vec({-1, 2, 0});
  for (int i = 0; i < 3; ++i) {
    const double zi = sol.z[i];
    if (zi < -1 + 1e-7)
      CHECK(grad[i] >= -1e-7);  // at lower bound: gradient pushes up
    else if (zi > 2 - 1e-7)
      CHECK(grad[i] <= 1e-7);  // at upper bound: gradient pushes down
    else
      CHECK(std::abs(grad[i]) < 1e-7);
  }
  // Complementary slackness on rows.
  CHECK(sol.row_dual[0] * (sol.z.sum() - 1.0) == doctest::Approx(0.0));
}

TEST_CASE("boxed lp: random instances match vertex enumeration") {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(trial % 2);
    const int m = 4;
    Vector c(n), l(n), u(n), h(m);
    Matrix G(m, n);
    for (int i = 0; i < n; ++i) {
      c[i] = U(rng);
      l[i] = -1.0 - 0.5 * std::abs(U(rng));
      u[i] = 1.0 + 0.5 * std::abs(U(rng));
    }
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) G(j, i) = U(rng);
      h[j] = U(rng);  // negative rhs sometimes -> infeasible instances
    }
    auto expect = brute_force_boxed(c, l, u, G, h);
    BoxedInequalityLp lp(c, l, u);
    for (int j = 0; j < m; ++j) lp.add_row(G.row(j).transpose(), h[j]);
    auto sol = lp.solve();
    if (!expect) {
      ++infeasible_seen;
      CHECK(sol.status == LpStatus::kInfeasible);
    } else {
      REQUIRE(sol.status == LpStatus::kOptimal);
      CHECK(sol.objective == doctest::Approx(*expect).epsilon(1e-6));
    }
  }
  CHECK(infeasible_seen > 0);  // the sample hits both branches
}

TEST_CASE("boxed lp: warm re-solve after appending a violated cut") {
  BoxedInequalityLp lp(vec({-1, -1}), vec({0, 0}), vec({4, 4}));
  lp.add_row(vec({1, 0}), 3.0);
  auto first = lp.solve();
  REQUIRE(first.status == LpStatus::kOptimal);
  CHECK(first.objective == doctest::Approx(-7.0));  // z = (3, 4)
  const long pivots_before = lp.total_pivots();

  lp.add_row(vec({1, 1}), 2.0);  // cuts the old optimum off
  auto second = lp.solve();
  REQUIRE(second.status == LpStatus::kOptimal);
  CHECK(second.objective == doctest::Approx(-2.0));
  CHECK(second.z.sum() == doctest::Approx(2.0));
  // Warm continuation, not a from-scratch solve.
  CHECK(second.phase1_pivots == 0);
  CHECK(lp.total_pivots() - pivots_before <= 6);

  // Fresh solve agrees.
  BoxedInequalityLp fresh(vec({-1, -1}), vec({0, 0}), vec({4, 4}));
  fresh.add_row(vec({1, 0}), 3.0);
  fresh.add_row(vec({1, 1}), 2.0);
  auto ref = fresh.solve();
  REQUIRE(ref.status == LpStatus::kOptimal);
  CHECK(ref.objective == doctest::Approx(second.objective));
}

TEST_CASE("boxed lp: warm re-solve after rewriting a right-hand side") {
  // max z1 + z2 over z <= 4 boxes with z1 + z2 <= 5, then tighten to <= 3
  // and loosen back; each re-solve continues from the warm basis.
  BoxedInequalityLp lp(vec({-1, -1}), vec({0, 0}), vec({4, 4}));
  const int row = lp.add_row(vec({1, 1}), 5.0);
  auto first = lp.solve();
  REQUIRE(first.status == LpStatus::kOptimal);
  CHECK(first.objective == doctest::Approx(-5.0));

  lp.set_rhs(row, 3.0);
  auto tightened = lp.solve();
  REQUIRE(tightened.status == LpStatus::kOptimal);
  CHECK(tightened.objective == doctest::Approx(-3.0));
  CHECK(tightened.z.sum() == doctest::Approx(3.0));
  CHECK(tightened.phase1_pivots == 0);  // basis survived the rewrite

  lp.set_rhs(row, 5.0);
  auto loosened = lp.solve();
  REQUIRE(loosened.status == LpStatus::kOptimal);
  CHECK(loosened.objective == doctest::Approx(-5.0));
  CHECK(loosened.phase1_pivots == 0);

  // Out-of-range row and non-finite rhs are rejected.
  CHECK_THROWS_AS(lp.set_rhs(7, 1.0), olo::ValidationError);
  CHECK_THROWS_AS(lp.set_rhs(row, std::numeric_limits<double>::quiet_NaN()),
                  olo::ValidationError);
}
