#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "olo/serialization.hpp"
#include "olo/synthesis.hpp"

using namespace olo;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ConvexBody ball(int d) { return ConvexBody::euclidean_ball(d, 1.0); }

// Instance carrying exact second-order data of f at the grid centers.
ProgramInstance exact_instance(const DiscretizationGrid& grid,
                               const std::function<double(const Vector&)>& f,
                               const std::function<Vector(const Vector&)>& df,
                               const std::function<Matrix(const Vector&)>& d2f) {
  ProgramInstance inst;
  double top = 0;
  for (const Vector& c : grid.centers) {
    inst.r_i.push_back(f(c));
    inst.v_i.push_back(df(c));
    inst.sigma_i.push_back(d2f(c));
    top = std::max(top, f(c));
  }
  inst.r = top;
  return inst;
}

}  // namespace

TEST_CASE("lattice discretization of action sets") {
  DiscretizationGrid g1 = discretize_action_set(ball(1), 0.5);
  REQUIRE(g1.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(g1.centers[i][0] == doctest::Approx(-1.0 + 0.5 * i));

  DiscretizationGrid g2 = discretize_action_set(ball(2), 0.5);
  CHECK(g2.size() == 13);  // integer pairs with i^2 + j^2 <= 4
  bool has_origin = false;
  for (int i = 0; i < g2.size(); ++i) {
    CHECK(ball(2).contains(g2.centers[i]));
    if (g2.centers[i].norm() == 0) has_origin = true;
    for (int j = i + 1; j < g2.size(); ++j)
      CHECK((g2.centers[i] - g2.centers[j]).norm() > 0.4);
  }
  CHECK(has_origin);

  DiscretizationGrid g3 = discretize_action_set(ConvexBody::box(vec({1, 1})),
                                                1.0);
  CHECK(g3.size() == 9);

  Rng rng(83);
  CHECK(g2.audit_cover_radius(ball(2), 2000, rng) <= std::sqrt(2.0) * 0.5);

  CHECK_THROWS_AS(discretize_action_set(ball(6), 0.01), ResourceError);
  try {
    discretize_action_set(ball(6), 0.01);
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
}

TEST_CASE("constant calibration") {
  SynthesisConfig cfg = calibrate_constants(ball(2), ball(2), 1.0);
  CHECK(cfg.c1_tilde == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-12));
  CHECK(cfg.c2_tilde == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(cfg.L == doctest::Approx(std::pow(2.0, 0.75)).epsilon(1e-12));
  CHECK(cfg.delta_m == doctest::Approx(0.1 / 2.0));  // delta/(2 alpha R^2)
  CHECK(cfg.eps == doctest::Approx(std::sqrt(2.0) * cfg.eps_bar));

  CalibrationOverrides o;
  o.eps_bar = 0.25;
  SynthesisConfig c2 = calibrate_constants(ball(2), ball(2), 1.0, o);
  CHECK(c2.C0 == doctest::Approx(1.0 + c2.L * 0.015625).epsilon(1e-12));

  CalibrationOverrides bad;
  bad.delta_lin = 1.0;  // above min(delta_m/4, r delta_m/2)
  CHECK_THROWS_AS(calibrate_constants(ball(2), ball(2), 1.0, bad),
                  ValidationError);
  CalibrationOverrides bad2;
  bad2.eps_tilde = 10.0;
  CHECK_THROWS_AS(calibrate_constants(ball(2), ball(2), 1.0, bad2),
                  ValidationError);
  CalibrationOverrides bad3;
  bad3.alpha = 100.0;  // exceeds c2 / r^2
  try {
    calibrate_constants(ball(2), ball(2), 1.0, bad3);
    CHECK(false);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("infeasible") != std::string::npos);
  }
}

TEST_CASE("static constraint families") {
  SynthesisConfig cfg = calibrate_constants(ball(1), ball(1), 1.0);
  DiscretizationGrid single = discretize_action_set(ball(1), 2.0);
  REQUIRE(single.size() == 1);
  InstanceLayout lay1{1, 1};
  auto cuts1 = locality_constraints(single, cfg, lay1);
  int pair_count = 0;
  for (const auto& c : cuts1)
    if (c.tag.rfind("locality", 0) == 0) ++pair_count;
  CHECK(pair_count == 0);
  CHECK(cuts1.size() == 2 + 1 + 1 + 1);  // grad pair, value, global, link

  // Hand-checked pair cut: centers {0, 0.5}, L = 96, coefficient 17/96.
  DiscretizationGrid two;
  two.eps_bar = 0.5;
  two.centers = {vec({0.0}), vec({0.5})};
  SynthesisConfig c96 = cfg;
  c96.L = 96.0;
  InstanceLayout lay2{2, 1};
  auto cuts2 = locality_constraints(two, c96, lay2);
  const ConstraintCut& pc = cuts2.front();
  REQUIRE(pc.tag == "locality(0,1)");
  CHECK(pc.rhs == doctest::Approx(2.125));  // 17 * 0.125
  Vector z = Vector::Zero(lay2.num_vars());
  z[lay2.r(0)] = 1.0;
  z[lay2.v(0, 0)] = 1.0;
  z[lay2.sigma(0, 0, 0)] = 1.0;
  // r0 + 0.5 v0 + 0.125 sigma0 - r1
  CHECK(pc.lhs(z) == doctest::Approx(1.0 + 0.5 + 0.125));

  // A quartic with a valid Hessian-Lipschitz budget satisfies every pair cut
  // with at least the L/96 cubic slack.
  DiscretizationGrid gq =
      discretize_action_set(ConvexBody::box(vec({1, 1})), 0.5);
  SynthesisConfig cq = calibrate_constants(ConvexBody::box(vec({1, 1})),
                                           ball(2), 1.0);
  cq.L = 24.0;
  InstanceLayout layq{gq.size(), 2};
  ProgramInstance inst = exact_instance(
      gq,
      [](const Vector& x) {
        return std::pow(x[0], 4) + std::pow(x[1], 4);
      },
      [](const Vector& x) {
        return vec({4 * std::pow(x[0], 3), 4 * std::pow(x[1], 3)});
      },
      [](const Vector& x) {
        Matrix h = Matrix::Zero(2, 2);
        h(0, 0) = 12 * x[0] * x[0];
        h(1, 1) = 12 * x[1] * x[1];
        return h;
      });
  const Vector zq = inst.pack(layq);
  int checked = 0;
  auto cutsq = locality_constraints(gq, cq, layq);
  for (int i = 0; i < gq.size(); ++i)
    for (int j = 0; j < gq.size(); ++j) {
      if (i == j) continue;
      const double nd = (gq.centers[j] - gq.centers[i]).norm();
      CHECK(cutsq[checked].violation(zq) <=
            -(cq.L / 96.0) * nd * nd * nd + 1e-9);
      ++checked;
    }
}

TEST_CASE("strong-convexity separation oracle") {
  InstanceLayout lay{1, 2};
  SphereCover cover = SphereCover::build(2, 0.01);

  auto certified = strong_convexity_cut(Matrix::Identity(2, 2), ball(2), 0.5,
                                        0.05, 1e-6, cover, lay, 0, 1e-7);
  CHECK(certified.certified);

  // Identity curvature cannot match an ellipse with semi-axes (1, 10).
  ConvexBody ell =
      ConvexBody::ellipsoid((Matrix(2, 2) << 1, 0, 0, 100).finished());
  auto viol = strong_convexity_cut(Matrix::Identity(2, 2), ell, 1.0, 0.05,
                                   1e-6, cover, lay, 0, 1e-7);
  CHECK_FALSE(viol.certified);
  const double angle =
      std::acos(std::min(1.0, std::abs(viol.worst_dir[1])));
  CHECK(angle <= 0.2);
  REQUIRE(viol.cut.has_value());
  // Soundness: the candidate violates its own cut.
  Vector zc = Vector::Zero(lay.num_vars());
  zc[lay.sigma(0, 0, 0)] = 1.0;
  zc[lay.sigma(0, 1, 1)] = 1.0;
  CHECK(viol.cut->violation(zc) > 1e-7);

  // Curvature matched to the ellipse certifies at 0.9 and a dense sweep
  // confirms no direction dips below.
  Matrix matched = (Matrix(2, 2) << 1, 0, 0, 100).finished();
  auto ok = strong_convexity_cut(matched, ell, 0.9, 0.05, 1e-6, cover, lay, 0,
                                 1e-7);
  CHECK(ok.certified);
  Rng rng(89);
  std::normal_distribution<double> N(0, 1);
  double min_ratio = 1e300;
  for (int t = 0; t < 100000; ++t) {
    Vector v(2);
    v << N(rng), N(rng);
    if (v.norm() < 1e-12) continue;
    v.normalize();
    const double s = ell.dual_gauge(v);
    min_ratio = std::min(min_ratio, v.dot(matched * v) / (s * s));
  }
  CHECK(min_ratio >= 0.9);
  CHECK(min_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectral upper-bound oracle") {
  InstanceLayout lay{1, 2};
  CHECK(psd_upper_cut(Matrix::Identity(2, 2), 2.0, lay, 0, 1e-7).ok);

  auto cut = psd_upper_cut((Matrix(2, 2) << 3, 0, 0, 1).finished(), 2.0, lay,
                           0, 1e-7);
  CHECK_FALSE(cut.ok);
  CHECK(cut.top_eigenvalue == doctest::Approx(3.0));
  CHECK(std::abs(cut.top_vector[0]) == doctest::Approx(1.0));
  REQUIRE(cut.cut.has_value());
  Vector z = Vector::Zero(lay.num_vars());
  z[lay.sigma(0, 0, 0)] = 3.0;
  z[lay.sigma(0, 1, 1)] = 1.0;
  CHECK(cut.cut->violation(z) == doctest::Approx(1.0));  // 3 > 2 by 1

  // Top eigenvalue agrees with the 2x2 characteristic-polynomial root.
  Rng rng(97);
  std::normal_distribution<double> N(0, 1);
  for (int t = 0; t < 100; ++t) {
    const double a = N(rng), b = N(rng), c = N(rng);
    Matrix m(2, 2);
    m << a, b, b, c;
    const double lam =
        (a + c) / 2 + std::sqrt((a - c) * (a - c) / 4 + b * b);
    CHECK(psd_upper_cut(m, -1e9, lay, 0, 1e-7).top_eigenvalue ==
          doctest::Approx(lam).epsilon(1e-10));
  }
}

TEST_CASE("one-dimensional synthesis solves and certifies") {
  CalibrationOverrides o;
  o.eps_bar = 0.5;
  SynthesisConfig cfg = calibrate_constants(ball(1), ball(1), 2.0, o);
  SolveOutput out = solve_program(ball(1), ball(1), cfg);
  CHECK(out.report.feasible);
  CHECK(out.report.certified);
  CHECK(out.report.max_violation <= cfg.cut_tol);
  CHECK(out.instance.r <= cfg.C0 + 1e-9);
  CHECK(out.instance.r >= 0.0);
  CHECK(out.grid.size() == 5);
  // Every curvature meets the margined modulus and the spectral cap.
  for (const Matrix& s : out.instance.sigma_i) {
    CHECK(s(0, 0) >= cfg.alpha * (1 + cfg.delta_m) - 1e-7);
    CHECK(s(0, 0) <= cfg.c2 + 1e-7);
  }

  // The assembled max touches r_i at each center: the own piece attains r_i
  // exactly, and neighbors can poke above it by at most the gap between the
  // locality margin (17L/96) and the stored cubic (L/6 = 16L/96).
  PiecewiseRegularizer g = assemble_regularizer(out, ball(1), "unit-test");
  for (int i = 0; i < out.grid.size(); ++i) {
    const double gi = g.value(out.grid.centers[i]);
    CHECK(gi >= out.instance.r_i[i] - 1e-12);
    CHECK(gi <= out.instance.r_i[i] + (cfg.L / 96.0) * 8.0 + 1e-9);
  }
  CHECK(g.alpha() == doctest::Approx(cfg.alpha / 2.0));
  PiecewiseRegularizer g2 =
      regularizer_from_json(regularizer_to_json(g));
  CHECK(g2.value(vec({0.3})) == g.value(vec({0.3})));

  // Under the alternate 15/96 locality margin the stored cubic dominates the
  // pair margin, so every piece attains the max at its own center exactly.
  CalibrationOverrides o15 = o;
  o15.pair_coeff = 15.0 / 96.0;
  SolveOutput strict = solve_program(
      ball(1), ball(1), calibrate_constants(ball(1), ball(1), 2.0, o15));
  REQUIRE(strict.report.certified);
  PiecewiseRegularizer gs = assemble_regularizer(strict, ball(1));
  for (int i = 0; i < strict.grid.size(); ++i)
    CHECK(gs.value(strict.grid.centers[i]) ==
          doctest::Approx(strict.instance.r_i[i]).epsilon(1e-9));

  // Independent re-validation passes every family at twice the tolerance.
  // The sampled half-modulus is report-only here: this grid is far coarser
  // than the threshold below which the modulus guarantee kicks in.
  ValidationReport val = validate_instance(out, ball(1), ball(1));
  CHECK(val.families_pass(2 * cfg.cut_tol));
  CHECK(val.g_range_hi <= cfg.C0 + 1e-7);
  CHECK(std::isfinite(val.modulus_slack));

  // Planted corruptions are caught by the right family.
  SolveOutput corrupt_sigma = out;
  for (Matrix& s : corrupt_sigma.instance.sigma_i) s *= 0.1;
  CHECK(validate_instance(corrupt_sigma, ball(1), ball(1)).max_sc_violation >
        2 * cfg.cut_tol);
  SolveOutput corrupt_r = out;
  corrupt_r.instance.r_i[2] -= 0.5;
  CHECK(validate_instance(corrupt_r, ball(1), ball(1)).max_pair_violation >
        2 * cfg.cut_tol);
}

TEST_CASE("witness feasibility of the quadratic instance") {
  CalibrationOverrides o;
  o.eps_bar = 0.5;
  const double C = 2.0;
  SynthesisConfig cfg = calibrate_constants(ball(1), ball(1), C, o);
  DiscretizationGrid grid = discretize_action_set(ball(1), 0.5);
  InstanceLayout lay{grid.size(), 1};
  ProgramInstance w = exact_instance(
      grid, [&](const Vector& x) { return 0.5 * C * C * x.squaredNorm(); },
      [&](const Vector& x) { return (C * C * x).eval(); },
      [&](const Vector&) { return (C * C * Matrix::Identity(1, 1)).eval(); });
  const Vector z = w.pack(lay);
  for (const ConstraintCut& cut : locality_constraints(grid, cfg, lay)) {
    CHECK(cut.violation(z) <= 1e-12);
    if (cut.tag.rfind("locality", 0) == 0) {
      // Exact Taylor expansion: slack is the full cubic margin.
      CHECK(cut.violation(z) < -1e-3);
    }
  }
  SphereCover cover = SphereCover::build(1, cfg.eps_tilde);
  for (const Matrix& s : w.sigma_i) {
    // alpha <= C^2 / R^2 = 4 certifies.
    auto sc = strong_convexity_cut(s, ball(1), 1.0, cfg.delta_m,
                                   cfg.delta_lin, cover, lay, 0, cfg.cut_tol);
    CHECK(sc.certified);
  }
}

TEST_CASE("infeasible configurations produce certificates") {
  CalibrationOverrides o;
  o.eps_bar = 0.5;
  o.L = 0.001;
  o.c2 = 1.2;
  o.C0 = 0.02;  // range cap far below what the curvature forces
  SynthesisConfig cfg = calibrate_constants(ball(1), ball(1), 1.0, o);
  SolveOutput out = solve_program(ball(1), ball(1), cfg);
  CHECK_FALSE(out.report.feasible);
  CHECK(out.report.note.find("Farkas") != std::string::npos);

  CHECK_THROWS_AS(
      solve_with_doubling(ball(1), ball(1), 1.0, o, 3),
      ValidationError);
}

TEST_CASE("doubling search finds a feasible scale") {
  CalibrationOverrides o;
  o.eps_bar = 0.5;
  SolveOutput out = solve_with_doubling(ball(1), ball(1), 1.0, o);
  CHECK(out.report.certified);
  CHECK(out.config.c_guess <= 2.0);  // feasible by C = 2 at the latest

  SolveOutput big = solve_with_doubling(ball(1), ball(1), 64.0, o);
  CHECK(big.config.c_guess == 64.0);  // generous guess returns immediately
}

TEST_CASE("slack stage margins the instance without moving the optimum") {
  CalibrationOverrides o;
  o.eps_bar = 0.5;
  SynthesisConfig cfg = calibrate_constants(ball(1), ball(1), 2.0, o);
  SolveOutput pushed = solve_program(ball(1), ball(1), cfg);
  REQUIRE(pushed.report.certified);
  CHECK(pushed.report.slack_floor > 0.0);

  CalibrationOverrides bare_o = o;
  bare_o.slack_push = 0.0;
  SolveOutput bare = solve_program(
      ball(1), ball(1), calibrate_constants(ball(1), ball(1), 2.0, bare_o));
  REQUIRE(bare.report.certified);
  CHECK(bare.report.slack_floor == 0.0);
  // Both modes certify the same minimum; only the returned instance differs.
  CHECK(pushed.report.objective ==
        doctest::Approx(bare.report.objective).epsilon(1e-9));
  CHECK(pushed.instance.r <= cfg.C0 + 1e-9);
  CHECK(pushed.instance.r >= pushed.report.objective - 1e-9);

  // Every pair cut of the pushed instance carries the advertised margin.
  InstanceLayout lay{pushed.grid.size(), 1};
  const Vector z = pushed.instance.pack(lay);
  for (const ConstraintCut& cut : locality_constraints(pushed.grid, cfg, lay))
    if (cut.slack_scale > 0)
      CHECK(cut.violation(z) <=
            -pushed.report.slack_floor * cut.slack_scale + 1e-9);

  CalibrationOverrides bad = o;
  bad.slack_push = 1.5;  // headroom fraction must stay in [0, 1]
  CHECK_THROWS_AS(calibrate_constants(ball(1), ball(1), 2.0, bad),
                  ValidationError);
}

TEST_CASE("two-dimensional synthesis on the ball pair") {
  // C = 1 keeps the cubic budget small enough that the locality cuts bind
  // (the all-zero instance is infeasible) and the objective is nontrivial.
  CalibrationOverrides o;
  o.eps_bar = 0.5;
  SynthesisConfig cfg = calibrate_constants(ball(2), ball(2), 1.0, o);
  SolveOutput out = solve_program(ball(2), ball(2), cfg);
  CHECK(out.report.feasible);
  CHECK(out.report.certified);
  CHECK(out.grid.size() == 13);
  CHECK(out.report.max_violation <= cfg.cut_tol);
  CHECK(out.report.objective > 0.01);
  ValidationReport val = validate_instance(out, ball(2), ball(2));
  CHECK(val.families_pass(2 * cfg.cut_tol));
  CHECK(val.g_range_hi <= cfg.C0 + 1e-7);
  // Regression pin for the solved objective (frozen from the first certified
  // run; guards against silent solver drift).
  CHECK(out.report.objective ==
        doctest::Approx(0.376091259799).epsilon(1e-6));
  MESSAGE("2d objective: ", out.report.objective);
  MESSAGE("2d rounds: ", out.report.rounds, " sc_cuts: ", out.report.sc_cuts,
          " pivots: ", out.report.lp_pivots);

  // Large cubic budgets make the flat all-zero instance genuinely feasible
  // at this spacing, so the solved objective collapses to zero.
  SolveOutput flat = solve_program(
      ball(2), ball(2), calibrate_constants(ball(2), ball(2), 2.0, o));
  CHECK(flat.report.certified);
  CHECK(flat.report.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("coarser grids never raise the objective") {
  CalibrationOverrides fine_o, coarse_o;
  fine_o.eps_bar = 0.25;
  coarse_o.eps_bar = 0.5;
  SolveOutput fine =
      solve_program(ball(1), ball(1),
                    calibrate_constants(ball(1), ball(1), 2.0, fine_o));
  SolveOutput coarse =
      solve_program(ball(1), ball(1),
                    calibrate_constants(ball(1), ball(1), 2.0, coarse_o));
  CHECK(fine.report.certified);
  CHECK(coarse.report.certified);
  CHECK(coarse.report.objective <= fine.report.objective + 1e-9);
}

TEST_CASE("single-piece assembly gives the plain quadratic") {
  SolveOutput out;
  out.grid.eps_bar = 1.0;
  out.grid.centers = {Vector::Zero(2)};
  out.instance.r = 0;
  out.instance.r_i = {0.0};
  out.instance.v_i = {Vector::Zero(2)};
  out.instance.sigma_i = {Matrix::Identity(2, 2)};
  out.config.L = 0.0;
  out.config.alpha = 1.0;
  PiecewiseRegularizer g = assemble_regularizer(out, ball(2));
  CHECK(g.value(vec({3, 4})) == doctest::Approx(12.5));
}
