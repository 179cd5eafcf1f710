#pragma once

#include <optional>
#include <string>
#include <vector>

#include "olo/convex_body.hpp"
#include "olo/regularizer.hpp"
#include "olo/types.hpp"

namespace olo {

// Tunables of the regularizer-synthesis program.  Derived by
// calibrate_constants; every field can be pinned by an override.
struct SynthesisConfig {
  double eps_bar = 0;    // action-set grid spacing
  double eps = 0;        // cover accuracy, <= sqrt(d) * eps_bar
  double L = 0;          // Hessian-Lipschitz budget (cubic coefficient)
  double alpha = 0;      // target strong-convexity modulus
  double c0 = 0;         // gradient infinity-norm bound
  double c2 = 0;         // Hessian spectral upper bound
  double C0 = 0;         // value bound
  double delta = 0;      // requested final certification margin
  double delta_m = 0;    // strong-convexity sampling margin
  double delta_lin = 0;  // linear-oracle accuracy
  double eps_tilde = 0;  // sphere-cover resolution
  double cut_tol = 1e-7;
  int max_rounds = 60;
  double pair_coeff = 17.0 / 96.0;  // locality margin (alternate 15/96)
  // Fraction of the value-bound headroom (C0 - optimum) the second solve
  // stage may spend to maximize the uniform pair-slack floor.  0 disables
  // the stage and returns the bare optimal vertex.
  double slack_push = 0.5;
  double c_guess = 0;               // the C this config was calibrated for
  double c1_tilde = 0, c2_tilde = 0;  // pre-correction derivative bounds
  double eps_bar_theory = 0;  // full theoretical schedule, metadata only
  long grid_budget = 200000;

  void validate(const ConvexBody& loss_body) const;
};

struct CalibrationOverrides {
  std::optional<double> eps_bar, alpha, delta, L, c0, c2, C0, eps_tilde,
      delta_lin, cut_tol, pair_coeff, slack_push;
  std::optional<int> max_rounds;
  std::optional<long> grid_budget;
};

SynthesisConfig calibrate_constants(const ConvexBody& action_set,
                                    const ConvexBody& loss_body,
                                    double C_guess,
                                    const CalibrationOverrides& o = {});

// Lattice discretization of the action set: all points with coordinates
// k * eps_bar that pass membership.
struct DiscretizationGrid {
  std::vector<Vector> centers;
  double eps_bar = 0;
  int size() const { return static_cast<int>(centers.size()); }
  // Max distance from sampled body points to the nearest center.
  double audit_cover_radius(const ConvexBody& body, int n, Rng& rng) const;
};

DiscretizationGrid discretize_action_set(const ConvexBody& action_set,
                                         double eps_bar,
                                         long budget = 200000);

// Flat coordinate layout of a program instance:
// [ r | r_i (N) | v_i (N*d) | upper triangle of Sigma_i (N*d(d+1)/2) ].
struct InstanceLayout {
  int N = 0, d = 0;
  int tri() const { return d * (d + 1) / 2; }
  int num_vars() const { return 1 + N + N * d + N * tri(); }
  int r_global() const { return 0; }
  int r(int i) const { return 1 + i; }
  int v(int i, int k) const { return 1 + N + i * d + k; }
  int sigma(int i, int a, int b) const;  // a <= b
};

struct ProgramInstance {
  double r = 0;
  std::vector<double> r_i;
  std::vector<Vector> v_i;
  std::vector<Matrix> sigma_i;

  static ProgramInstance unpack(const Vector& z, const InstanceLayout& lay);
  Vector pack(const InstanceLayout& lay) const;
};

// One linear inequality over instance coordinates: sum coeff * z[idx] <= rhs.
// slack_scale is the weight of the uniform-slack variable in the second
// solve stage (pair cuts carry their cubic distance scale; all other
// families carry 0 and are untouched by the slack push).
struct ConstraintCut {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0;
  double slack_scale = 0;
  std::string tag;

  double lhs(const Vector& z) const;
  double violation(const Vector& z) const { return lhs(z) - rhs; }
};

// Static cut families: pair (locality) cuts, gradient/value bounds, and the
// objective links r_i <= r.
std::vector<ConstraintCut> locality_constraints(const DiscretizationGrid& grid,
                                                const SynthesisConfig& config,
                                                const InstanceLayout& lay);

struct StrongConvexityCheck {
  bool certified = false;
  Vector worst_dir;        // most violated cover direction
  double worst_violation = 0;  // margined requirement minus observed form
  std::optional<ConstraintCut> cut;
};

// Sampled strong-convexity separation for one candidate Sigma.  Certifies
// when every cover direction carries at least alpha (1 + delta_m) times the
// squared dual gauge; otherwise returns a cut at the margined level for the
// most violated direction.
StrongConvexityCheck strong_convexity_cut(const Matrix& sigma,
                                          const ConvexBody& loss_body,
                                          double alpha, double delta_m,
                                          double delta_lin,
                                          const SphereCover& cover,
                                          const InstanceLayout& lay,
                                          int center_index, double tol);

struct PsdUpperCheck {
  bool ok = false;
  double top_eigenvalue = 0;
  Vector top_vector;
  std::optional<ConstraintCut> cut;
};

PsdUpperCheck psd_upper_cut(const Matrix& sigma, double c2,
                            const InstanceLayout& lay, int center_index,
                            double tol);

struct SolveReport {
  bool feasible = false;
  bool certified = false;
  double objective = 0;      // certified minimum of the program
  int rounds = 0;
  int static_cuts = 0, sc_cuts = 0, psd_cuts = 0;
  long lp_pivots = 0;
  double max_violation = 0;
  // Certified uniform pair-slack floor of the returned instance (the second
  // solve stage): every pair cut holds with margin >= slack_floor * dist^3.
  // Zero when the stage is disabled or could not be certified.
  double slack_floor = 0;
  std::string note;
};

struct SolveOutput {
  ProgramInstance instance;
  DiscretizationGrid grid;
  SynthesisConfig config;
  SolveReport report;
};

SolveOutput solve_program(const ConvexBody& action_set,
                          const ConvexBody& loss_body,
                          const SynthesisConfig& config);

// Doubles C_guess until the program is feasible (bounds only loosen with C).
SolveOutput solve_with_doubling(const ConvexBody& action_set,
                                const ConvexBody& loss_body, double C_low,
                                const CalibrationOverrides& overrides = {},
                                int max_doublings = 20);

PiecewiseRegularizer assemble_regularizer(const SolveOutput& out,
                                          const ConvexBody& loss_body,
                                          const std::string& provenance = "");

struct ValidationReport {
  double max_pair_violation = 0;
  double max_grad_violation = 0;
  double max_value_violation = 0;
  double max_psd_violation = 0;
  double max_sc_violation = 0;  // against a cover at eps_tilde / 2
  double g_range_lo = 0, g_range_hi = 0;
  double modulus_slack = 0;  // sampled strong convexity at alpha / 2
  double locality_worst = 0, locality_bound = 0;  // logged, not gating
  bool locality_ok = true;
  // The five constraint families re-checked with fresh oracles. The sampled
  // modulus and locality radius are reported separately: they concern the
  // assembled function on the whole body, not the program constraints, and
  // carry their own guarantees only at sufficiently fine grids.
  bool families_pass(double tol) const {
    return max_pair_violation <= tol && max_grad_violation <= tol &&
           max_value_violation <= tol && max_psd_violation <= tol &&
           max_sc_violation <= tol;
  }
};

ValidationReport validate_instance(const SolveOutput& out,
                                   const ConvexBody& action_set,
                                   const ConvexBody& loss_body);

}  // namespace olo
