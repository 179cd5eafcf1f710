#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "olo/convex_body.hpp"
#include "olo/cutting_plane.hpp"
#include "olo/types.hpp"
#include "olo/verify.hpp"

namespace olo {

// State of a follow-the-regularized-leader loop after t observed losses.
struct FtrlState {
  int t = 0;         // rounds played so far
  int T = 1;         // horizon
  double eta = 1.0;  // weight on the regularizer inside the step objective
  Vector cum_loss;   // sum of the observed loss vectors

  static FtrlState init(int dim, int horizon, double eta);
};

// Accuracy controls for the per-step inner minimization.
struct InnerSolveConfig {
  double tol = 1e-8;       // relative gap target (times the range proxy)
  int max_iterations = 400;
  int max_cache_cuts = 512;       // cap on retained domain cuts
  bool reuse_domain_cuts = true;  // share separation cuts across steps
  // First-order polish rounds for the inner solver (see
  // CuttingPlaneOptions::polish_iterations); off by default, enable when
  // iterates must track the exact minimizer beyond the certified-gap noise
  // floor.
  int polish_iterations = 0;
  // Membership shell for the played action: x is feasible within this
  // Euclidean distance of the action set.  The polish stage re-enters the
  // exact body on its own, so this can stay at the solver's native width.
  double feas_delta = 1e-9;
  // Estimate of (max - min) of the unweighted regularizer over the action
  // set; enters the step's range proxy as eta * value_range + R * |cum_loss|.
  double value_range = 1.0;
};

struct FtrlStepResult {
  Vector x;                // the played action
  double objective = 0;    // eta * g(x) + <x, cum_loss>
  double gap = 0;          // certified optimality gap of the inner solve
  double range_proxy = 0;  // scale the relative tolerance was applied to
  bool certified = true;   // false when the inner solver hit its budget
  int inner_iterations = 0;
};

struct InnerSolveResult {
  Vector x;
  double value = 0;
  double gap = 0;  // value - certified lower bound
  bool certified = false;
  int iterations = 0;
};

// Cutting-plane minimization of a convex function view over the body, to an
// absolute gap of tol.  On budget exhaustion returns the best iterate with
// certified = false rather than failing.
InnerSolveResult inner_minimize(const FunctionView& objective,
                                const ConvexBody& domain, double tol,
                                int max_iterations = 400,
                                DomainCuts* cache = nullptr,
                                int polish_iterations = 0,
                                double feas_delta = 1e-9);

// One step: x = argmin_{x in X} eta * g(x) + <x, cum_loss>, solved to a gap
// of cfg.tol times the range proxy.  The optional cache carries domain cuts
// between consecutive steps over the same body.
FtrlStepResult ftrl_step(const FtrlState& state, const FunctionView& g,
                         const ConvexBody& X, const InnerSolveConfig& cfg = {},
                         DomainCuts* cache = nullptr);

// Adds one loss vector to the state.  Returns false (a warning, not an
// error) when the loss fails the loss-set membership check; the state is
// updated either way.  Dimension mismatches throw.
bool observe_loss(FtrlState& state, const Vector& loss,
                  const ConvexBody& loss_body, double delta = 1e-7);

// Produces the round-t loss after seeing the played action.
using AdversaryFn = std::function<Vector(int t, const Vector& x_t)>;

// Closed-form step override: return the exact minimizer for the current
// state, or nullopt to fall back to the cutting-plane solver.
using ExactStep = std::function<std::optional<Vector>(const FtrlState&)>;

// Record of one full run.  cumulative_regret is left empty here and filled
// by the benchmark layer, which owns the comparator computation.
struct RegretTrace {
  std::vector<Vector> actions;
  std::vector<Vector> losses;
  std::vector<double> inner_gaps;
  std::vector<char> inner_certified;     // per-round convergence flags
  std::vector<double> cumulative_regret;
  double eta = 0;  // regularizer weight used (loss-side rate is 1/eta)
  int T = 0;
  int membership_warnings = 0;  // losses outside the loss set
};

// Plays T rounds of FTRL against the adversary.  When eta is not given it
// defaults to sqrt(T).  exact_step, when provided and successful, bypasses
// the inner solver and records a zero gap for the round.
RegretTrace run_ftrl(const FunctionView& g, const ConvexBody& X,
                     const ConvexBody& loss_body, const AdversaryFn& adversary,
                     int T, const InnerSolveConfig& cfg = {},
                     std::optional<double> eta = std::nullopt,
                     const ExactStep& exact_step = {});

}  // namespace olo
