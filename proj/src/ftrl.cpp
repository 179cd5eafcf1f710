#include "olo/ftrl.hpp"

#include <cmath>
#include <utility>

#include "olo/types.hpp"

namespace olo {

FtrlState FtrlState::init(int dim, int horizon, double eta) {
  if (dim < 1) throw ValidationError("ftrl state: dimension must be positive");
  if (horizon < 1) throw ValidationError("ftrl state: horizon must be positive");
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw ValidationError("ftrl state: eta must be positive and finite");
  }
  FtrlState s;
  s.t = 0;
  s.T = horizon;
  s.eta = eta;
  s.cum_loss = Vector::Zero(dim);
  return s;
}

namespace {

void validate_inner_config(const InnerSolveConfig& cfg) {
  if (!(cfg.tol > 0) || !std::isfinite(cfg.tol)) {
    throw ValidationError("inner solve config: tol must be positive and finite");
  }
  if (cfg.max_iterations < 1) {
    throw ValidationError("inner solve config: max_iterations must be positive");
  }
  if (cfg.max_cache_cuts < 0) {
    throw ValidationError("inner solve config: max_cache_cuts must be nonnegative");
  }
  if (cfg.polish_iterations < 0) {
    throw ValidationError("inner solve config: polish_iterations must be nonnegative");
  }
  if (!(cfg.feas_delta > 0) || !std::isfinite(cfg.feas_delta)) {
    throw ValidationError("inner solve config: feas_delta must be positive");
  }
  if (!(cfg.value_range >= 0) || !std::isfinite(cfg.value_range)) {
    throw ValidationError(
        "inner solve config: value_range must be nonnegative and finite");
  }
}

Objective view_objective(const FunctionView& f) {
  return [&f](const Vector& x, Vector* subgrad) {
    if (subgrad) *subgrad = f.gradient(x);
    return f.value(x);
  };
}

// Keeps the newest cuts when the cache outgrows its cap.
void trim_cache(DomainCuts* cache, int cap) {
  if (!cache) return;
  const int n = static_cast<int>(cache->normals.size());
  if (n <= cap) return;
  const int drop = n - cap;
  cache->normals.erase(cache->normals.begin(), cache->normals.begin() + drop);
  cache->mins.erase(cache->mins.begin(), cache->mins.begin() + drop);
}

}  // namespace

InnerSolveResult inner_minimize(const FunctionView& objective,
                                const ConvexBody& domain, double tol,
                                int max_iterations, DomainCuts* cache,
                                int polish_iterations, double feas_delta) {
  if (!(tol > 0) || !std::isfinite(tol)) {
    throw ValidationError("inner_minimize: tol must be positive and finite");
  }
  if (!objective.value || !objective.gradient) {
    throw ValidationError("inner_minimize: objective view is incomplete");
  }
  CuttingPlaneOptions opts;
  opts.gap_tol = tol;
  opts.max_iterations = max_iterations;
  opts.polish_iterations = polish_iterations;
  opts.feas_delta = feas_delta;
  const Objective f = view_objective(objective);
  const CuttingPlaneResult r = minimize_convex(domain, f, opts, cache);
  InnerSolveResult out;
  out.x = r.x;
  out.value = r.value;
  out.gap = r.value - r.lower_bound;
  out.certified = r.converged;
  out.iterations = r.iterations;
  return out;
}

FtrlStepResult ftrl_step(const FtrlState& state, const FunctionView& g,
                         const ConvexBody& X, const InnerSolveConfig& cfg,
                         DomainCuts* cache) {
  validate_inner_config(cfg);
  if (state.cum_loss.size() != X.dim()) {
    throw ValidationError("ftrl_step: state dimension does not match the body");
  }
  if (!(state.eta > 0) || !std::isfinite(state.eta)) {
    throw ValidationError("ftrl_step: state eta must be positive and finite");
  }
  if (!g.value || !g.gradient) {
    throw ValidationError("ftrl_step: regularizer view is incomplete");
  }

  // Range of the step objective over X is at most the regularizer's spread
  // plus the spread of the linear term, whence this proxy for a relative
  // stopping rule.  Floor keeps the early rounds (zero losses) well posed.
  const double range_proxy = std::max(
      1e-9, state.eta * cfg.value_range + X.outer_radius() * state.cum_loss.norm());

  FunctionView total;
  total.value = [&state, &g](const Vector& x) {
    return state.eta * g.value(x) + state.cum_loss.dot(x);
  };
  total.gradient = [&state, &g](const Vector& x) {
    return Vector(state.eta * g.gradient(x) + state.cum_loss);
  };

  const InnerSolveResult inner = inner_minimize(
      total, X, cfg.tol * range_proxy, cfg.max_iterations, cache,
      cfg.polish_iterations, cfg.feas_delta);

  FtrlStepResult out;
  out.x = inner.x;
  out.objective = inner.value;
  out.gap = inner.gap;
  out.range_proxy = range_proxy;
  out.certified = inner.certified;
  out.inner_iterations = inner.iterations;
  return out;
}

bool observe_loss(FtrlState& state, const Vector& loss,
                  const ConvexBody& loss_body, double delta) {
  if (loss.size() != state.cum_loss.size()) {
    throw ValidationError("observe_loss: loss dimension does not match state");
  }
  if (loss.size() != loss_body.dim()) {
    throw ValidationError("observe_loss: loss dimension does not match body");
  }
  const bool inside = loss_body.contains(loss, delta);
  state.cum_loss += loss;
  state.t += 1;
  return inside;
}

RegretTrace run_ftrl(const FunctionView& g, const ConvexBody& X,
                     const ConvexBody& loss_body, const AdversaryFn& adversary,
                     int T, const InnerSolveConfig& cfg,
                     std::optional<double> eta, const ExactStep& exact_step) {
  validate_inner_config(cfg);
  if (T < 1) throw ValidationError("run_ftrl: horizon must be positive");
  if (!adversary) throw ValidationError("run_ftrl: adversary is empty");
  if (X.dim() != loss_body.dim()) {
    throw ValidationError("run_ftrl: action and loss sets disagree in dimension");
  }
  const double weight = eta.value_or(std::sqrt(static_cast<double>(T)));
  FtrlState state = FtrlState::init(X.dim(), T, weight);

  RegretTrace trace;
  trace.eta = weight;
  trace.T = T;
  trace.actions.reserve(T);
  trace.losses.reserve(T);
  trace.inner_gaps.reserve(T);
  trace.inner_certified.reserve(T);

  DomainCuts cache;
  DomainCuts* cache_ptr = cfg.reuse_domain_cuts ? &cache : nullptr;

  for (int t = 1; t <= T; ++t) {
    Vector x;
    double gap = 0;
    bool certified = true;
    if (exact_step) {
      if (std::optional<Vector> exact = exact_step(state)) x = std::move(*exact);
    }
    if (x.size() == 0) {
      const FtrlStepResult step = ftrl_step(state, g, X, cfg, cache_ptr);
      x = step.x;
      gap = step.gap;
      certified = step.certified;
      trim_cache(cache_ptr, cfg.max_cache_cuts);
    }
    const Vector loss = adversary(t, x);
    if (!observe_loss(state, loss, loss_body)) trace.membership_warnings += 1;
    trace.actions.push_back(std::move(x));
    trace.losses.push_back(loss);
    trace.inner_gaps.push_back(gap);
    trace.inner_certified.push_back(certified ? 1 : 0);
  }
  return trace;
}

}  // namespace olo
