#include "olo/cutting_plane.hpp"

#include <algorithm>
#include <cmath>

#include "olo/simplex_lp.hpp"

namespace olo {

namespace {

struct EpigraphCut {
  Vector g;      // subgradient at x0
  double rhs;    // <g, x0> - f(x0); encodes t >= f(x0) + <g, x - x0>
};

// First-order polish of the incumbent.  Cutting-plane iterates stop moving
// once model improvements sink below the LP tolerances (~1e-10 of the data
// scale), which strands the returned point ~1e-5 from the true minimizer of
// a smooth objective.  A few oracle-only descent steps close that distance:
// backtracking (sub)gradient steps while they stay feasible, and a
// Frank-Wolfe step (linear_minimize extreme point plus a secant line search,
// exact on quadratics) when the boundary blocks them.  Only strictly
// improving feasible steps are accepted, so a nonsmooth objective at worst
// leaves the incumbent unchanged.  The certified lower bound is untouched.
void polish_incumbent(const ConvexBody& domain, const Objective& f,
                      const CuttingPlaneOptions& opts,
                      CuttingPlaneResult& res) {
  const int d = domain.dim();
  double diam = 0;
  for (int i = 0; i < d; ++i) {
    const Vector e = Vector::Unit(d, i);
    diam = std::max(diam, domain.support(e) + domain.support(-e));
  }

  // The polish works to a much tighter membership shell than the main loop:
  // a point sitting feas_delta outside the body undercuts every exact
  // member by about feas_delta times the gradient norm, and that bonus
  // would make each boundary trial look like an ascent.
  const double tight = std::min(opts.feas_delta, 1e-12);

  Vector x = res.x;
  // Exit the incumbent's shell first so comparisons happen among (near-)
  // exact members; the one-off re-entry cost is of shell order.
  bool retracted_start = false;
  if (domain.symmetric()) {
    const double gamma = domain.gauge(x);
    if (std::isfinite(gamma) && gamma > 1.0) {
      x /= gamma;
      retracted_start = true;
    }
  }
  Vector gx(d);
  double fx = f(x, &gx);
  ++res.f_evals;
  if (!std::isfinite(fx)) return;

  // The trial ladder always restarts from a body-sized step: for a boundary
  // minimizer the long retracted step is the one that lands on it (on the
  // ball it is an exact projected-gradient step), and tiny steps would only
  // harvest spurious value from the feasibility shell.
  const auto try_gradient = [&]() {
    const double gn = gx.norm();
    if (!(gn > 0)) return false;
    double step = 2.0 * diam / gn;
    for (int bt = 0; bt < 24; ++bt, step *= 0.25) {
      Vector y = x - step * gx;
      if (domain.symmetric()) {
        // Radial retraction: pull the trial back onto the body along its
        // ray (exact projection on the Euclidean ball).  Trials are exact
        // members to rounding, so the feasibility shell contributes no
        // spurious value.
        const double gamma = domain.gauge(y);
        if (!std::isfinite(gamma)) continue;
        if (gamma > 1.0) y /= gamma;
      } else if (!domain.contains(y, tight)) {
        continue;
      }
      const double descent = gx.dot(x - y);  // first-order predicted drop
      if (!(descent > 0)) continue;
      Vector gy(d);
      const double fy = f(y, &gy);
      ++res.f_evals;
      if (std::isfinite(fy) && fy <= fx - 1e-4 * descent) {
        x = y;
        fx = fy;
        gx = gy;
        return true;
      }
    }
    return false;
  };

  const auto try_frank_wolfe = [&]() {
    const Vector s = domain.linear_minimize(gx, opts.feas_delta);
    const Vector dir = s - x;
    const double d0 = gx.dot(dir);  // directional derivative at theta = 0
    if (!(d0 < 0)) return false;
    Vector gs(d);
    f(s, &gs);
    ++res.f_evals;
    const double d1 = gs.dot(dir);  // ... and at theta = 1; d1 >= d0 (convex)
    double theta = d1 > d0 ? std::clamp(-d0 / (d1 - d0), 0.0, 1.0) : 1.0;
    for (int bt = 0; bt < 20 && theta > 1e-18; ++bt, theta *= 0.5) {
      Vector y = x + theta * dir;
      if (domain.symmetric()) {
        const double gamma = domain.gauge(y);
        if (!std::isfinite(gamma)) continue;
        if (gamma > 1.0) y /= gamma;
      } else if (!domain.contains(y, tight)) {
        continue;
      }
      Vector gy(d);
      const double fy = f(y, &gy);
      ++res.f_evals;
      if (std::isfinite(fy) && fy < fx) {
        x = y;
        fx = fy;
        gx = gy;
        return true;
      }
    }
    return false;
  };

  // Gradient ladder first every round: a boundary-pinned Frank-Wolfe step
  // shrinks the error only like 1/iteration, while the retracted gradient
  // step contracts linearly.  Both failing leaves the state unchanged, so
  // there is nothing to retry.
  for (int it = 0; it < opts.polish_iterations; ++it) {
    if (!try_gradient() && !try_frank_wolfe()) break;
  }
  // A retracted start is committed even when the re-entry cost was not
  // fully recovered: an exact member beats a shell point at equal order.
  if (fx < res.value || retracted_start) {
    res.value = fx;
    res.x = x;
  }
}

}  // namespace

CuttingPlaneResult minimize_convex(const ConvexBody& domain, const Objective& f,
                                   const CuttingPlaneOptions& opts,
                                   DomainCuts* cache) {
  const int d = domain.dim();
  DomainCuts local;
  DomainCuts& dom = cache ? *cache : local;

  // Exact per-axis bounding box of the domain via support values.
  Vector lo(d + 1), hi(d + 1);
  for (int i = 0; i < d; ++i) {
    Vector e = Vector::Unit(d, i);
    hi[i] = domain.support(e);
    lo[i] = -domain.support(-e);
    if (!(hi[i] >= lo[i]))
      throw NumericError("cutting plane: empty axis bounds");
  }

  const Vector x0 = domain.interior_point();
  Vector g0(d);
  const double f0 = f(x0, &g0);
  if (!std::isfinite(f0))
    throw NumericError("cutting plane: objective not finite at start");

  std::vector<EpigraphCut> epi;
  epi.push_back({g0, g0.dot(x0) - f0});

  const double scale = 1.0 + std::abs(f0);
  double t_lo = f0 - 10.0 * scale;
  const double t_hi = f0 + scale;

  CuttingPlaneResult res;
  res.x = x0;
  res.value = f0;
  res.f_evals = 1;

  Vector obj = Vector::Zero(d + 1);
  obj[d] = 1.0;  // minimize the epigraph variable

  // The model LP must be solved tighter than the requested gap: a vertex
  // declared optimal within cost_tol can sit cost_tol * scale above the true
  // model minimum, and the loop would then cycle on it forever.
  SimplexOptions lp_opts;
  lp_opts.cost_tol =
      std::clamp(0.01 * opts.gap_tol / scale, 1e-11, 1e-9);

  int expansions = 0;
  Vector x_prev;
  int stagnant = 0;
  const auto main_loop = [&]() {
  while (expansions <= opts.max_expansions) {
    lo[d] = t_lo;
    hi[d] = t_hi;
    BoxedInequalityLp lp(obj, lo, hi, lp_opts);
    for (size_t k = 0; k < dom.normals.size(); ++k) {
      Vector row = Vector::Zero(d + 1);
      row.head(d) = -dom.normals[k];
      lp.add_row(row, -dom.mins[k]);
    }
    for (const EpigraphCut& c : epi) {
      Vector row(d + 1);
      row.head(d) = c.g;
      row[d] = -1.0;
      lp.add_row(row, c.rhs);
    }

    bool need_expand = false;
    while (res.iterations < opts.max_iterations) {
      ++res.iterations;
      BoxedLpSolution sol = lp.solve();
      if (sol.status == LpStatus::kIterLimit)
        return;  // stalled master; best incumbent, converged stays false
      if (sol.status != LpStatus::kOptimal)
        throw NumericError("cutting plane: model LP not optimal");
      const Vector xhat = sol.z.head(d);
      const double that = sol.z[d];
      // A repeated model argmin means added cuts are duplicates and the gap
      // cannot move; further rounds would only replay this vertex.
      if (x_prev.size() == d &&
          (xhat - x_prev).norm() <= 1e-13 * (1.0 + x_prev.norm())) {
        if (++stagnant >= 3) return;
      } else {
        stagnant = 0;
      }
      x_prev = xhat;

      if (that <= t_lo + 1e-7 * scale) {  // resting on the artificial floor
        t_lo -= 4.0 * (t_hi - t_lo);
        ++expansions;
        need_expand = true;
        break;
      }
      res.lower_bound = that;

      auto sep = domain.separate(xhat, opts.feas_delta);
      if (sep.has_value()) {
        const double m = -domain.support(-*sep);
        dom.normals.push_back(*sep);
        dom.mins.push_back(m);
        Vector row = Vector::Zero(d + 1);
        row.head(d) = -*sep;
        lp.add_row(row, -m);
        continue;
      }

      Vector g(d);
      const double fx = f(xhat, &g);
      ++res.f_evals;
      if (!std::isfinite(fx))
        throw NumericError("cutting plane: objective not finite");
      if (fx < res.value) {
        res.value = fx;
        res.x = xhat;
      }
      if (res.value - that <= opts.gap_tol) {
        res.converged = true;
        return;
      }
      epi.push_back({g, g.dot(xhat) - fx});
      Vector row(d + 1);
      row.head(d) = g;
      row[d] = -1.0;
      lp.add_row(row, epi.back().rhs);
    }
    if (!need_expand) break;  // iteration budget exhausted
  }
  };
  main_loop();
  if (opts.polish_iterations > 0 && res.x.size() == d)
    polish_incumbent(domain, f, opts, res);
  return res;
}

}  // namespace olo
