#pragma once

#include <functional>

#include "olo/convex_body.hpp"
#include "olo/types.hpp"

namespace olo {

// Evaluates f(x); when subgrad is non-null it must be filled with a
// subgradient of f at x.
using Objective = std::function<double(const Vector&, Vector* subgrad)>;

struct CuttingPlaneOptions {
  double gap_tol = 1e-9;       // stop when upper - lower <= gap_tol
  double feas_delta = 1e-9;    // separation-oracle tolerance
  int max_iterations = 5000;   // LP re-solves
  int max_expansions = 60;     // epigraph lower-box growth steps
  // First-order polish after the main loop: up to this many oracle-only
  // descent rounds (backtracking gradient steps with a Frank-Wolfe
  // fallback) that push the iterate beyond the model LP's noise floor.
  // Improves res.x and res.value only; the certified lower bound is
  // untouched.  Off by default.
  int polish_iterations = 0;
};

// Supporting halfplanes of one body, reusable across repeated minimizations
// over the same domain.
struct DomainCuts {
  std::vector<Vector> normals;  // unit inward normals c
  std::vector<double> mins;     // min over the body of <c, x>
};

struct CuttingPlaneResult {
  Vector x;            // best feasible point found
  double value = 0;    // f at x
  double lower_bound = 0;
  int iterations = 0;
  int f_evals = 0;
  bool converged = false;
};

// Kelley cutting-plane minimization of a convex f over a body given by
// membership/separation oracles.  Model LPs run on the boxed-inequality
// simplex wrapper; each round adds either a separation cut (infeasible model
// point) or an epigraph cut at the evaluated point.
CuttingPlaneResult minimize_convex(const ConvexBody& domain, const Objective& f,
                                   const CuttingPlaneOptions& opts = {},
                                   DomainCuts* cache = nullptr);

}  // namespace olo
