#pragma once

#include <cstdint>
#include <functional>

#include "olo/convex_body.hpp"
#include "olo/types.hpp"

namespace olo {

// Value (and optionally gradient/subgradient) access to a scalar function.
struct FunctionView {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct SmoothingProbe {
  double sigma = 1.0;  // Gaussian smoothing width, > 0
  int n = 1000;        // Monte-Carlo draws, >= 1
  std::uint64_t seed = 0;
};

// Sampled strong-convexity certification relative to the polar gauge of
// loss_body.  One-sided: reported violations are true violations up to
// finite-difference error; passing is evidence, not proof.
struct ConvexityReport {
  double min_pair_slack = 0;       // subgradient-inequality slack
  Vector worst_pair_x, worst_pair_y;
  double min_curvature_slack = 0;  // second-difference slack
  Vector worst_curve_x, worst_curve_v;
  int samples = 0;
  double tol = 0;
  bool passed() const {
    return min_pair_slack >= -tol && min_curvature_slack >= -tol;
  }
};

ConvexityReport strong_convexity_sampled(const FunctionView& f,
                                         const ConvexBody& domain,
                                         const ConvexBody& loss_body,
                                         double alpha, int n,
                                         std::uint64_t seed,
                                         double tol = 1e-7);

struct McEstimate {
  double mean = 0;
  double std_error = 0;
  int n = 0;
};

// E f0(x + sigma Z), Z standard normal, estimated by Monte Carlo.
McEstimate gaussian_smooth_mc(const std::function<double(const Vector&)>& f0,
                              const SmoothingProbe& probe, const Vector& x);

struct SmoothedConvexityReport {
  ConvexityReport inner;
  double max_std_error = 0;
  bool passed = false;  // min slack >= -3 * max_std_error
};

// Certifies that Gaussian smoothing preserves the strong-convexity modulus.
// Uses one shared set of Gaussian draws for every evaluation point so the
// smoothed function is deterministic and the modulus is not drowned in noise.
SmoothedConvexityReport smoothing_preserves_convexity_check(
    const FunctionView& f0, const SmoothingProbe& probe,
    const ConvexBody& domain, const ConvexBody& loss_body, double alpha,
    int n);

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f,
                            const Vector& x, double h);
Matrix finite_diff_hessian(const std::function<double(const Vector&)>& f,
                           const Vector& x, double h);

struct DerivativeBounds {
  double grad_bound = 0;  // max |directional gradient|
  double hess_bound = 0;  // max Hessian operator norm
  double hess_lip = 0;    // Hessian Lipschitz constant
};

struct DerivativeAudit {
  double max_dir_grad = 0;
  double max_hess_norm = 0;
  double max_hess_lip_ratio = 0;
  bool grad_ok = false, hess_ok = false, lip_ok = false;
  int samples = 0;
};

DerivativeAudit derivative_bound_audit(const FunctionView& f,
                                       const ConvexBody& domain,
                                       const DerivativeBounds& bounds, int n,
                                       std::uint64_t seed);

// Uniform draw from the body by rejection from its bounding box; throws
// ResourceError when acceptance starves.
Vector sample_body_uniform(const ConvexBody& body, Rng& rng);

}  // namespace olo
