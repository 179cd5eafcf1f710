#include "olo/verify.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace olo {

namespace {

Vector random_unit(int d, Rng& rng) {
  std::normal_distribution<double> N(0, 1);
  Vector u(d);
  do {
    for (int i = 0; i < d; ++i) u[i] = N(rng);
  } while (u.norm() < 1e-12);
  return u / u.norm();
}

}  // namespace

Vector sample_body_uniform(const ConvexBody& body, Rng& rng) {
  const int d = body.dim();
  if (body.kind() == BodyKind::kSimplex) {
    // The body is a facet of the box (measure zero there); draw uniformly
    // via normalized exponential spacings instead.
    std::exponential_distribution<double> E(1.0);
    Vector y(d);
    for (int i = 0; i < d; ++i) y[i] = E(rng);
    return y / y.sum();
  }
  Vector lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    Vector e = Vector::Unit(d, i);
    hi[i] = body.support(e);
    lo[i] = -body.support(-e);
  }
  std::uniform_real_distribution<double> U(0, 1);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vector y(d);
    for (int i = 0; i < d; ++i) y[i] = lo[i] + (hi[i] - lo[i]) * U(rng);
    if (body.contains(y)) return y;
  }
  throw ResourceError("rejection sampling starved on " +
                      body_kind_name(body.kind()));
}

ConvexityReport strong_convexity_sampled(const FunctionView& f,
                                         const ConvexBody& domain,
                                         const ConvexBody& loss_body,
                                         double alpha, int n,
                                         std::uint64_t seed, double tol) {
  if (n < 1) throw ValidationError("strong_convexity_sampled: n must be >= 1");
  Rng rng(seed);
  ConvexityReport rep;
  rep.samples = n;
  rep.tol = tol;
  rep.min_pair_slack = rep.min_curvature_slack = 1e300;
  const double t = 1e-3;
  for (int k = 0; k < n; ++k) {
    // Subgradient inequality with the (alpha/2) gauge-squared term.
    const Vector x = sample_body_uniform(domain, rng);
    const Vector y = sample_body_uniform(domain, rng);
    const Vector gx = f.gradient(x);
    const double s = loss_body.dual_gauge(y - x);
    const double slack =
        f.value(y) - f.value(x) - gx.dot(y - x) - 0.5 * alpha * s * s;
    if (slack < rep.min_pair_slack) {
      rep.min_pair_slack = slack;
      rep.worst_pair_x = x;
      rep.worst_pair_y = y;
    }
    // Directional second difference vs alpha times the gauge squared.
    const Vector xc = sample_body_uniform(domain, rng);
    const Vector v = random_unit(domain.dim(), rng);
    const double second =
        (f.value(xc + t * v) - 2 * f.value(xc) + f.value(xc - t * v)) /
        (t * t);
    const double sv = loss_body.dual_gauge(v);
    const double cslack = second - alpha * sv * sv;
    if (cslack < rep.min_curvature_slack) {
      rep.min_curvature_slack = cslack;
      rep.worst_curve_x = xc;
      rep.worst_curve_v = v;
    }
  }
  return rep;
}

McEstimate gaussian_smooth_mc(const std::function<double(const Vector&)>& f0,
                              const SmoothingProbe& probe, const Vector& x) {
  if (!(probe.sigma > 0))
    throw ValidationError("smoothing probe: sigma must be > 0");
  if (probe.n < 1) throw ValidationError("smoothing probe: n must be >= 1");
  Rng rng(probe.seed);
  std::normal_distribution<double> N(0, 1);
  double sum = 0, sumsq = 0;
  Vector z(x.size());
  for (int k = 0; k < probe.n; ++k) {
    for (Eigen::Index i = 0; i < x.size(); ++i) z[i] = N(rng);
    const double val = f0(x + probe.sigma * z);
    sum += val;
    sumsq += val * val;
  }
  McEstimate est;
  est.n = probe.n;
  est.mean = sum / probe.n;
  const double var =
      std::max(0.0, sumsq / probe.n - est.mean * est.mean);
  est.std_error = std::sqrt(var / probe.n);
  return est;
}

SmoothedConvexityReport smoothing_preserves_convexity_check(
    const FunctionView& f0, const SmoothingProbe& probe,
    const ConvexBody& domain, const ConvexBody& loss_body, double alpha,
    int n) {
  if (!(probe.sigma > 0))
    throw ValidationError("smoothing probe: sigma must be > 0");
  if (probe.n < 1) throw ValidationError("smoothing probe: n must be >= 1");
  // Freeze one noise panel; the smoothed surrogate becomes deterministic and
  // inherits the modulus of every shifted copy of f0.
  Rng rng(probe.seed);
  std::normal_distribution<double> N(0, 1);
  std::vector<Vector> zs(probe.n);
  for (int k = 0; k < probe.n; ++k) {
    zs[k] = Vector(domain.dim());
    for (int i = 0; i < domain.dim(); ++i) zs[k][i] = N(rng);
  }
  FunctionView smooth;
  smooth.value = [&f0, &zs, &probe](const Vector& x) {
    double sum = 0;
    for (const Vector& z : zs) sum += f0.value(x + probe.sigma * z);
    return sum / static_cast<double>(zs.size());
  };
  smooth.gradient = [&f0, &zs, &probe](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    for (const Vector& z : zs) g += f0.gradient(x + probe.sigma * z);
    return (g / static_cast<double>(zs.size())).eval();
  };

  SmoothedConvexityReport out;
  out.inner = strong_convexity_sampled(smooth, domain, loss_body, alpha, n,
                                       probe.seed + 1, 0.0);
  // Scale of residual Monte-Carlo noise at representative points.
  Rng prng(probe.seed + 2);
  for (int k = 0; k < 8; ++k) {
    SmoothingProbe p2 = probe;
    p2.seed = probe.seed;
    const McEstimate est =
        gaussian_smooth_mc(f0.value, p2, sample_body_uniform(domain, prng));
    out.max_std_error = std::max(out.max_std_error, est.std_error);
  }
  const double floor = -3.0 * out.max_std_error - 1e-7;
  out.passed = out.inner.min_pair_slack >= floor &&
               out.inner.min_curvature_slack >= floor;
  return out;
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f,
                            const Vector& x, double h) {
  if (!(h > 0)) throw ValidationError("finite_diff: h must be > 0");
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector e = Vector::Unit(x.size(), i) * h;
    g[i] = (f(x + e) - f(x - e)) / (2 * h);
  }
  return g;
}

Matrix finite_diff_hessian(const std::function<double(const Vector&)>& f,
                           const Vector& x, double h) {
  if (!(h > 0)) throw ValidationError("finite_diff: h must be > 0");
  const Eigen::Index d = x.size();
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) {
      Vector ei = Vector::Unit(d, i) * h, ej = Vector::Unit(d, j) * h;
      m(i, j) = m(j, i) = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) +
                           f(x - ei - ej)) /
                          (4 * h * h);
    }
  return m;
}

DerivativeAudit derivative_bound_audit(const FunctionView& f,
                                       const ConvexBody& domain,
                                       const DerivativeBounds& bounds, int n,
                                       std::uint64_t seed) {
  Rng rng(seed);
  DerivativeAudit audit;
  audit.samples = n;
  const double h = 1e-4;
  Vector prev_x;
  Matrix prev_h;
  for (int k = 0; k < n; ++k) {
    const Vector x = sample_body_uniform(domain, rng);
    const Vector v = random_unit(domain.dim(), rng);
    audit.max_dir_grad =
        std::max(audit.max_dir_grad, std::abs(f.gradient(x).dot(v)));
    const Matrix hess = finite_diff_hessian(f.value, x, h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
    audit.max_hess_norm = std::max(
        audit.max_hess_norm, es.eigenvalues().cwiseAbs().maxCoeff());
    if (k > 0) {
      const double dist = (x - prev_x).norm();
      if (dist > 1e-6) {
        Eigen::SelfAdjointEigenSolver<Matrix> ed(hess - prev_h);
        audit.max_hess_lip_ratio =
            std::max(audit.max_hess_lip_ratio,
                     ed.eigenvalues().cwiseAbs().maxCoeff() / dist);
      }
    }
    prev_x = x;
    prev_h = hess;
  }
  const double fd_slop = 1e-3;
  audit.grad_ok = audit.max_dir_grad <= bounds.grad_bound + fd_slop;
  audit.hess_ok = audit.max_hess_norm <= bounds.hess_bound + fd_slop;
  audit.lip_ok = audit.max_hess_lip_ratio <= bounds.hess_lip + fd_slop;
  return audit;
}

}  // namespace olo
