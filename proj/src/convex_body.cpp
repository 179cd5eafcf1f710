#include "olo/convex_body.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <functional>
#include <map>
#include <sstream>

#include "olo/simplex_lp.hpp"

namespace olo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lp_norm(const Vector& v, double p) {
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  return std::pow(v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

double conjugate_exponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

int first_abs_argmax(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

// Vertices of {y : M y <= o} by enumerating d-subsets of active rows.
// Intended for d <= 3; `ok` is set false when the subset count is too large.
std::vector<Vector> enumerate_poly_vertices(const Matrix& M, const Vector& o,
                                            bool* ok) {
  const int m = static_cast<int>(M.rows());
  const int d = static_cast<int>(M.cols());
  *ok = true;
  double subsets = 1.0;
  for (int i = 0; i < d; ++i) subsets *= static_cast<double>(m - i) / (i + 1);
  if (d > 3 || subsets > 2e6) {
    *ok = false;
    return {};
  }
  std::vector<Vector> verts;
  std::vector<int> idx(d);
  const double scale = std::max(1.0, o.cwiseAbs().maxCoeff());
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == d) {
      Matrix A(d, d);
      Vector b(d);
      for (int i = 0; i < d; ++i) {
        A.row(i) = M.row(idx[i]);
        b[i] = o[idx[i]];
      }
      Eigen::FullPivLU<Matrix> lu(A);
      if (lu.rank() < d) return;
      Vector y = lu.solve(b);
      if (((M * y - o).array() <= 1e-9 * scale).all()) {
        for (const Vector& w : verts)
          if ((w - y).cwiseAbs().maxCoeff() < 1e-9 * scale) return;
        verts.push_back(y);
      }
      return;
    }
    for (int k = start; k < m; ++k) {
      idx[depth] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return verts;
}

}  // namespace

std::string body_kind_name(BodyKind kind) {
  switch (kind) {
    case BodyKind::kEuclideanBall: return "euclidean-ball";
    case BodyKind::kLpBall: return "lp-ball";
    case BodyKind::kBox: return "box";
    case BodyKind::kEllipsoid: return "ellipsoid";
    case BodyKind::kPolytopeV: return "polytope-v";
    case BodyKind::kPolytopeH: return "polytope-h";
    case BodyKind::kSimplex: return "simplex";
  }
  return "?";
}

ConvexBody ConvexBody::euclidean_ball(int dim, double radius) {
  if (dim < 1) throw ValidationError("ball: dim must be >= 1");
  if (!(radius > 0) || !std::isfinite(radius))
    throw ValidationError("ball: radius must be positive and finite");
  ConvexBody b;
  b.kind_ = BodyKind::kEuclideanBall;
  b.dim_ = dim;
  b.radius_ = radius;
  b.finalize_radii();
  return b;
}

ConvexBody ConvexBody::lp_ball(int dim, double p, double radius) {
  if (dim < 1) throw ValidationError("lp-ball: dim must be >= 1");
  if (!(p >= 1.0)) throw ValidationError("lp-ball: exponent must be >= 1");
  if (!(radius > 0) || !std::isfinite(radius))
    throw ValidationError("lp-ball: radius must be positive and finite");
  ConvexBody b;
  b.kind_ = BodyKind::kLpBall;
  b.dim_ = dim;
  b.p_ = p;
  b.radius_ = radius;
  b.finalize_radii();
  return b;
}

ConvexBody ConvexBody::box(const Vector& halfwidths, const Vector& center) {
  const int d = static_cast<int>(halfwidths.size());
  if (d < 1) throw ValidationError("box: need at least one halfwidth");
  if (!(halfwidths.minCoeff() > 0))
    throw ValidationError("box: halfwidths must be positive");
  ConvexBody b;
  b.kind_ = BodyKind::kBox;
  b.dim_ = d;
  b.halfwidths_ = halfwidths;
  if (center.size() == 0) {
    b.center_ = Vector::Zero(d);
  } else if (center.size() == d) {
    b.center_ = center;
  } else {
    throw ValidationError("box: center/halfwidth size mismatch");
  }
  b.symmetric_ = b.center_.cwiseAbs().maxCoeff() == 0.0;
  b.finalize_radii();
  return b;
}

ConvexBody ConvexBody::ellipsoid(const Matrix& shape) {
  const int d = static_cast<int>(shape.rows());
  if (d < 1 || shape.cols() != d)
    throw ValidationError("ellipsoid: shape matrix must be square");
  Matrix s = 0.5 * (shape + shape.transpose());
  if ((s - shape).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, shape.cwiseAbs().maxCoeff()))
    throw ValidationError("ellipsoid: shape matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success)
    throw NumericError("ellipsoid: eigen decomposition failed");
  if (!(es.eigenvalues().minCoeff() > 0))
    throw ValidationError("ellipsoid: shape matrix must be positive definite");
  ConvexBody b;
  b.kind_ = BodyKind::kEllipsoid;
  b.dim_ = d;
  b.shape_ = s;
  b.shape_inv_ = es.operatorInverseSqrt() * es.operatorInverseSqrt();
  b.inner_radius_ = std::sqrt(es.eigenvalues().minCoeff());
  b.outer_radius_ = std::sqrt(es.eigenvalues().maxCoeff());
  return b;
}

ConvexBody ConvexBody::polytope_v(std::vector<Vector> vertices) {
  if (vertices.empty()) throw ValidationError("polytope-v: no vertices");
  const int d = static_cast<int>(vertices.front().size());
  if (d < 1) throw ValidationError("polytope-v: zero-dimensional vertices");
  Matrix stacked(static_cast<int>(vertices.size()), d);
  double scale = 1.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].size() != d)
      throw ValidationError("polytope-v: inconsistent vertex dimensions");
    stacked.row(static_cast<int>(i)) = vertices[i].transpose();
    scale = std::max(scale, vertices[i].cwiseAbs().maxCoeff());
  }
  for (const Vector& v : vertices) {
    bool has_negation = false;
    for (const Vector& w : vertices)
      if ((w + v).cwiseAbs().maxCoeff() <= 1e-9 * scale) {
        has_negation = true;
        break;
      }
    if (!has_negation)
      throw ValidationError(
          "polytope-v: vertex list must be closed under negation");
  }
  Eigen::FullPivLU<Matrix> lu(stacked);
  if (lu.rank() < d)
    throw ValidationError("polytope-v: vertices must span the space");
  ConvexBody b;
  b.kind_ = BodyKind::kPolytopeV;
  b.dim_ = d;
  b.vertices_ = std::move(vertices);
  b.finalize_radii();
  return b;
}

ConvexBody ConvexBody::polytope_h(const Matrix& normals, const Vector& offsets) {
  const int m = static_cast<int>(normals.rows());
  const int d = static_cast<int>(normals.cols());
  if (m < 2 || d < 1) throw ValidationError("polytope-h: need constraints");
  if (offsets.size() != m)
    throw ValidationError("polytope-h: normals/offsets size mismatch");
  if (!(offsets.minCoeff() > 0))
    throw ValidationError(
        "polytope-h: offsets must be positive (origin interior)");
  const double scale = std::max(1.0, normals.cwiseAbs().maxCoeff());
  for (int i = 0; i < m; ++i) {
    if (normals.row(i).cwiseAbs().maxCoeff() <= 0)
      throw ValidationError("polytope-h: zero normal row");
    bool has_negation = false;
    for (int j = 0; j < m; ++j)
      if ((normals.row(j) + normals.row(i)).cwiseAbs().maxCoeff() <=
              1e-9 * scale &&
          std::abs(offsets[j] - offsets[i]) <= 1e-9 * std::abs(offsets[i]))
        has_negation = true;
    if (!has_negation)
      throw ValidationError(
          "polytope-h: constraint list must be closed under negation");
  }
  ConvexBody b;
  b.kind_ = BodyKind::kPolytopeH;
  b.dim_ = d;
  b.normals_ = normals;
  b.offsets_ = offsets;
  b.finalize_radii();  // also certifies boundedness
  return b;
}

ConvexBody ConvexBody::simplex(int dim) {
  if (dim < 1) throw ValidationError("simplex: dim must be >= 1");
  ConvexBody b;
  b.kind_ = BodyKind::kSimplex;
  b.dim_ = dim;
  b.symmetric_ = false;
  b.inner_radius_ = 0.0;  // about the origin; the simplex does not contain it
  b.outer_radius_ = 1.0;
  return b;
}

ConvexBody ConvexBody::scaled(double factor) const {
  if (!(factor > 0)) throw ValidationError("scaled: factor must be > 0");
  switch (kind_) {
    case BodyKind::kEuclideanBall:
      return euclidean_ball(dim_, radius_ * factor);
    case BodyKind::kLpBall:
      return lp_ball(dim_, p_, radius_ * factor);
    case BodyKind::kBox:
      return box(halfwidths_ * factor, center_.size() ? Vector(center_ * factor)
                                                      : Vector());
    case BodyKind::kEllipsoid:
      return ellipsoid(shape_ / (factor * factor));
    case BodyKind::kPolytopeV: {
      std::vector<Vector> verts = vertices_;
      for (Vector& v : verts) v *= factor;
      return polytope_v(std::move(verts));
    }
    case BodyKind::kPolytopeH:
      return polytope_h(normals_, offsets_ * factor);
    case BodyKind::kSimplex: {
      // Scaling about the origin turns the simplex into an explicit polytope.
      std::vector<Vector> verts;
      for (int k = 0; k < dim_; ++k) {
        Vector v = Vector::Zero(dim_);
        v[k] = factor;
        verts.push_back(std::move(v));
      }
      return polytope_v(std::move(verts));
    }
  }
  throw NumericError("scaled: unhandled body kind");
}

void ConvexBody::finalize_radii() {
  switch (kind_) {
    case BodyKind::kEuclideanBall:
      inner_radius_ = outer_radius_ = radius_;
      return;
    case BodyKind::kLpBall: {
      // d^(1/2 - 1/p) interpolates between the cross-polytope and the cube.
      const double f = std::isinf(p_)
                           ? std::sqrt(static_cast<double>(dim_))
                           : std::pow(static_cast<double>(dim_), 0.5 - 1.0 / p_);
      inner_radius_ = radius_ * std::min(1.0, f);
      outer_radius_ = radius_ * std::max(1.0, f);
      return;
    }
    case BodyKind::kBox:
      if (symmetric_) {
        inner_radius_ = halfwidths_.minCoeff();
      } else {
        inner_radius_ =
            std::max(0.0, (halfwidths_ - center_.cwiseAbs()).minCoeff());
      }
      outer_radius_ = (halfwidths_ + center_.cwiseAbs()).norm();
      return;
    case BodyKind::kEllipsoid:
    case BodyKind::kSimplex:
      return;  // set at construction
    case BodyKind::kPolytopeV: {
      outer_radius_ = 0.0;
      for (const Vector& v : vertices_)
        outer_radius_ = std::max(outer_radius_, v.norm());
      // Inscribed radius = 1 / (farthest vertex of the polar body).
      Matrix M(static_cast<int>(vertices_.size()), dim_);
      for (std::size_t i = 0; i < vertices_.size(); ++i)
        M.row(static_cast<int>(i)) = vertices_[i].transpose();
      bool ok = false;
      auto polar_verts =
          enumerate_poly_vertices(M, Vector::Ones(M.rows()), &ok);
      if (ok && !polar_verts.empty()) {
        double far = 0.0;
        for (const Vector& y : polar_verts) far = std::max(far, y.norm());
        inner_radius_ = 1.0 / far;
      } else {
        // High-dimensional fallback: certified lower bound from a sphere
        // cover (support is outer_radius-Lipschitz on the sphere).
        radii_exact_ = false;
        const double eps = 0.05;
        SphereCover cover = SphereCover::build(dim_, eps);
        double lo = kInf;
        for (const Vector& u : cover.points()) {
          double h = -kInf;
          for (const Vector& v : vertices_) h = std::max(h, u.dot(v));
          lo = std::min(lo, h);
        }
        inner_radius_ = std::max(0.0, lo - outer_radius_ * eps);
      }
      return;
    }
    case BodyKind::kPolytopeH: {
      inner_radius_ = kInf;
      for (int i = 0; i < normals_.rows(); ++i)
        inner_radius_ =
            std::min(inner_radius_, offsets_[i] / normals_.row(i).norm());
      // Certified per-axis supports (also proves boundedness): the dual of
      // max e_k.x s.t. A x <= b is a standard-form LP.
      Vector axis_sup(dim_);
      for (int k = 0; k < dim_; ++k) {
        StandardFormLp sf(Vector::Unit(dim_, k));
        for (int i = 0; i < normals_.rows(); ++i)
          sf.add_column(normals_.row(i).transpose(), offsets_[i]);
        auto sol = sf.solve();
        if (sol.status != LpStatus::kOptimal)
          throw ValidationError("polytope-h: body is unbounded along axis " +
                                std::to_string(k));
        axis_sup[k] = sol.objective;
      }
      bool ok = false;
      auto verts = enumerate_poly_vertices(normals_, offsets_, &ok);
      if (ok && !verts.empty()) {
        outer_radius_ = 0.0;
        for (const Vector& v : verts)
          outer_radius_ = std::max(outer_radius_, v.norm());
      } else {
        radii_exact_ = false;
        outer_radius_ = axis_sup.norm();  // box bound, certified upper
      }
      return;
    }
  }
}

Vector ConvexBody::interior_point() const {
  if (kind_ == BodyKind::kSimplex)
    return Vector::Constant(dim_, 1.0 / dim_);
  if (kind_ == BodyKind::kBox) return center_;
  return Vector::Zero(dim_);
}

double ConvexBody::gauge(const Vector& v) const {
  if (!symmetric_)
    throw ValidationError("gauge is defined for symmetric bodies only (got " +
                          body_kind_name(kind_) + ")");
  if (v.size() != dim_) throw ValidationError("gauge: dimension mismatch");
  switch (kind_) {
    case BodyKind::kEuclideanBall:
      return v.norm() / radius_;
    case BodyKind::kLpBall:
      return lp_norm(v, p_) / radius_;
    case BodyKind::kBox:
      return (v.cwiseAbs().cwiseQuotient(halfwidths_)).maxCoeff();
    case BodyKind::kEllipsoid:
      return std::sqrt(std::max(0.0, v.dot(shape_inv_ * v)));
    case BodyKind::kPolytopeH: {
      double g = 0.0;
      for (int i = 0; i < normals_.rows(); ++i)
        g = std::max(g, normals_.row(i).dot(v) / offsets_[i]);
      return g;
    }
    case BodyKind::kPolytopeV: {
      if (v.cwiseAbs().maxCoeff() == 0.0) return 0.0;
      // gauge = min 1.lambda s.t. V^T lambda = v, lambda >= 0.
      StandardFormLp sf(v);
      for (const Vector& w : vertices_)
        sf.add_column(w, 1.0);
      auto sol = sf.solve();
      if (sol.status != LpStatus::kOptimal)
        throw NumericError("polytope-v gauge LP failed");
      return sol.objective;
    }
    default:
      throw ValidationError("gauge: unsupported body kind");
  }
}

Vector ConvexBody::gauge_subgradient(const Vector& v) const {
  if (!symmetric_)
    throw ValidationError("gauge subgradient: symmetric bodies only");
  if (v.cwiseAbs().maxCoeff() == 0.0)
    throw ValidationError("gauge subgradient undefined at the origin");
  switch (kind_) {
    case BodyKind::kEuclideanBall:
      return v / (radius_ * v.norm());
    case BodyKind::kLpBall: {
      Vector g(dim_);
      if (p_ == 1.0) {
        for (int i = 0; i < dim_; ++i)
          g[i] = (v[i] > 0) - (v[i] < 0);
      } else if (std::isinf(p_)) {
        g.setZero();
        const int k = first_abs_argmax(v);
        g[k] = (v[k] > 0) ? 1.0 : -1.0;
      } else {
        const double n = lp_norm(v, p_);
        for (int i = 0; i < dim_; ++i) {
          const double t = std::pow(std::abs(v[i]) / n, p_ - 1.0);
          g[i] = (v[i] >= 0 ? t : -t);
        }
      }
      return g / radius_;
    }
    case BodyKind::kBox: {
      const int k = first_abs_argmax(v.cwiseQuotient(halfwidths_));
      Vector g = Vector::Zero(dim_);
      g[k] = ((v[k] >= 0) ? 1.0 : -1.0) / halfwidths_[k];
      return g;
    }
    case BodyKind::kEllipsoid: {
      const double gg = gauge(v);
      return shape_inv_ * v / gg;
    }
    case BodyKind::kPolytopeH: {
      int best = 0;
      double bestval = -kInf;
      for (int i = 0; i < normals_.rows(); ++i) {
        const double r = normals_.row(i).dot(v) / offsets_[i];
        if (r > bestval) {
          bestval = r;
          best = i;
        }
      }
      return normals_.row(best).transpose() / offsets_[best];
    }
    case BodyKind::kPolytopeV: {
      // Row duals of the gauge LP support the gauge from below.
      StandardFormLp sf(v);
      for (const Vector& w : vertices_) sf.add_column(w, 1.0);
      auto sol = sf.solve();
      if (sol.status != LpStatus::kOptimal)
        throw NumericError("polytope-v gauge LP failed");
      return sol.row_dual;
    }
    default:
      throw ValidationError("gauge subgradient: unsupported body kind");
  }
}

bool ConvexBody::contains(const Vector& y, double delta) const {
  if (y.size() != dim_) throw ValidationError("membership: dimension mismatch");
  switch (kind_) {
    case BodyKind::kSimplex:
      return y.minCoeff() >= -delta &&
             std::abs(y.sum() - 1.0) <= delta * std::sqrt(double(dim_));
    case BodyKind::kBox:
      if (!symmetric_)
        return ((y - center_).cwiseAbs() - halfwidths_).maxCoeff() <= delta;
      [[fallthrough]];
    default:
      return gauge(y) <= 1.0 + delta / outer_radius_;
  }
}

Vector ConvexBody::linear_minimize(const Vector& c, double delta) const {
  if (c.size() != dim_)
    throw ValidationError("linear_minimize: dimension mismatch");
  if (c.cwiseAbs().maxCoeff() == 0.0) return interior_point();
  switch (kind_) {
    case BodyKind::kEuclideanBall:
      return -radius_ * c / c.norm();
    case BodyKind::kLpBall: {
      Vector x(dim_);
      if (p_ == 1.0) {
        x.setZero();
        const int k = first_abs_argmax(c);
        x[k] = -radius_ * ((c[k] > 0) ? 1.0 : -1.0);
      } else if (std::isinf(p_)) {
        for (int i = 0; i < dim_; ++i)
          x[i] = c[i] > 0 ? -radius_ : (c[i] < 0 ? radius_ : 0.0);
      } else {
        const double q = conjugate_exponent(p_);
        const double nq = lp_norm(c, q);
        for (int i = 0; i < dim_; ++i) {
          const double t = std::pow(std::abs(c[i]) / nq, q - 1.0);
          x[i] = -radius_ * (c[i] >= 0 ? t : -t);
        }
      }
      return x;
    }
    case BodyKind::kBox: {
      Vector x = center_;
      for (int i = 0; i < dim_; ++i) {
        if (c[i] > 0)
          x[i] -= halfwidths_[i];
        else if (c[i] < 0)
          x[i] += halfwidths_[i];
      }
      return x;
    }
    case BodyKind::kEllipsoid: {
      const Vector sc = shape_ * c;
      return -sc / std::sqrt(c.dot(sc));
    }
    case BodyKind::kPolytopeV: {
      int best = 0;
      double bestval = kInf;
      for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const double val = c.dot(vertices_[i]);
        if (val < bestval) {
          bestval = val;
          best = static_cast<int>(i);
        }
      }
      return vertices_[best];
    }
    case BodyKind::kPolytopeH: {
      // Optimal point = row duals of the dual standard form
      //   min b.w  s.t.  A^T w = -c, w >= 0.
      (void)delta;
      StandardFormLp sf(Vector(-c));
      for (int i = 0; i < normals_.rows(); ++i)
        sf.add_column(normals_.row(i).transpose(), offsets_[i]);
      auto sol = sf.solve();
      if (sol.status != LpStatus::kOptimal)
        throw NumericError("polytope-h linear minimization LP failed");
      return sol.row_dual;
    }
    case BodyKind::kSimplex: {
      int best = 0;
      for (int i = 1; i < dim_; ++i)
        if (c[i] < c[best]) best = i;
      return Vector::Unit(dim_, best);
    }
  }
  throw ValidationError("linear_minimize: unsupported body kind");
}

double ConvexBody::support(const Vector& v, double delta) const {
  if (v.size() != dim_) throw ValidationError("support: dimension mismatch");
  switch (kind_) {
    case BodyKind::kEuclideanBall:
      return radius_ * v.norm();
    case BodyKind::kLpBall:
      return radius_ * lp_norm(v, conjugate_exponent(p_));
    case BodyKind::kBox:
      return center_.dot(v) + halfwidths_.dot(v.cwiseAbs());
    case BodyKind::kEllipsoid:
      return std::sqrt(std::max(0.0, v.dot(shape_ * v)));
    case BodyKind::kPolytopeV: {
      double s = -kInf;
      for (const Vector& w : vertices_) s = std::max(s, v.dot(w));
      return s;
    }
    case BodyKind::kSimplex:
      return v.maxCoeff();
    case BodyKind::kPolytopeH:
      return v.dot(linear_minimize(-v, delta));
  }
  throw ValidationError("support: unsupported body kind");
}

double ConvexBody::dual_gauge(const Vector& v, double delta) const {
  if (!symmetric_)
    throw ValidationError("dual gauge is defined for symmetric bodies only");
  return support(v, delta);
}

std::optional<Vector> ConvexBody::separate(const Vector& y,
                                           double delta) const {
  if (y.size() != dim_)
    throw ValidationError("separation: dimension mismatch");
  if (kind_ == BodyKind::kSimplex || !symmetric_) {
    // Projection-based normal for the asymmetric kinds.
    Vector p(dim_);
    if (kind_ == BodyKind::kSimplex) {
      // Euclidean projection onto the simplex (sort-based).
      std::vector<double> u(y.data(), y.data() + dim_);
      std::sort(u.begin(), u.end(), std::greater<double>());
      double css = 0.0, tau = 0.0;
      int k = 0;
      for (int i = 0; i < dim_; ++i) {
        css += u[i];
        const double t = (css - 1.0) / (i + 1);
        if (u[i] - t > 0) {
          tau = t;
          k = i + 1;
        }
      }
      (void)k;
      for (int i = 0; i < dim_; ++i) p[i] = std::max(y[i] - tau, 0.0);
    } else {  // shifted box
      p = y.cwiseMax(center_ - halfwidths_).cwiseMin(center_ + halfwidths_);
    }
    const double dist = (y - p).norm();
    if (dist <= delta) return std::nullopt;
    return Vector(-(y - p) / dist);
  }
  const double g = gauge(y);
  if (g <= 1.0 + delta / outer_radius_) return std::nullopt;
  Vector s = gauge_subgradient(y);
  return Vector(-s / s.norm());
}

double ConvexBody::radius() const {
  if (kind_ != BodyKind::kEuclideanBall && kind_ != BodyKind::kLpBall)
    throw ValidationError("radius: not a ball");
  return radius_;
}

double ConvexBody::lp_exponent() const {
  if (kind_ != BodyKind::kLpBall) throw ValidationError("not an lp ball");
  return p_;
}

const Vector& ConvexBody::halfwidths() const {
  if (kind_ != BodyKind::kBox) throw ValidationError("not a box");
  return halfwidths_;
}

const Vector& ConvexBody::center() const {
  if (kind_ != BodyKind::kBox) throw ValidationError("not a box");
  return center_;
}

const Matrix& ConvexBody::shape() const {
  if (kind_ != BodyKind::kEllipsoid) throw ValidationError("not an ellipsoid");
  return shape_;
}

const std::vector<Vector>& ConvexBody::vertices() const {
  if (kind_ != BodyKind::kPolytopeV) throw ValidationError("not a V-polytope");
  return vertices_;
}

const Matrix& ConvexBody::normals() const {
  if (kind_ != BodyKind::kPolytopeH) throw ValidationError("not an H-polytope");
  return normals_;
}

const Vector& ConvexBody::offsets() const {
  if (kind_ != BodyKind::kPolytopeH) throw ValidationError("not an H-polytope");
  return offsets_;
}

double gauge_by_bisection(const ConvexBody& body, const Vector& v,
                          int iterations) {
  if (v.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  double lo = v.norm() / body.outer_radius();
  double hi = v.norm() / body.inner_radius();
  // Guard the bracket (approximate radii could, in principle, miss).
  while (!body.contains(v / hi, 1e-12) && hi < 1e12) hi *= 2;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (body.contains(v / mid, 1e-15))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

SphereCover SphereCover::build(int dim, double eps, std::size_t point_budget) {
  if (dim < 1) throw ValidationError("sphere cover: dim must be >= 1");
  if (!(eps > 0)) throw ValidationError("sphere cover: eps must be positive");
  SphereCover cover;
  cover.dim_ = dim;
  cover.eps_ = eps;
  if (dim == 1) {
    cover.points_.push_back(Vector::Constant(1, 1.0));
    cover.points_.push_back(Vector::Constant(1, -1.0));
    return cover;
  }
  // Cube-surface lattice with spacing 2*eps/sqrt(dim); after radial
  // normalization the covering radius is eps * sqrt((dim-1)/dim) < eps.
  const double spacing = 2.0 * eps / std::sqrt(static_cast<double>(dim));
  const int per_axis =
      std::max(2, static_cast<int>(std::ceil(2.0 / spacing)) + 1);
  const double estimate =
      2.0 * dim * std::pow(static_cast<double>(per_axis), dim - 1);
  if (estimate > static_cast<double>(point_budget)) {
    std::ostringstream msg;
    msg << "sphere cover: estimated " << estimate << " points for dim=" << dim
        << " eps=" << eps << " exceeds budget " << point_budget;
    throw ResourceError(msg.str());
  }
  std::map<std::vector<long long>, bool> seen;
  std::vector<int> odo(dim - 1, 0);
  auto axis_value = [&](int k) {
    return -1.0 + 2.0 * k / (per_axis - 1);
  };
  for (int face_axis = 0; face_axis < dim; ++face_axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      std::fill(odo.begin(), odo.end(), 0);
      while (true) {
        Vector x(dim);
        x[face_axis] = sign;
        int j = 0;
        for (int i = 0; i < dim; ++i)
          if (i != face_axis) x[i] = axis_value(odo[j++]);
        x /= x.norm();
        std::vector<long long> key(dim);
        for (int i = 0; i < dim; ++i) key[i] = llround(x[i] * 1e12);
        if (!seen.count(key)) {
          seen[key] = true;
          cover.points_.push_back(x);
        }
        int carry = 0;
        while (carry < dim - 1 && ++odo[carry] == per_axis)
          odo[carry++] = 0;
        if (carry == dim - 1) break;
      }
    }
  }
  return cover;
}

double SphereCover::audit_covering_radius(int n, Rng& rng) const {
  std::normal_distribution<double> N(0.0, 1.0);
  Matrix pts(static_cast<int>(points_.size()), dim_);
  for (std::size_t i = 0; i < points_.size(); ++i)
    pts.row(static_cast<int>(i)) = points_[i].transpose();
  double worst = 0.0;
  for (int t = 0; t < n; ++t) {
    Vector u(dim_);
    do {
      for (int i = 0; i < dim_; ++i) u[i] = N(rng);
    } while (u.norm() < 1e-12);
    u /= u.norm();
    const double maxdot = (pts * u).maxCoeff();
    worst = std::max(worst, std::sqrt(std::max(0.0, 2.0 - 2.0 * maxdot)));
  }
  return worst;
}

}  // namespace olo
