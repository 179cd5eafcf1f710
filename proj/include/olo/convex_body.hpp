// Convex body oracles: membership, linear minimization, support, gauge
// (Minkowski functional), dual gauge, separating normals, inscribed and
// circumscribed radii, and sphere covers.
//
// Supported kinds: Euclidean ball, lp ball, axis box (optionally shifted),
// ellipsoid, V-polytope, H-polytope, probability simplex.  All kinds except
// the simplex and shifted boxes are origin-symmetric; gauge and dual gauge
// are defined only for symmetric bodies (the synthesis path rejects
// asymmetric bodies, the FTRL runner accepts them as action sets).
//
// Oracle tolerance convention: a query tolerance `delta` describes the
// Euclidean shell within which either answer is acceptable.  Membership
// returns true on the exact boundary.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "olo/types.hpp"

namespace olo {

enum class BodyKind {
  kEuclideanBall,
  kLpBall,
  kBox,
  kEllipsoid,
  kPolytopeV,
  kPolytopeH,
  kSimplex,
};

std::string body_kind_name(BodyKind kind);

class ConvexBody {
 public:
  static ConvexBody euclidean_ball(int dim, double radius);
  // p in [1, inf]; pass std::numeric_limits<double>::infinity() for the cube.
  static ConvexBody lp_ball(int dim, double p, double radius);
  // {x : |x_i - center_i| <= halfwidth_i}; empty center means origin.
  static ConvexBody box(const Vector& halfwidths, const Vector& center = {});
  // {x : x^T shape^{-1} x <= 1}, shape symmetric positive definite.
  static ConvexBody ellipsoid(const Matrix& shape);
  // Convex hull of vertices; list must be closed under negation and span.
  static ConvexBody polytope_v(std::vector<Vector> vertices);
  // {x : normals.row(i) . x <= offsets_i}; rows closed under negation,
  // offsets positive (origin interior), body bounded.
  static ConvexBody polytope_h(const Matrix& normals, const Vector& offsets);
  // Probability simplex {x >= 0, sum x = 1} (asymmetric, runner-only).
  static ConvexBody simplex(int dim);

  // The body scaled about the origin by a positive factor.
  ConvexBody scaled(double factor) const;

  int dim() const { return dim_; }
  BodyKind kind() const { return kind_; }
  bool symmetric() const { return symmetric_; }
  double inner_radius() const { return inner_radius_; }
  double outer_radius() const { return outer_radius_; }
  bool radii_exact() const { return radii_exact_; }
  Vector interior_point() const;

  // True if y lies within Euclidean distance delta of the body; false if it
  // lies outside the -delta erosion; either answer within the shell.
  bool contains(const Vector& y, double delta = 1e-9) const;

  // argmin_{x in body} <c, x>, within additive delta of the optimum.
  Vector linear_minimize(const Vector& c, double delta = 1e-9) const;

  // max_{x in body} <v, x>, within additive delta.
  double support(const Vector& v, double delta = 1e-9) const;

  // Minkowski gauge inf{a > 0 : v/a in body}.  Symmetric bodies only.
  double gauge(const Vector& v) const;

  // Norm with respect to the polar body = support function (symmetric only).
  double dual_gauge(const Vector& v, double delta = 1e-9) const;

  // Certifies y in B(body, delta) (nullopt) or returns a unit normal c with
  // <c, y> <= <c, x> + delta for every x in the body.
  std::optional<Vector> separate(const Vector& y, double delta = 1e-9) const;

  // Subgradient of the gauge at v != 0 (symmetric bodies).
  Vector gauge_subgradient(const Vector& v) const;

  // Kind-specific parameter access (used by serialization and adversaries).
  double radius() const;             // ball / lp ball
  double lp_exponent() const;        // lp ball
  const Vector& halfwidths() const;  // box
  const Vector& center() const;      // box
  const Matrix& shape() const;       // ellipsoid
  const std::vector<Vector>& vertices() const;  // V-polytope
  const Matrix& normals() const;     // H-polytope
  const Vector& offsets() const;     // H-polytope

 private:
  ConvexBody() = default;
  void finalize_radii();

  BodyKind kind_ = BodyKind::kEuclideanBall;
  int dim_ = 0;
  bool symmetric_ = true;
  bool radii_exact_ = true;
  double inner_radius_ = 0.0, outer_radius_ = 0.0;

  double radius_ = 0.0;  // ball / lp ball
  double p_ = 2.0;       // lp ball exponent
  Vector halfwidths_, center_;
  Matrix shape_, shape_inv_;
  std::vector<Vector> vertices_;
  Matrix normals_;
  Vector offsets_;
};

// Generic gauge via 60-step bisection on membership over
// [||v||/R_outer, ||v||/r_inner]; test cross-check for the closed forms.
double gauge_by_bisection(const ConvexBody& body, const Vector& v,
                          int iterations = 60);

// Finite cover of the unit sphere by normalized cube-surface lattice points:
// every unit vector is within eps (Euclidean) of some cover point.
class SphereCover {
 public:
  // Throws ResourceError when the projected point count exceeds the budget.
  static SphereCover build(int dim, double eps,
                           std::size_t point_budget = 4000000);

  int dim() const { return dim_; }
  double eps() const { return eps_; }
  const std::vector<Vector>& points() const { return points_; }

  // Max over n random unit directions of the distance to the nearest cover
  // point; a randomized certificate that the covering radius holds.
  double audit_covering_radius(int n, Rng& rng) const;

 private:
  int dim_ = 0;
  double eps_ = 0.0;
  std::vector<Vector> points_;
};

}  // namespace olo
