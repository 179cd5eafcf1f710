#pragma once

#include <string>
#include <vector>

#include "olo/convex_body.hpp"
#include "olo/types.hpp"

namespace olo {

// Quadratic Taylor model minus a cubic-norm decay term, centered at a grid
// point:  r + <v, D> + 0.5 D'SD - (cubic_L/6)|D|^3  with  D = x - center.
struct QuasiQuadraticPiece {
  Vector center;
  double r = 0.0;
  Vector v;
  Matrix sigma;
  double cubic_L = 0.0;

  QuasiQuadraticPiece(Vector center_in, double r_in, Vector v_in,
                      Matrix sigma_in, double cubic_L_in);

  // Piece matching a smooth function's second-order data at x0.  hess_lip is
  // a Lipschitz constant of the function's Hessian; the stored cubic
  // coefficient is doubled (2 * hess_lip) so the piece under-estimates the
  // function with margin between (hess_lip/6)|D|^3 and (hess_lip/2)|D|^3.
  static QuasiQuadraticPiece from_function_data(Vector x0, double f0,
                                                Vector grad, Matrix hess,
                                                double hess_lip);
};

double piece_eval(const QuasiQuadraticPiece& p, const Vector& x);
// v + SD - (cubic_L/2)|D|D; equals v at the center.
Vector piece_grad(const QuasiQuadraticPiece& p, const Vector& x);
// S - (cubic_L/2)(|D|I + DD'/|D|); equals S at the center.
Matrix piece_hessian(const QuasiQuadraticPiece& p, const Vector& x);

// Pointwise max of quasi-quadratic pieces, with the strong-convexity modulus
// it claims relative to the polar gauge of a loss body.
class PiecewiseRegularizer {
 public:
  PiecewiseRegularizer(std::vector<QuasiQuadraticPiece> pieces, double alpha,
                       ConvexBody loss_body, std::string provenance);

  int dim() const { return dim_; }
  double cubic_L() const { return cubic_L_; }
  double alpha() const { return alpha_; }
  const ConvexBody& loss_body() const { return loss_body_; }
  const std::string& provenance() const { return provenance_; }
  const std::vector<QuasiQuadraticPiece>& pieces() const { return pieces_; }

  double value(const Vector& x) const;
  // All indices whose piece value is within 1e-12 (absolute) of the max,
  // ascending.
  std::vector<int> argmax_pieces(const Vector& x) const;
  // Gradient of the lowest-index argmax piece; a subgradient wherever the
  // max is convex.
  Vector subgradient(const Vector& x) const;

 private:
  std::vector<QuasiQuadraticPiece> pieces_;
  double alpha_ = 0.0;
  ConvexBody loss_body_;
  std::string provenance_;
  int dim_ = 0;
  double cubic_L_ = 0.0;
};

}  // namespace olo
