#include "olo/regularizer.hpp"

#include <cmath>
#include <limits>

namespace olo {

namespace {

void require_dim(const QuasiQuadraticPiece& p, const Vector& x) {
  if (x.size() != p.center.size())
    throw ValidationError("piece: dimension mismatch");
}

}  // namespace

QuasiQuadraticPiece::QuasiQuadraticPiece(Vector center_in, double r_in,
                                         Vector v_in, Matrix sigma_in,
                                         double cubic_L_in)
    : center(std::move(center_in)),
      r(r_in),
      v(std::move(v_in)),
      sigma(std::move(sigma_in)),
      cubic_L(cubic_L_in) {
  const Eigen::Index d = center.size();
  if (d < 1) throw ValidationError("piece: empty center");
  if (v.size() != d || sigma.rows() != d || sigma.cols() != d)
    throw ValidationError("piece: field dimensions disagree");
  if (!(cubic_L >= 0)) throw ValidationError("piece: cubic_L must be >= 0");
  const double scale = 1.0 + sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw ValidationError("piece: sigma not symmetric");
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();  // exact symmetry
}

QuasiQuadraticPiece QuasiQuadraticPiece::from_function_data(Vector x0,
                                                            double f0,
                                                            Vector grad,
                                                            Matrix hess,
                                                            double hess_lip) {
  if (!(hess_lip >= 0))
    throw ValidationError("piece: Hessian Lipschitz constant must be >= 0");
  return QuasiQuadraticPiece(std::move(x0), f0, std::move(grad),
                             std::move(hess), 2.0 * hess_lip);
}

double piece_eval(const QuasiQuadraticPiece& p, const Vector& x) {
  require_dim(p, x);
  const Vector d = x - p.center;
  const double n = d.norm();
  return p.r + p.v.dot(d) + 0.5 * d.dot(p.sigma * d) -
         (p.cubic_L / 6.0) * n * n * n;
}

Vector piece_grad(const QuasiQuadraticPiece& p, const Vector& x) {
  require_dim(p, x);
  const Vector d = x - p.center;
  return p.v + p.sigma * d - (p.cubic_L / 2.0) * d.norm() * d;
}

Matrix piece_hessian(const QuasiQuadraticPiece& p, const Vector& x) {
  require_dim(p, x);
  const Vector d = x - p.center;
  const double n = d.norm();
  if (n == 0.0) return p.sigma;
  return p.sigma - (p.cubic_L / 2.0) *
                       (n * Matrix::Identity(d.size(), d.size()) +
                        d * d.transpose() / n);
}

PiecewiseRegularizer::PiecewiseRegularizer(
    std::vector<QuasiQuadraticPiece> pieces, double alpha, ConvexBody loss_body,
    std::string provenance)
    : pieces_(std::move(pieces)),
      alpha_(alpha),
      loss_body_(std::move(loss_body)),
      provenance_(std::move(provenance)) {
  if (pieces_.empty()) throw ValidationError("regularizer: no pieces");
  if (!(alpha_ >= 0)) throw ValidationError("regularizer: alpha must be >= 0");
  dim_ = static_cast<int>(pieces_.front().center.size());
  cubic_L_ = pieces_.front().cubic_L;
  for (const auto& p : pieces_) {
    if (p.center.size() != dim_)
      throw ValidationError("regularizer: pieces disagree on dimension");
    if (p.cubic_L != cubic_L_)
      throw ValidationError("regularizer: pieces disagree on cubic_L");
  }
  if (loss_body_.dim() != dim_)
    throw ValidationError("regularizer: loss body dimension mismatch");
}

double PiecewiseRegularizer::value(const Vector& x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces_) best = std::max(best, piece_eval(p, x));
  return best;
}

std::vector<int> PiecewiseRegularizer::argmax_pieces(const Vector& x) const {
  std::vector<double> vals(pieces_.size());
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pieces_.size(); ++i) {
    vals[i] = piece_eval(pieces_[i], x);
    best = std::max(best, vals[i]);
  }
  std::vector<int> out;
  for (size_t i = 0; i < pieces_.size(); ++i)
    if (vals[i] >= best - 1e-12) out.push_back(static_cast<int>(i));
  return out;
}

Vector PiecewiseRegularizer::subgradient(const Vector& x) const {
  return piece_grad(pieces_[argmax_pieces(x).front()], x);
}

}  // namespace olo
