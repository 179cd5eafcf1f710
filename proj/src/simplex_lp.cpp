#include "olo/simplex_lp.hpp"

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace olo {
namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

StandardFormLp::StandardFormLp(const Vector& b, SimplexOptions opts)
    : b_(b), opts_(opts) {
  if (b.size() == 0) throw ValidationError("simplex: empty right-hand side");
  if (!all_finite(b)) throw ValidationError("simplex: non-finite rhs");
  const int m = rows();
  row_sign_ = Vector::Ones(m);
  for (int i = 0; i < m; ++i) {
    if (b_[i] < 0) {
      b_[i] = -b_[i];
      row_sign_[i] = -1.0;
    }
  }
  if (opts_.rhs_perturb > 0.0) {
    const double scale =
        opts_.rhs_perturb * std::max(1.0, b_.cwiseAbs().maxCoeff());
    for (int i = 0; i < m; ++i)
      b_[i] += scale * static_cast<double>(i + 1) / static_cast<double>(m);
  }
  a_.resize(m, 64);
  costs_.resize(64);
  basis_.resize(m);
  for (int i = 0; i < m; ++i) basis_[i] = -1 - i;  // artificial start
  binv_ = Matrix::Identity(m, m);
  xb_ = b_;
}

int StandardFormLp::add_column(const Vector& a, double cost) {
  if (a.size() != rows())
    throw ValidationError("simplex: column length mismatch");
  if (!all_finite(a) || !std::isfinite(cost))
    throw ValidationError("simplex: non-finite column");
  if (ncols_ == a_.cols()) {
    a_.conservativeResize(Eigen::NoChange, 2 * a_.cols());
    costs_.conservativeResize(2 * costs_.size());
  }
  a_.col(ncols_) = row_sign_.cwiseProduct(a);
  costs_[ncols_] = cost;
  return ncols_++;
}

void StandardFormLp::set_cost(int col, double cost) {
  if (col < 0 || col >= ncols_)
    throw ValidationError("simplex: set_cost column out of range");
  if (!std::isfinite(cost))
    throw ValidationError("simplex: non-finite cost");
  costs_[col] = cost;
}

Vector StandardFormLp::column(int id) const {
  if (id >= 0) return a_.col(id);
  return Vector::Unit(rows(), -1 - id);
}

double StandardFormLp::cost_of(int id, bool phase1) const {
  if (id < 0) return phase1 ? 1.0 : 0.0;
  return phase1 ? 0.0 : costs_[id];
}

void StandardFormLp::refactorize() {
  const int m = rows();
  Matrix basis_mat(m, m);
  for (int i = 0; i < m; ++i) basis_mat.col(i) = column(basis_[i]);
  Eigen::PartialPivLU<Matrix> lu(basis_mat);
  binv_ = lu.inverse();
  const double residual = (basis_mat * binv_ - Matrix::Identity(m, m))
                              .cwiseAbs()
                              .maxCoeff();
  if (getenv("OLO_LP_DEBUG"))
    std::fprintf(stderr, "[refactor] pivots=%ld m=%d ncols=%d residual=%.3e\n",
                 total_pivots_, m, ncols_, residual);
  if (!binv_.allFinite() || residual > 1e-6)
    throw NumericError("simplex: basis refactorization failed (residual " +
                       std::to_string(residual) + ")");
  xb_ = binv_ * b_;
}

StandardFormLp::PricingResult StandardFormLp::price(
    const Vector& pi, bool phase1, bool bland,
    const std::vector<char>* banned) const {
  PricingResult best;
  if (ncols_ == 0) return best;
  // Reduced costs of the real columns in one pass.
  Vector d = -(a_.leftCols(ncols_).transpose() * pi);
  if (!phase1) d += costs_.head(ncols_);
  double best_score = 0.0;
  for (int j = 0; j < ncols_; ++j) {
    if (banned && (*banned)[static_cast<size_t>(j)]) continue;
    const double dj = d[j];
    if (dj < -opts_.cost_tol) {
      if (bland) return {j, dj};
      // Devex criterion: largest squared reduced cost per reference weight.
      const double score = dj * dj / devex_w_[j];
      if (best.column < 0 || score > best_score) {
        best = {j, dj};
        best_score = score;
      }
    }
  }
  return best;
}


void StandardFormLp::devex_update(int entering, int leave_row,
                                  const Vector& u) {
  // Forrest-Goldfarb reference-weight recurrence.  alpha_j is the pivot row
  // of the transformed tableau; weights only ever grow until the reference
  // framework is reset at the start of the next phase.
  const double piv = u[leave_row];
  if (std::abs(piv) < 1e-30) return;
  const double we = devex_w_[entering];
  const Eigen::RowVectorXd rho = binv_.row(leave_row);
  const Vector alpha = a_.leftCols(ncols_).transpose() * rho.transpose();
  const double we_over_piv2 = we / (piv * piv);
  for (int j = 0; j < ncols_; ++j) {
    const double cand = alpha[j] * alpha[j] * we_over_piv2;
    if (cand > devex_w_[j]) devex_w_[j] = cand;
  }
  // The leaving variable re-enters the nonbasic set.
  const int left = basis_[leave_row];
  if (left >= 0) devex_w_[left] = std::max(we_over_piv2, 1.0);
}

StandardFormLp::PivotOutcome StandardFormLp::pivot(int entering, bool bland,
                                                   LpSolution* unbounded_out) {
  const int m = rows();
  Vector u = binv_ * column(entering);
  bool just_refreshed = false;

  // Ratio test.  Basic artificials are pinned at zero: any nonzero pivot
  // element on such a row blocks at theta = 0 and swaps the artificial out,
  // which both preserves feasibility and gradually eliminates them.
  double theta = std::numeric_limits<double>::infinity();
  int leave = -1;
  auto consider = [&](int i, double /*t*/) {
    if (leave < 0) {
      leave = i;
      return;
    }
    // Within the ratio window: prefer kicking artificials, then Bland order
    // for anti-cycling, then the largest pivot element for stability.
    const bool cand_art = basis_[i] < 0, cur_art = basis_[leave] < 0;
    if (cand_art != cur_art) {
      if (cand_art) leave = i;
    } else if (bland) {
      if (basis_[i] < basis_[leave]) leave = i;
    } else if (std::abs(u[i]) > std::abs(u[leave])) {
      leave = i;
    }
  };
  // Harris-style two-stage ratio test.  Stage one finds the tightest ratio
  // with a small feasibility slack; stage two picks the best-scaled pivot
  // among all rows whose ratio fits under that relaxed bound.  This keeps
  // ill-scaled pivot elements out of the basis, which is what preserves the
  // accuracy of the maintained inverse across long degenerate stretches.
  auto ratio_of = [&](int i) { return std::max(xb_[i], 0.0) / u[i]; };
  auto eligible = [&](int i, double tol) {
    if (basis_[i] < 0 && xb_[i] <= opts_.feas_tol)
      return std::abs(u[i]) > tol;  // artificials block at theta = 0
    return u[i] > tol;
  };
  auto art_blocked = [&](int i) {
    return basis_[i] < 0 && xb_[i] <= opts_.feas_tol;
  };
  auto scan = [&](double tol) {
    theta = std::numeric_limits<double>::infinity();
    leave = -1;
    for (int i = 0; i < m; ++i)
      if (eligible(i, tol))
        theta = std::min(theta, art_blocked(i) ? 0.0 : ratio_of(i));
    if (!std::isfinite(theta)) return;
    const double window = theta + 1e-10;
    for (int i = 0; i < m; ++i) {
      if (!eligible(i, tol)) continue;
      const double t = art_blocked(i) ? 0.0 : ratio_of(i);
      if (t <= window) consider(i, t);
    }
  };
  // Bland mode needs the exact minimal-ratio tie set; any slack in the
  // window voids the anti-cycling guarantee.
  auto scan_bland = [&]() {
    theta = std::numeric_limits<double>::infinity();
    leave = -1;
    for (int i = 0; i < m; ++i)
      if (eligible(i, 1e-12))
        theta = std::min(theta, art_blocked(i) ? 0.0 : ratio_of(i));
    if (!std::isfinite(theta)) return;
    const double window = theta * (1.0 + 1e-14);
    for (int i = 0; i < m; ++i) {
      if (!eligible(i, 1e-12)) continue;
      const double t = art_blocked(i) ? 0.0 : ratio_of(i);
      if (t <= window) consider(i, t);
    }
  };
  if (bland) {
    scan_bland();
  } else {
    scan(opts_.pivot_tol);
    if (leave < 0) scan(1e-12);
  }
  if (leave < 0) {
    if (unbounded_out) {
      unbounded_out->status = LpStatus::kUnbounded;
      Vector ray = Vector::Zero(ncols_);
      ray[entering] = 1.0;
      for (int i = 0; i < m; ++i)
        if (basis_[i] >= 0) ray[basis_[i]] = -u[i];
      unbounded_out->ray = ray;
    }
    return PivotOutcome::kUnbounded;
  }

  // A pivot this small is either genuine (then a fresh inverse confirms it)
  // or an artifact of accumulated error (then the refresh exposes a better
  // row or a changed picture).  Refactorize once and redo the selection.
  if (std::abs(u[leave]) < 1e-6 && !just_refreshed) {
    refactorize();
    just_refreshed = true;
    u = binv_ * column(entering);
    if (bland) {
      scan_bland();
    } else {
      scan(opts_.pivot_tol);
      if (leave < 0) scan(1e-12);
    }
    if (leave < 0) {
      if (unbounded_out) {
        unbounded_out->status = LpStatus::kUnbounded;
        Vector ray = Vector::Zero(ncols_);
        ray[entering] = 1.0;
        for (int i = 0; i < m; ++i)
          if (basis_[i] >= 0) ray[basis_[i]] = -u[i];
        unbounded_out->ray = ray;
      }
      return PivotOutcome::kUnbounded;
    }
  }

  // Refuse pivots that are tiny absolutely or relative to their column: one
  // such pivot can wreck the maintained inverse beyond repair.  The caller
  // bans the column for the current basis and asks pricing for another.
  if (std::abs(u[leave]) < std::max(1e-9, 1e-4 * u.cwiseAbs().maxCoeff()))
    return PivotOutcome::kUnusable;

  devex_update(entering, leave, u);

  basis_[leave] = entering;
  const double piv = u[leave];
  Eigen::RowVectorXd brow = binv_.row(leave) / piv;
  for (int i = 0; i < m; ++i) {
    if (i == leave) continue;
    const double f = u[i];
    if (f != 0.0) binv_.row(i) -= f * brow;
  }
  binv_.row(leave) = brow;
  xb_ = binv_ * b_;
  ++total_pivots_;
  degenerate_run_ = (theta <= 1e-11) ? degenerate_run_ + 1 : 0;
  if (total_pivots_ % opts_.refactor_every == 0) refactorize();
  return PivotOutcome::kOk;
}

long StandardFormLp::run_phase(bool phase1, long budget, LpSolution* out) {
  const int m = rows();
  long used = 0;
  bool bland = false;
  devex_w_ = Vector::Ones(std::max(ncols_, 1));
  std::vector<char> banned(static_cast<size_t>(std::max(ncols_, 1)), 0);
  bool any_banned = false;
  // Hard-stall watchdog: when the objective makes no relative progress over
  // several consecutive 2000-pivot windows, declare the iteration limit
  // early instead of grinding out the whole budget.
  double window_obj = 0;
  bool window_init = false;
  int stalled_windows = 0;
  while (used < budget) {
    Vector cb(m);
    for (int i = 0; i < m; ++i) cb[i] = cost_of(basis_[i], phase1);
    const Vector pi = binv_.transpose() * cb;
    bland = degenerate_run_ >= opts_.degenerate_stall;
    const PricingResult pr =
        price(pi, phase1, bland, any_banned ? &banned : nullptr);
    if (pr.column < 0) {
      // Improving-but-unusable columns widen the optimality tolerance by
      // their reduced cost; they are rare and bounded by the ban rule.
      out->status = LpStatus::kOptimal;
      out->row_dual = row_sign_.cwiseProduct(pi);
      return used;
    }
    if (used > 0 && used % 2000 == 0) {
      double obj = 0;
      for (int i = 0; i < m; ++i) obj += cost_of(basis_[i], phase1) * xb_[i];
      if (window_init &&
          std::abs(obj - window_obj) <= 1e-12 * (1.0 + std::abs(obj))) {
        if (++stalled_windows >= 5) {
          out->status = LpStatus::kIterLimit;
          return used;
        }
      } else {
        stalled_windows = 0;
      }
      window_obj = obj;
      window_init = true;
      if (getenv("OLO_LP_DEBUG"))
        std::fprintf(stderr,
                     "[phase%d] used=%ld obj=%.12f degrun=%d bland=%d ncols=%d\n",
                     phase1 ? 1 : 2, used, obj, degenerate_run_, int(bland),
                     ncols_);
    }
    LpSolution unb;
    const PivotOutcome outcome = pivot(pr.column, bland, &unb);
    if (outcome == PivotOutcome::kUnbounded) {
      out->status = LpStatus::kUnbounded;
      out->ray = unb.ray;
      return used;
    }
    if (outcome == PivotOutcome::kUnusable) {
      banned[static_cast<size_t>(pr.column)] = 1;
      any_banned = true;
      ++used;
      continue;
    }
    if (any_banned) {
      std::fill(banned.begin(), banned.end(), 0);
      any_banned = false;
    }
    ++used;
  }
  out->status = LpStatus::kIterLimit;
  return used;
}

void StandardFormLp::reset_basis() {
  const int m = rows();
  for (int i = 0; i < m; ++i) basis_[i] = -1 - i;
  binv_ = Matrix::Identity(m, m);
  xb_ = b_;
  basis_feasible_ = false;
  degenerate_run_ = 0;
}

LpSolution StandardFormLp::solve() {
  // A singular refactorization means accumulated error let a dependent
  // column enter the basis.  The warm basis is unsalvageable; one cold
  // restart from the artificial basis recovers deterministically.
  for (int attempt = 0;; ++attempt) {
    try {
      return solve_once();
    } catch (const NumericError&) {
      if (attempt >= 1) throw;
      reset_basis();
    }
  }
}

LpSolution StandardFormLp::solve_once() {
  const int m = rows();
  LpSolution sol;
  long budget = opts_.max_pivots > 0
                    ? opts_.max_pivots
                    : 2000 + 60L * (m + std::max(ncols_, 1));
  degenerate_run_ = 0;

  if (!basis_feasible_) {
    LpSolution p1;
    const long used = run_phase(/*phase1=*/true, budget, &p1);
    sol.phase1_pivots = used;
    budget -= used;
    if (p1.status == LpStatus::kUnbounded)
      throw NumericError("simplex: phase 1 reported an unbounded direction");
    if (p1.status == LpStatus::kIterLimit) {
      sol.status = LpStatus::kIterLimit;
      return sol;
    }
    double art = 0.0;
    for (int i = 0; i < m; ++i)
      if (basis_[i] < 0) art += std::max(xb_[i], 0.0);
    if (art > opts_.feas_tol) {
      sol.status = LpStatus::kInfeasible;
      sol.objective = art;
      return sol;
    }
    // Drive remaining zero-level artificials out where a real pivot exists.
    for (int i = 0; i < m; ++i) {
      if (basis_[i] >= 0) continue;
      for (int j = 0; j < ncols_; ++j) {
        const double elem = binv_.row(i).dot(a_.col(j));
        if (std::abs(elem) > 1e-7 &&
            std::find(basis_.begin(), basis_.end(), j) == basis_.end()) {
          basis_[i] = j;
          refactorize();
          break;
        }
      }
    }
    basis_feasible_ = true;
  }

  LpSolution p2;
  sol.phase2_pivots = run_phase(/*phase1=*/false, budget, &p2);
  sol.status = p2.status;
  if (p2.status == LpStatus::kOptimal) {
    sol.x = Vector::Zero(ncols_);
    for (int i = 0; i < m; ++i)
      if (basis_[i] >= 0) sol.x[basis_[i]] = std::max(xb_[i], 0.0);
    sol.objective = costs_.head(ncols_).dot(sol.x);
    sol.row_dual = p2.row_dual;
  } else if (p2.status == LpStatus::kUnbounded) {
    sol.ray = p2.ray;
    basis_feasible_ = true;  // basis is still valid for future columns
  }
  return sol;
}

BoxedInequalityLp::BoxedInequalityLp(const Vector& c, const Vector& l,
                                     const Vector& u, SimplexOptions opts)
    : c_(c), l_(l), u_(u), sf_((c.size() > 0 ? Vector(-c) : Vector()), opts) {
  const int n = static_cast<int>(c.size());
  if (n == 0) throw ValidationError("boxed lp: no variables");
  if (l.size() != n || u.size() != n)
    throw ValidationError("boxed lp: bound size mismatch");
  if (!all_finite(c) || !all_finite(l) || !all_finite(u))
    throw ValidationError("boxed lp: non-finite data");
  for (int i = 0; i < n; ++i)
    if (l[i] > u[i])
      throw ValidationError("boxed lp: empty box on variable " +
                            std::to_string(i));
  // Dual standard form: rows = variables.  Surplus columns encode z >= l,
  // unit columns encode z <= u.
  for (int i = 0; i < n; ++i) sf_.add_column(-Vector::Unit(n, i), 0.0);
  for (int i = 0; i < n; ++i) sf_.add_column(Vector::Unit(n, i), u[i] - l[i]);
}

int BoxedInequalityLp::add_row(const Vector& g, double h) {
  if (g.size() != c_.size())
    throw ValidationError("boxed lp: row size mismatch");
  if (!all_finite(g) || !std::isfinite(h))
    throw ValidationError("boxed lp: non-finite row");
  double scale = g.cwiseAbs().maxCoeff();
  if (scale <= 0.0) scale = 1.0;
  const double shift = g.dot(l_);
  const int col = sf_.add_column(g / scale, (h - shift) / scale);
  row_scale_.push_back(scale);
  row_shift_.push_back(shift);
  row_col_.push_back(col);
  return static_cast<int>(row_scale_.size()) - 1;
}

void BoxedInequalityLp::set_rhs(int row, double h) {
  if (row < 0 || row >= user_rows())
    throw ValidationError("boxed lp: set_rhs row out of range");
  if (!std::isfinite(h))
    throw ValidationError("boxed lp: non-finite rhs");
  sf_.set_cost(row_col_[row], (h - row_shift_[row]) / row_scale_[row]);
}

BoxedLpSolution BoxedInequalityLp::solve() {
  const LpSolution inner = sf_.solve();
  BoxedLpSolution out;
  out.phase1_pivots = inner.phase1_pivots;
  out.phase2_pivots = inner.phase2_pivots;
  const int nrows = user_rows();
  switch (inner.status) {
    case LpStatus::kOptimal: {
      out.status = LpStatus::kOptimal;
      out.z = l_ + inner.row_dual;
      out.objective = c_.dot(out.z);
      out.row_dual = Vector::Zero(nrows);
      for (int j = 0; j < nrows; ++j)
        out.row_dual[j] = inner.x[row_col_[j]] / row_scale_[j];
      break;
    }
    case LpStatus::kUnbounded: {
      // Dual unbounded <=> primal infeasible; the improving ray is a Farkas
      // certificate in terms of the user rows.
      out.status = LpStatus::kInfeasible;
      out.farkas = Vector::Zero(nrows);
      for (int j = 0; j < nrows; ++j)
        if (row_col_[j] < inner.ray.size())
          out.farkas[j] = std::max(inner.ray[row_col_[j]], 0.0) / row_scale_[j];
      break;
    }
    case LpStatus::kInfeasible:
      // Cannot happen: the box columns always admit a dual-feasible point.
      throw NumericError("boxed lp: dual infeasible despite finite boxes");
    default:
      out.status = LpStatus::kIterLimit;
  }
  return out;
}

}  // namespace olo
