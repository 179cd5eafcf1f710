// Dense revised-simplex solvers used by the cutting-plane loops.
//
// Two layers:
//  * StandardFormLp —  min c.x  s.t.  A x = b, x >= 0.  Columns may be
//    appended between solves; the solver continues from the current basis,
//    which is what makes the cutting-plane masters cheap to re-solve.
//  * BoxedInequalityLp —  min c.z  s.t.  G z <= h, l <= z <= u.  Solved
//    through its LP dual in standard form, so appending an inequality row
//    appends a standard-form *column* and the warm basis stays feasible:
//    the classic correspondence between cutting planes on a minimization
//    problem and column generation on its dual.
#pragma once

#include <optional>
#include <vector>

#include "olo/types.hpp"

namespace olo {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterLimit;
  double objective = 0.0;
  Vector x;         // standard-form primal values (empty unless optimal)
  Vector row_dual;  // simplex multipliers, one per equality row
  Vector ray;       // improving ray when status == kUnbounded
  long phase1_pivots = 0;
  long phase2_pivots = 0;
};

struct SimplexOptions {
  double cost_tol = 1e-9;   // reduced-cost optimality threshold
  double pivot_tol = 5e-8;  // preferred admissible pivot magnitude
  double feas_tol = 1e-8;   // phase-1 residual treated as feasible
  int refactor_every = 50;
  int degenerate_stall = 64;  // consecutive degenerate pivots before Bland
  long max_pivots = -1;       // -1: scale with problem size
  // Relative scale of a deterministic right-hand-side perturbation applied
  // once at construction.  Breaks massive primal degeneracy.  For the boxed
  // wrapper this perturbs only the objective of the original problem: the
  // returned point stays exactly feasible and optimal to within the scale.
  double rhs_perturb = 0.0;
};

class StandardFormLp {
 public:
  explicit StandardFormLp(const Vector& b, SimplexOptions opts = {});

  // Appends a column with coefficients `a` (length = rows) and cost `cost`.
  // Returns the column index.
  int add_column(const Vector& a, double cost);

  // Rewrites the cost of an existing column.  Feasibility of the current
  // basis is unaffected (costs never enter feasibility), so the next solve
  // continues warm from it.
  void set_cost(int col, double cost);

  int rows() const { return static_cast<int>(b_.size()); }
  int cols() const { return ncols_; }

  // Solves from the current basis (phase 1 only when no feasible basis is
  // known).  The returned solution aliases nothing; the engine keeps its
  // basis for subsequent warm solves.
  LpSolution solve();

  long total_pivots() const { return total_pivots_; }

 private:
  LpSolution solve_once();
  void reset_basis();
  struct PricingResult {
    int column = -1;  // entering column, -1 when optimal
    double reduced_cost = 0.0;
  };

  Vector column(int id) const;      // id < 0 encodes artificial for row -1-id
  double cost_of(int id, bool phase1) const;
  void refactorize();
  PricingResult price(const Vector& pi, bool phase1, bool bland,
                      const std::vector<char>* banned = nullptr) const;
  void devex_update(int entering, int leave_row, const Vector& u);
  enum class PivotOutcome { kOk, kUnbounded, kUnusable };
  PivotOutcome pivot(int entering, bool bland, LpSolution* unbounded_out);
  long run_phase(bool phase1, long budget, LpSolution* out);

  Matrix a_;   // column storage, geometric growth
  int ncols_ = 0;
  Vector costs_;
  Vector b_;         // right-hand side after sign normalization (b >= 0)
  Vector row_sign_;  // +-1 per row; incoming columns/duals are flipped by it
  SimplexOptions opts_;

  std::vector<int> basis_;  // basis member per row (negative: artificial)
  Matrix binv_;
  Vector xb_;
  bool basis_feasible_ = false;
  long total_pivots_ = 0;
  int degenerate_run_ = 0;
  Vector devex_w_;  // Devex reference weights, one per real column
};

// One inequality row of a BoxedInequalityLp.
struct IneqRow {
  Vector g;
  double h = 0.0;
};

struct BoxedLpSolution {
  LpStatus status = LpStatus::kIterLimit;
  double objective = 0.0;
  Vector z;          // optimal point in the original box coordinates
  Vector row_dual;   // multiplier per inequality row (>= 0)
  // Farkas weights proving infeasibility: sum_j w_j * row_j plus nonnegative
  // variable bounds yields an impossible inequality.
  Vector farkas;
  long phase1_pivots = 0;
  long phase2_pivots = 0;
};

class BoxedInequalityLp {
 public:
  // min c.z subject to finite boxes l <= z <= u (upper bounds become
  // internal rows; lower bounds shift the origin).
  BoxedInequalityLp(const Vector& c, const Vector& l, const Vector& u,
                    SimplexOptions opts = {});

  // Adds g.z <= h.  Rows are scaled internally to unit max-norm.
  // Returns the row id used in `row_dual`.
  int add_row(const Vector& g, double h);

  // Replaces the right-hand side of an existing row.  In the dual standard
  // form this is a column-cost change, so the warm basis survives; useful
  // for re-solving with uniformly tightened or loosened cuts.
  void set_rhs(int row, double h);

  int vars() const { return static_cast<int>(c_.size()); }
  int user_rows() const { return static_cast<int>(row_scale_.size()); }

  BoxedLpSolution solve();
  long total_pivots() const { return sf_.total_pivots(); }

 private:
  Vector c_, l_, u_;
  StandardFormLp sf_;
  std::vector<double> row_scale_;
  std::vector<double> row_shift_;  // g.l per row, for rhs rewrites
  std::vector<int> row_col_;  // standard-form column of each user row
};

}  // namespace olo
