#include "olo/synthesis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "olo/simplex_lp.hpp"
#include "olo/verify.hpp"

namespace olo {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

void SynthesisConfig::validate(const ConvexBody& loss_body) const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0) || !std::isfinite(x))
      throw ValidationError(std::string("synthesis config: ") + name +
                            " must be positive and finite");
  };
  positive(eps_bar, "eps_bar");
  positive(eps, "eps");
  positive(L, "L");
  positive(alpha, "alpha");
  positive(c0, "c0");
  positive(c2, "c2");
  positive(C0, "C0");
  positive(delta, "delta");
  positive(delta_m, "delta_m");
  positive(delta_lin, "delta_lin");
  positive(eps_tilde, "eps_tilde");
  positive(cut_tol, "cut_tol");
  positive(c_guess, "C guess");
  if (max_rounds < 1)
    throw ValidationError("synthesis config: max_rounds must be >= 1");
  if (!(pair_coeff > 0))
    throw ValidationError("synthesis config: pair_coeff must be positive");
  if (!(slack_push >= 0) || !(slack_push <= 1))
    throw ValidationError("synthesis config: slack_push must be in [0, 1]");
  const double rl = loss_body.inner_radius();
  const double Rl = loss_body.outer_radius();
  const double lin_cap = std::min(delta_m / 4.0, rl * delta_m / 2.0);
  if (delta_lin > lin_cap * (1 + 1e-12))
    throw ValidationError(
        "synthesis config: delta_lin exceeds min(delta_m/4, r*delta_m/2) = " +
        fmt(lin_cap));
  const double tilde_cap = alpha * rl * rl * rl * delta_m / (c2 * Rl);
  if (eps_tilde > tilde_cap * (1 + 1e-12))
    throw ValidationError(
        "synthesis config: eps_tilde exceeds alpha r^3 delta_m / (c2 R) = " +
        fmt(tilde_cap));
  if (alpha > c2 / (rl * rl) * (1 + 1e-12))
    throw ValidationError(
        "synthesis config: alpha > c2/r^2 makes the program infeasible "
        "(curvature demanded on loss directions exceeds the spectral cap); "
        "alpha = " +
        fmt(alpha) + ", c2/r^2 = " + fmt(c2 / (rl * rl)));
}

SynthesisConfig calibrate_constants(const ConvexBody& action_set,
                                    const ConvexBody& loss_body,
                                    double C_guess,
                                    const CalibrationOverrides& o) {
  if (!(C_guess > 0))
    throw ValidationError("calibrate: C guess must be positive");
  if (!action_set.symmetric())
    throw ValidationError("calibrate: action set must be symmetric");
  if (!loss_body.symmetric())
    throw ValidationError("calibrate: loss set must be symmetric");
  const double d = action_set.dim();
  const double rx = action_set.inner_radius();
  const double Rx = action_set.outer_radius();
  const double Rl = loss_body.outer_radius();
  const double C2 = C_guess * C_guess;

  SynthesisConfig cfg;
  cfg.c_guess = C_guess;
  cfg.c1_tilde = C2 * std::pow(d, 0.25) / rx;
  cfg.c2_tilde = C2 * std::sqrt(d) / (rx * rx);
  cfg.L = o.L.value_or(C2 * std::pow(d, 0.75) / (rx * rx * rx));
  cfg.eps_bar = o.eps_bar.value_or(0.25 * rx);
  cfg.eps = std::sqrt(d) * cfg.eps_bar;
  const double corr = cfg.L * std::pow(cfg.eps_bar, 3);
  cfg.c0 = o.c0.value_or(cfg.c1_tilde + corr);
  cfg.c2 = o.c2.value_or(cfg.c2_tilde + corr);
  cfg.C0 = o.C0.value_or(C2 + corr);
  cfg.alpha = o.alpha.value_or(1.0);
  cfg.delta = o.delta.value_or(0.1);
  cfg.delta_m = cfg.delta / (2.0 * cfg.alpha * Rl * Rl);
  const double rl = loss_body.inner_radius();
  cfg.delta_lin =
      o.delta_lin.value_or(std::min(cfg.delta_m / 4.0, rl * cfg.delta_m / 2.0));
  cfg.eps_tilde =
      o.eps_tilde.value_or(cfg.alpha * rl * rl * rl * cfg.delta_m /
                           (cfg.c2 * Rl));
  if (o.cut_tol) cfg.cut_tol = *o.cut_tol;
  if (o.max_rounds) cfg.max_rounds = *o.max_rounds;
  if (o.pair_coeff) cfg.pair_coeff = *o.pair_coeff;
  if (o.slack_push) cfg.slack_push = *o.slack_push;
  if (o.grid_budget) cfg.grid_budget = *o.grid_budget;
  cfg.eps_bar_theory = std::pow(rx, 6) /
                       (std::pow(Rx, 6) * std::pow(C_guess, 6) * d * d *
                        std::sqrt(d));
  cfg.validate(loss_body);
  return cfg;
}

DiscretizationGrid discretize_action_set(const ConvexBody& action_set,
                                         double eps_bar, long budget) {
  if (!(eps_bar > 0))
    throw ValidationError("discretize: eps_bar must be positive");
  if (!action_set.symmetric())
    throw ValidationError("discretize: action set must be symmetric");
  const int d = action_set.dim();
  const double R = action_set.outer_radius();
  const long m = static_cast<long>(std::floor(R / eps_bar + 1e-9));
  double estimate = 1;
  for (int i = 0; i < d; ++i) estimate *= static_cast<double>(2 * m + 1);
  if (estimate > static_cast<double>(budget))
    throw ResourceError("discretize: lattice estimate " + fmt(estimate) +
                        " exceeds budget " + std::to_string(budget));
  DiscretizationGrid grid;
  grid.eps_bar = eps_bar;
  std::vector<long> k(d, -m);
  while (true) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = eps_bar * static_cast<double>(k[i]);
    if (action_set.contains(x)) grid.centers.push_back(x);
    int axis = d - 1;
    while (axis >= 0 && k[axis] == m) k[axis--] = -m;
    if (axis < 0) break;
    ++k[axis];
  }
  if (grid.centers.empty())
    throw NumericError("discretize: no lattice point inside the body");
  return grid;
}

double DiscretizationGrid::audit_cover_radius(const ConvexBody& body, int n,
                                              Rng& rng) const {
  double worst = 0;
  for (int t = 0; t < n; ++t) {
    const Vector x = sample_body_uniform(body, rng);
    double best = 1e300;
    for (const Vector& c : centers) best = std::min(best, (x - c).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

int InstanceLayout::sigma(int i, int a, int b) const {
  if (a > b) std::swap(a, b);
  const int off = a * d - a * (a - 1) / 2 + (b - a);
  return 1 + N + N * d + i * tri() + off;
}

ProgramInstance ProgramInstance::unpack(const Vector& z,
                                        const InstanceLayout& lay) {
  ProgramInstance inst;
  inst.r = z[lay.r_global()];
  inst.r_i.resize(lay.N);
  inst.v_i.resize(lay.N);
  inst.sigma_i.resize(lay.N);
  for (int i = 0; i < lay.N; ++i) {
    inst.r_i[i] = z[lay.r(i)];
    inst.v_i[i] = Vector(lay.d);
    for (int k = 0; k < lay.d; ++k) inst.v_i[i][k] = z[lay.v(i, k)];
    inst.sigma_i[i] = Matrix(lay.d, lay.d);
    for (int a = 0; a < lay.d; ++a)
      for (int b = a; b < lay.d; ++b)
        inst.sigma_i[i](a, b) = inst.sigma_i[i](b, a) = z[lay.sigma(i, a, b)];
  }
  return inst;
}

Vector ProgramInstance::pack(const InstanceLayout& lay) const {
  Vector z = Vector::Zero(lay.num_vars());
  z[lay.r_global()] = r;
  for (int i = 0; i < lay.N; ++i) {
    z[lay.r(i)] = r_i[i];
    for (int k = 0; k < lay.d; ++k) z[lay.v(i, k)] = v_i[i][k];
    for (int a = 0; a < lay.d; ++a)
      for (int b = a; b < lay.d; ++b)
        z[lay.sigma(i, a, b)] = sigma_i[i](a, b);
  }
  return z;
}

double ConstraintCut::lhs(const Vector& z) const {
  double s = 0;
  for (const auto& [idx, coeff] : terms) s += coeff * z[idx];
  return s;
}

std::vector<ConstraintCut> locality_constraints(const DiscretizationGrid& grid,
                                                const SynthesisConfig& config,
                                                const InstanceLayout& lay) {
  const int N = grid.size(), d = lay.d;
  std::vector<ConstraintCut> cuts;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const Vector delta = grid.centers[j] - grid.centers[i];
      const double nd = delta.norm();
      ConstraintCut cut;
      cut.tag = "locality(" + std::to_string(i) + "," + std::to_string(j) + ")";
      cut.terms.emplace_back(lay.r(i), 1.0);
      for (int k = 0; k < d; ++k)
        cut.terms.emplace_back(lay.v(i, k), delta[k]);
      for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b)
          cut.terms.emplace_back(lay.sigma(i, a, b),
                                 a == b ? 0.5 * delta[a] * delta[a]
                                        : delta[a] * delta[b]);
      cut.terms.emplace_back(lay.r(j), -1.0);
      cut.rhs = config.pair_coeff * config.L * nd * nd * nd;
      cut.slack_scale = nd * nd * nd;
      cuts.push_back(std::move(cut));
    }
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < d; ++k)
      for (int sign : {+1, -1}) {
        ConstraintCut cut;
        cut.tag = "grad-bound(" + std::to_string(i) + "," + std::to_string(k) +
                  "," + (sign > 0 ? "+" : "-") + ")";
        cut.terms.emplace_back(lay.v(i, k), static_cast<double>(sign));
        cut.rhs = config.c0;
        cuts.push_back(std::move(cut));
      }
  for (int i = 0; i < N; ++i) {
    ConstraintCut cut;
    cut.tag = "value-bound(" + std::to_string(i) + ")";
    cut.terms.emplace_back(lay.r(i), 1.0);
    cut.rhs = config.C0;
    cuts.push_back(std::move(cut));
  }
  {
    ConstraintCut cut;
    cut.tag = "value-bound(global)";
    cut.terms.emplace_back(lay.r_global(), 1.0);
    cut.rhs = config.C0;
    cuts.push_back(std::move(cut));
  }
  for (int i = 0; i < N; ++i) {
    ConstraintCut cut;
    cut.tag = "objective-link(" + std::to_string(i) + ")";
    cut.terms.emplace_back(lay.r(i), 1.0);
    cut.terms.emplace_back(lay.r_global(), -1.0);
    cut.rhs = 0.0;
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

namespace {

std::vector<double> dual_gauge_squares(const ConvexBody& loss_body,
                                       const SphereCover& cover,
                                       double delta_lin) {
  std::vector<double> s2(cover.points().size());
  for (size_t k = 0; k < cover.points().size(); ++k) {
    const double s = loss_body.dual_gauge(cover.points()[k], delta_lin);
    s2[k] = s * s;
  }
  return s2;
}

ConstraintCut form_cut(const Vector& dir, double rhs, const InstanceLayout& lay,
                       int i, const std::string& tag) {
  // <dir dir', Sigma_i> >= rhs, stored as the <= inequality of the negation.
  ConstraintCut cut;
  cut.tag = tag;
  for (int a = 0; a < lay.d; ++a)
    for (int b = a; b < lay.d; ++b)
      cut.terms.emplace_back(lay.sigma(i, a, b),
                             a == b ? -dir[a] * dir[a] : -2.0 * dir[a] * dir[b]);
  cut.rhs = -rhs;
  return cut;
}

StrongConvexityCheck sc_check_cached(const Matrix& sigma, double alpha,
                                     double delta_m,
                                     const SphereCover& cover,
                                     const std::vector<double>& s2,
                                     const InstanceLayout& lay,
                                     int center_index, double tol) {
  StrongConvexityCheck res;
  res.worst_violation = -1e300;
  int worst_k = -1;
  for (size_t k = 0; k < cover.points().size(); ++k) {
    const Vector& dir = cover.points()[k];
    const double form = dir.dot(sigma * dir);
    const double need = alpha * (1.0 + delta_m) * s2[k];
    const double viol = need - form;
    if (viol > res.worst_violation) {
      res.worst_violation = viol;
      worst_k = static_cast<int>(k);
    }
  }
  res.worst_dir = cover.points()[worst_k];
  if (res.worst_violation <= tol) {
    res.certified = true;
  } else {
    res.cut = form_cut(res.worst_dir,
                       alpha * (1.0 + delta_m) * s2[worst_k], lay,
                       center_index,
                       "strong-convexity(" + std::to_string(center_index) +
                           "," + std::to_string(worst_k) + ")");
  }
  return res;
}

}  // namespace

StrongConvexityCheck strong_convexity_cut(const Matrix& sigma,
                                          const ConvexBody& loss_body,
                                          double alpha, double delta_m,
                                          double delta_lin,
                                          const SphereCover& cover,
                                          const InstanceLayout& lay,
                                          int center_index, double tol) {
  return sc_check_cached(sigma, alpha, delta_m, cover,
                         dual_gauge_squares(loss_body, cover, delta_lin), lay,
                         center_index, tol);
}

PsdUpperCheck psd_upper_cut(const Matrix& sigma, double c2,
                            const InstanceLayout& lay, int center_index,
                            double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  if (es.info() != Eigen::Success)
    throw NumericError("psd_upper_cut: eigen decomposition failed");
  PsdUpperCheck res;
  const Eigen::Index last = sigma.rows() - 1;
  res.top_eigenvalue = es.eigenvalues()[last];
  res.top_vector = es.eigenvectors().col(last);
  // Stabilize the eigenvector sign for reproducible cut rows.
  for (Eigen::Index i = 0; i < res.top_vector.size(); ++i) {
    if (res.top_vector[i] != 0) {
      if (res.top_vector[i] < 0) res.top_vector = -res.top_vector;
      break;
    }
  }
  if (res.top_eigenvalue <= c2 + tol) {
    res.ok = true;
    return res;
  }
  ConstraintCut cut;
  cut.tag = "psd-upper(" + std::to_string(center_index) + ")";
  const Vector& u = res.top_vector;
  for (int a = 0; a < lay.d; ++a)
    for (int b = a; b < lay.d; ++b)
      cut.terms.emplace_back(lay.sigma(center_index, a, b),
                             a == b ? u[a] * u[a] : 2.0 * u[a] * u[b]);
  cut.rhs = c2;
  res.cut = cut;
  return res;
}

SolveOutput solve_program(const ConvexBody& action_set,
                          const ConvexBody& loss_body,
                          const SynthesisConfig& config) {
  config.validate(loss_body);
  if (action_set.dim() != loss_body.dim())
    throw ValidationError("solve_program: body dimensions disagree");
  SolveOutput out;
  out.config = config;
  out.grid = discretize_action_set(action_set, config.eps_bar,
                                   config.grid_budget);
  const int N = out.grid.size(), d = action_set.dim();
  InstanceLayout lay{N, d};
  const SphereCover cover = SphereCover::build(d, config.eps_tilde);
  const std::vector<double> s2 =
      dual_gauge_squares(loss_body, cover, config.delta_lin);

  // Variable boxes carry the gradient and value bounds; the sigma box is a
  // wide boundedness anchor only (never meant to bind).
  const int n = lay.num_vars();
  Vector lo(n), hi(n);
  lo[lay.r_global()] = 0;
  hi[lay.r_global()] = config.C0;
  for (int i = 0; i < N; ++i) {
    lo[lay.r(i)] = 0;
    hi[lay.r(i)] = config.C0;
    for (int k = 0; k < d; ++k) {
      lo[lay.v(i, k)] = -config.c0;
      hi[lay.v(i, k)] = config.c0;
    }
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        lo[lay.sigma(i, a, b)] = -4.0 * d * config.c2;
        hi[lay.sigma(i, a, b)] = 4.0 * d * config.c2;
      }
  }
  Vector obj = Vector::Zero(n);
  obj[lay.r_global()] = 1.0;
  SimplexOptions lp_opts;
  // The objective row of this program makes the dual standard form start on
  // a massively degenerate face.  A deterministic objective perturbation at
  // the 1e-11 scale breaks it without touching feasibility; the induced
  // objective error is orders below the cut tolerance.
  lp_opts.rhs_perturb = 1e-11;
  BoxedInequalityLp lp(obj, lo, hi, lp_opts);

  std::vector<ConstraintCut> rows;  // rows actually in the LP, in add order
  const std::vector<ConstraintCut> statics =
      locality_constraints(out.grid, config, lay);
  for (const ConstraintCut& cut : statics) {
    // Grad and value bounds are box-realized; pair and link cuts become rows.
    if (cut.tag.rfind("locality", 0) == 0 ||
        cut.tag.rfind("objective-link", 0) == 0) {
      Vector row = Vector::Zero(n);
      for (const auto& [idx, c] : cut.terms) row[idx] += c;
      lp.add_row(row, cut.rhs);
      rows.push_back(cut);
    }
  }
  out.report.static_cuts = static_cast<int>(statics.size());

  Vector z;
  for (int round = 1; round <= config.max_rounds; ++round) {
    out.report.rounds = round;
    BoxedLpSolution sol = lp.solve();
    out.report.lp_pivots += sol.phase1_pivots + sol.phase2_pivots;
    if (sol.status == LpStatus::kInfeasible) {
      // Summarize the heaviest Farkas rows for the note.
      std::vector<std::pair<double, std::string>> heavy;
      for (size_t k = 0; k < rows.size() && k < static_cast<size_t>(sol.farkas.size()); ++k)
        if (sol.farkas[static_cast<Eigen::Index>(k)] > 1e-9)
          heavy.emplace_back(sol.farkas[static_cast<Eigen::Index>(k)],
                             rows[k].tag);
      std::sort(heavy.rbegin(), heavy.rend());
      std::string note = "infeasible; heaviest Farkas rows:";
      for (size_t k = 0; k < heavy.size() && k < 3; ++k)
        note += " " + heavy[k].second;
      out.report.note = note;
      out.report.feasible = false;
      return out;
    }
    if (sol.status != LpStatus::kOptimal)
      throw NumericError("solve_program: LP did not reach optimality");
    z = sol.z;
    out.instance = ProgramInstance::unpack(z, lay);

    int added = 0;
    for (int i = 0; i < N; ++i) {
      const PsdUpperCheck psd =
          psd_upper_cut(out.instance.sigma_i[i], config.c2, lay, i,
                        config.cut_tol);
      if (!psd.ok) {
        Vector row = Vector::Zero(n);
        for (const auto& [idx, c] : psd.cut->terms) row[idx] += c;
        lp.add_row(row, psd.cut->rhs);
        rows.push_back(*psd.cut);
        ++out.report.psd_cuts;
        ++added;
      }
      const StrongConvexityCheck sc =
          sc_check_cached(out.instance.sigma_i[i], config.alpha,
                          config.delta_m, cover, s2, lay, i, config.cut_tol);
      if (!sc.certified) {
        Vector row = Vector::Zero(n);
        for (const auto& [idx, c] : sc.cut->terms) row[idx] += c;
        lp.add_row(row, sc.cut->rhs);
        rows.push_back(*sc.cut);
        ++out.report.sc_cuts;
        ++added;
      }
    }
    if (added == 0) {
      out.report.feasible = true;
      out.report.certified = true;
      break;
    }
  }
  if (!out.report.certified) {
    out.report.feasible = z.size() > 0;
    out.report.note = "max cut rounds reached without certification";
  }
  if (z.size() > 0) out.report.objective = out.instance.r;

  // Second stage: re-solve with every pair cut uniformly tightened by
  // s_bar * dist^3 and accept the result when its optimum stays within the
  // configured headroom above the certified minimum.  The first-stage
  // simplex returns an arbitrary optimal vertex, which can park distant
  // pieces exactly at their pair bound; at practical grid spacings that
  // destroys locality of the assembled max (a far, flat piece wins the max
  // and its cubic term cancels the curvature).  Exact second-order data of
  // a smooth strongly convex function satisfies every pair cut with margin
  // proportional to dist^3, so the tightened program stays feasible at
  // s_bar = L/96 in the regular regime; on failure the margin halves a few
  // times before giving up.  The reported objective stays the certified
  // minimum of the untightened program.
  if (out.report.certified && config.slack_push > 0 && N > 1) {
    const double obj_star = out.report.objective;
    const double r_cap =
        std::min(config.C0, obj_star + config.slack_push *
                                           std::max(config.C0 - obj_star, 0.0));
    const ProgramInstance stage1 = out.instance;
    bool stage2_done = false;
    // Descend from 8x the ideal-instance margin: exact second-order data of
    // a smooth function tolerates tightening up to 17L/96, and the stronger
    // the enforced margin the more Taylor-consistent the surviving vertex.
    for (int attempt = 0; attempt < 7 && !stage2_done; ++attempt) {
      const double s_bar =
          config.L / 96.0 * 8.0 / static_cast<double>(1 << attempt);
      // Pair rows were added first and in `rows` order, so the row id in the
      // LP equals the index here; rhs rewrites keep the basis warm.
      for (size_t k = 0; k < rows.size(); ++k)
        if (rows[k].slack_scale > 0)
          lp.set_rhs(static_cast<int>(k),
                     rows[k].rhs - s_bar * rows[k].slack_scale);
      ProgramInstance cand;
      bool certified = false;
      for (int round = 1; round <= config.max_rounds; ++round) {
        BoxedLpSolution sol = lp.solve();
        out.report.lp_pivots += sol.phase1_pivots + sol.phase2_pivots;
        if (sol.status != LpStatus::kOptimal) break;  // infeasible or stalled
        cand = ProgramInstance::unpack(sol.z, lay);
        int added = 0;
        for (int i = 0; i < N; ++i) {
          const PsdUpperCheck psd = psd_upper_cut(cand.sigma_i[i], config.c2,
                                                  lay, i, config.cut_tol);
          if (!psd.ok) {
            Vector row = Vector::Zero(n);
            for (const auto& [idx, c] : psd.cut->terms) row[idx] += c;
            lp.add_row(row, psd.cut->rhs);
            rows.push_back(*psd.cut);
            ++out.report.psd_cuts;
            ++added;
          }
          const StrongConvexityCheck sc =
              sc_check_cached(cand.sigma_i[i], config.alpha, config.delta_m,
                              cover, s2, lay, i, config.cut_tol);
          if (!sc.certified) {
            Vector row = Vector::Zero(n);
            for (const auto& [idx, c] : sc.cut->terms) row[idx] += c;
            lp.add_row(row, sc.cut->rhs);
            rows.push_back(*sc.cut);
            ++out.report.sc_cuts;
            ++added;
          }
        }
        if (added == 0) {
          certified = true;
          break;
        }
      }
      if (!certified || cand.r > r_cap) continue;
      out.instance = std::move(cand);
      out.report.slack_floor = s_bar;
      stage2_done = true;
    }
    if (!stage2_done) {
      out.instance = stage1;  // keep the certified first-stage instance
      out.report.note = "slack stage unattainable; first-stage instance kept";
    }
  }

  if (z.size() > 0) {
    const Vector zf = out.instance.pack(lay);
    double worst = 0;
    for (const ConstraintCut& cut : statics)
      worst = std::max(worst, cut.violation(zf));
    for (const ConstraintCut& cut : rows)
      worst = std::max(worst, cut.violation(zf));
    for (int i = 0; i < N; ++i) {
      const auto sc = sc_check_cached(out.instance.sigma_i[i], config.alpha,
                                      config.delta_m, cover, s2, lay, i,
                                      config.cut_tol);
      worst = std::max(worst, sc.worst_violation);
      Eigen::SelfAdjointEigenSolver<Matrix> es(out.instance.sigma_i[i]);
      worst = std::max(
          worst, es.eigenvalues()[d - 1] - config.c2);
    }
    out.report.max_violation = worst;
  }
  return out;
}

SolveOutput solve_with_doubling(const ConvexBody& action_set,
                                const ConvexBody& loss_body, double C_low,
                                const CalibrationOverrides& overrides,
                                int max_doublings) {
  if (!(C_low > 0))
    throw ValidationError("solve_with_doubling: C_low must be positive");
  double C = C_low;
  std::string last_note = "never attempted";
  for (int step = 0; step <= max_doublings; ++step, C *= 2) {
    SynthesisConfig cfg;
    try {
      cfg = calibrate_constants(action_set, loss_body, C, overrides);
    } catch (const ValidationError& e) {
      // Typically the alpha > c2/r^2 precheck at small C; larger C loosens it.
      last_note = e.what();
      continue;
    }
    SolveOutput out = solve_program(action_set, loss_body, cfg);
    if (out.report.feasible && out.report.certified) return out;
    last_note = out.report.note.empty() ? "not certified" : out.report.note;
  }
  throw ValidationError(
      "solve_with_doubling: no feasible C within " +
      std::to_string(max_doublings) + " doublings from " + fmt(C_low) +
      "; last: " + last_note);
}

PiecewiseRegularizer assemble_regularizer(const SolveOutput& out,
                                          const ConvexBody& loss_body,
                                          const std::string& provenance) {
  if (out.instance.r_i.empty())
    throw ValidationError("assemble_regularizer: instance is not solved");
  std::vector<QuasiQuadraticPiece> pieces;
  for (int i = 0; i < out.grid.size(); ++i)
    pieces.emplace_back(out.grid.centers[i], out.instance.r_i[i],
                        out.instance.v_i[i], out.instance.sigma_i[i],
                        out.config.L);
  return PiecewiseRegularizer(std::move(pieces), out.config.alpha / 2.0,
                              loss_body, provenance);
}

ValidationReport validate_instance(const SolveOutput& out,
                                   const ConvexBody& action_set,
                                   const ConvexBody& loss_body) {
  const SynthesisConfig& cfg = out.config;
  const int N = out.grid.size(), d = action_set.dim();
  InstanceLayout lay{N, d};
  const Vector z = out.instance.pack(lay);
  ValidationReport rep;
  for (const ConstraintCut& cut : locality_constraints(out.grid, cfg, lay)) {
    const double viol = cut.violation(z);
    if (cut.tag.rfind("locality", 0) == 0)
      rep.max_pair_violation = std::max(rep.max_pair_violation, viol);
    else if (cut.tag.rfind("grad-bound", 0) == 0)
      rep.max_grad_violation = std::max(rep.max_grad_violation, viol);
    else
      rep.max_value_violation = std::max(rep.max_value_violation, viol);
  }
  const SphereCover fine = SphereCover::build(d, cfg.eps_tilde / 2.0);
  const std::vector<double> s2 =
      dual_gauge_squares(loss_body, fine, cfg.delta_lin);
  // The solver certified the margined level on its own direction cover; at
  // directions it never saw, the certificate only implies that level minus
  // the Lipschitz drift of (curvature - level * dual_gauge^2) across one
  // cover radius.  The finer re-check audits exactly that implied bound.
  const double level = cfg.alpha * (1.0 + cfg.delta_m);
  const double R_loss = loss_body.outer_radius();
  const double slush =
      (2.0 * cfg.c2 + 2.0 * level * R_loss * R_loss) * cfg.eps_tilde;
  for (int i = 0; i < N; ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.instance.sigma_i[i]);
    rep.max_psd_violation =
        std::max(rep.max_psd_violation, es.eigenvalues()[d - 1] - cfg.c2);
    const auto sc = sc_check_cached(out.instance.sigma_i[i], cfg.alpha,
                                    cfg.delta_m, fine, s2, lay, i, cfg.cut_tol);
    rep.max_sc_violation =
        std::max(rep.max_sc_violation, sc.worst_violation - slush);
  }

  const PiecewiseRegularizer g = assemble_regularizer(out, loss_body);
  Rng rng(12345);
  rep.g_range_lo = 1e300;
  rep.g_range_hi = -1e300;
  rep.locality_bound =
      4.0 * std::cbrt(cfg.eps * std::sqrt(d) * cfg.c0 / cfg.L);
  for (int t = 0; t < 500; ++t) {
    const Vector x = sample_body_uniform(action_set, rng);
    const double val = g.value(x);
    rep.g_range_lo = std::min(rep.g_range_lo, val);
    rep.g_range_hi = std::max(rep.g_range_hi, val);
    if (t < 100) {
      const int idx = g.argmax_pieces(x).front();
      rep.locality_worst = std::max(
          rep.locality_worst, (g.pieces()[idx].center - x).norm());
    }
  }
  rep.locality_ok = rep.locality_worst <= rep.locality_bound;

  FunctionView view;
  view.value = [&g](const Vector& x) { return g.value(x); };
  view.gradient = [&g](const Vector& x) { return g.subgradient(x); };
  // The half-modulus claim for the assembled max is sampled on the inner
  // half of the body, where lattice coverage is at full density.
  const ConvexityReport cert = strong_convexity_sampled(
      view, action_set.scaled(0.5), loss_body, cfg.alpha / 2.0, 1000, 777);
  rep.modulus_slack =
      std::min(cert.min_pair_slack, cert.min_curvature_slack);
  return rep;
}

}  // namespace olo
