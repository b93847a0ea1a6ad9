// Primal-dual interior-point backend for ConicProblem.
//
// The problem is handled in "dual" form over free variables y:
//   minimize ½yᵀQy + qᵀy  s.t.  F_k(y) = C_k + Σ_j y_j A_kj ⪰ 0,  E y = f.
// Multipliers X_k ⪰ 0 (one per LMI block) and w (equalities) are iterated
// jointly with y and slacks S_k = F_k(y). Search directions use the HKM
// scaling with a Mehrotra predictor-corrector step.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "dissip/conic.hpp"

namespace dissip {

namespace {

struct Entry {
  int r, c;
  double v;
};

struct BlockVar {
  int var = 0;               // compact variable index
  std::vector<Entry> full;   // both triangles
  std::vector<Entry> upper;  // r ≤ c
};

struct Block {
  int n = 0;
  MatrixXd C;
  std::vector<BlockVar> vars;
};

struct WorkLmi {
  MatrixXd C;
  std::map<int, MatrixXd> A;
  bool strict = false;
};

struct Presolved {
  bool infeasible = false;
  std::string message;
  std::vector<std::optional<double>> fixed;
  std::vector<AffineExpr> equalities;
  std::vector<WorkLmi> lmis;
};

double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

void remove_index(MatrixXd& m, Eigen::Index k) {
  const Eigen::Index n = m.rows();
  MatrixXd out(n - 1, n - 1);
  for (Eigen::Index i = 0, ii = 0; i < n; ++i) {
    if (i == k) continue;
    for (Eigen::Index j = 0, jj = 0; j < n; ++j) {
      if (j == k) continue;
      out(ii, jj++) = m(i, j);
    }
    ++ii;
  }
  m = std::move(out);
}

// Fixed-variable substitution and zero-diagonal facial reduction. A PSD
// matrix with a structurally zero diagonal entry has the whole row zero, so
// the row is replaced by equalities; repeated until nothing changes.
Presolved presolve(const ConicProblem& p) {
  Presolved ps;
  const int m = p.num_variables();
  ps.fixed.assign(m, std::nullopt);
  for (const auto& e : p.equalities()) ps.equalities.push_back(e.expr);
  for (const auto& l : p.lmis()) {
    WorkLmi w;
    const double s = l.sense == LmiSense::psd ? 1.0 : -1.0;
    w.C = s * sym(l.expr.constant_part());
    for (const auto& [v, a] : l.expr.coefficients()) {
      if (!a.isZero(0.0)) w.A.emplace(v, s * sym(a));
    }
    w.strict = l.strict;
    ps.lmis.push_back(std::move(w));
  }

  double eq_scale = 1.0;
  for (const auto& e : ps.equalities) {
    eq_scale = std::max(eq_scale, std::abs(e.constant));
    for (const auto& [v, c] : e.terms) eq_scale = std::max(eq_scale, std::abs(c));
  }
  const double eq_tol = 1e-10 * eq_scale;

  std::vector<bool> consumed;
  bool changed = true;
  while (changed) {
    changed = false;
    consumed.resize(ps.equalities.size(), false);
    for (std::size_t k = 0; k < ps.equalities.size(); ++k) {
      if (consumed[k]) continue;
      AffineExpr& e = ps.equalities[k];
      AffineExpr reduced(e.constant);
      for (const auto& [v, c] : e.terms) {
        if (ps.fixed[v]) {
          reduced.constant += c * *ps.fixed[v];
        } else {
          reduced.terms.emplace_back(v, c);
        }
      }
      e = reduced;
      if (e.terms.empty()) {
        consumed[k] = true;
        if (std::abs(e.constant) > eq_tol) {
          ps.infeasible = true;
          ps.message = "inconsistent equality constraints (residual " + std::to_string(e.constant) + ")";
          return ps;
        }
      } else if (e.terms.size() == 1) {
        ps.fixed[e.terms[0].first] = -e.constant / e.terms[0].second;
        consumed[k] = true;
        changed = true;
      }
    }
    for (auto& l : ps.lmis) {
      for (auto it = l.A.begin(); it != l.A.end();) {
        if (ps.fixed[it->first]) {
          l.C += *ps.fixed[it->first] * it->second;
          it = l.A.erase(it);
        } else {
          ++it;
        }
      }
      bool reduced_row = true;
      while (reduced_row && l.C.rows() > 0) {
        reduced_row = false;
        double scale = max_abs(l.C);
        for (const auto& [v, a] : l.A) scale = std::max(scale, max_abs(a));
        const double zero_tol = 1e-12 * (1.0 + scale);
        for (Eigen::Index r = 0; r < l.C.rows(); ++r) {
          bool has_var = false;
          for (const auto& [v, a] : l.A) {
            if (a(r, r) != 0.0) {
              has_var = true;
              break;
            }
          }
          if (has_var || l.C(r, r) > zero_tol) continue;
          if (l.C(r, r) < -zero_tol) {
            ps.infeasible = true;
            ps.message = "LMI has a negative constant diagonal entry";
            return ps;
          }
          for (Eigen::Index c = 0; c < l.C.rows(); ++c) {
            if (c == r) continue;
            AffineExpr e(l.C(r, c));
            for (const auto& [v, a] : l.A) {
              if (a(r, c) != 0.0) e.terms.emplace_back(v, a(r, c));
            }
            if (!e.terms.empty() || std::abs(e.constant) > zero_tol) ps.equalities.push_back(e);
          }
          remove_index(l.C, r);
          for (auto it = l.A.begin(); it != l.A.end();) {
            remove_index(it->second, r);
            it = it->second.isZero(0.0) ? l.A.erase(it) : std::next(it);
          }
          reduced_row = true;
          changed = true;
          break;
        }
      }
    }
  }
  std::vector<AffineExpr> kept;
  for (std::size_t k = 0; k < ps.equalities.size(); ++k) {
    if (!consumed[k]) kept.push_back(ps.equalities[k]);
  }
  ps.equalities = std::move(kept);
  std::erase_if(ps.lmis, [](const WorkLmi& l) { return l.C.rows() == 0; });
  return ps;
}

struct Compiled {
  int m = 0;
  std::vector<int> original;  // compact -> original variable
  std::vector<Block> blocks;
  MatrixXd E;
  VectorXd f;
  MatrixXd Q;
  VectorXd q;
  double q0 = 0.0;
  bool has_quadratic = false;
};

Compiled compile(const ConicProblem& p, const Presolved& ps, const SolveOptions& opts) {
  Compiled cp;
  const int n_orig = p.num_variables();
  std::vector<bool> used(n_orig, false);
  for (const auto& e : ps.equalities) {
    for (const auto& [v, c] : e.terms) used[v] = true;
  }
  for (const auto& l : ps.lmis) {
    for (const auto& [v, a] : l.A) used[v] = true;
  }
  for (const auto& [e, w] : p.squared_objective()) {
    for (const auto& [v, c] : e.terms) {
      if (!ps.fixed[v]) used[v] = true;
    }
  }
  for (const auto& [v, c] : p.linear_objective().terms) {
    if (!ps.fixed[v]) used[v] = true;
  }
  std::vector<int> compact(n_orig, -1);
  for (int v = 0; v < n_orig; ++v) {
    if (used[v] && !ps.fixed[v]) {
      compact[v] = cp.m++;
      cp.original.push_back(v);
    }
  }

  for (const auto& l : ps.lmis) {
    Block b;
    b.n = static_cast<int>(l.C.rows());
    b.C = l.C;
    if (l.strict) b.C -= opts.strict_margin * MatrixXd::Identity(b.n, b.n);
    double scale = max_abs(b.C);
    for (const auto& [v, a] : l.A) scale = std::max(scale, max_abs(a));
    const double s = scale > 0 ? 1.0 / scale : 1.0;
    b.C *= s;
    for (const auto& [v, a] : l.A) {
      BlockVar bv;
      bv.var = compact[v];
      for (int r = 0; r < b.n; ++r) {
        for (int c = 0; c < b.n; ++c) {
          if (a(r, c) == 0.0) continue;
          bv.full.push_back({r, c, s * a(r, c)});
          if (r <= c) bv.upper.push_back({r, c, s * a(r, c)});
        }
      }
      if (!bv.full.empty()) b.vars.push_back(std::move(bv));
    }
    std::sort(b.vars.begin(), b.vars.end(), [](const BlockVar& a, const BlockVar& c) { return a.var < c.var; });
    cp.blocks.push_back(std::move(b));
  }

  const int meq = static_cast<int>(ps.equalities.size());
  cp.E = MatrixXd::Zero(meq, cp.m);
  cp.f = VectorXd::Zero(meq);
  for (int k = 0; k < meq; ++k) {
    const auto& e = ps.equalities[k];
    double scale = 0.0;
    for (const auto& [v, c] : e.terms) scale = std::max(scale, std::abs(c));
    const double s = scale > 0 ? 1.0 / scale : 1.0;
    for (const auto& [v, c] : e.terms) cp.E(k, compact[v]) += s * c;
    cp.f(k) = -s * e.constant;
  }

  cp.Q = MatrixXd::Zero(cp.m, cp.m);
  cp.q = VectorXd::Zero(cp.m);
  cp.q0 = p.linear_objective().constant;
  for (const auto& [v, c] : p.linear_objective().terms) {
    if (ps.fixed[v]) {
      cp.q0 += c * *ps.fixed[v];
    } else {
      cp.q(compact[v]) += c;
    }
  }
  for (const auto& [e, w] : p.squared_objective()) {
    double a0 = e.constant;
    std::vector<std::pair<int, double>> a;
    for (const auto& [v, c] : e.terms) {
      if (ps.fixed[v]) {
        a0 += c * *ps.fixed[v];
      } else {
        a.emplace_back(compact[v], c);
      }
    }
    cp.q0 += w * a0 * a0;
    for (const auto& [i, ci] : a) {
      cp.q(i) += 2.0 * w * a0 * ci;
      for (const auto& [j, cj] : a) cp.Q(i, j) += 2.0 * w * ci * cj;
    }
    cp.has_quadratic = cp.has_quadratic || !a.empty();
  }
  return cp;
}

// ------------------------------------------------------------ IPM helpers

MatrixXd apply_A(const Block& b, const VectorXd& y) {
  MatrixXd out = MatrixXd::Zero(b.n, b.n);
  for (const auto& bv : b.vars) {
    const double yj = y(bv.var);
    if (yj == 0.0) continue;
    for (const auto& e : bv.full) out(e.r, e.c) += yj * e.v;
  }
  return out;
}

// out_j += A_j • G for symmetric G.
void add_adjoint(const Block& b, const MatrixXd& g, VectorXd& out) {
  for (const auto& bv : b.vars) {
    double s = 0.0;
    for (const auto& e : bv.upper) s += (e.r == e.c ? 1.0 : 2.0) * e.v * g(e.r, e.c);
    out(bv.var) += s;
  }
}

// H_ij += tr(A_i X A_j S⁻¹)
void add_schur(const Block& b, const MatrixXd& x, const MatrixXd& sinv, MatrixXd& h) {
  const int n = b.n;
  std::size_t nnz_total = 0;
  for (const auto& bv : b.vars) nnz_total += bv.full.size();
  const double dense_cost = static_cast<double>(n) * n * n;
  MatrixXd t(n, n), g(n, n);
  for (const auto& bj : b.vars) {
    const double nnz_j = static_cast<double>(bj.full.size());
    if (dense_cost + n * nnz_j < nnz_j * static_cast<double>(nnz_total)) {
      t.setZero();
      for (const auto& e : bj.full) t.col(e.c) += e.v * x.col(e.r);
      g.noalias() = t * sinv;
      for (const auto& bi : b.vars) {
        double s = 0.0;
        for (const auto& e : bi.full) s += e.v * g(e.c, e.r);
        h(bi.var, bj.var) += s;
      }
    } else {
      for (const auto& bi : b.vars) {
        double s = 0.0;
        for (const auto& ei : bi.full) {
          for (const auto& ej : bj.full) s += ei.v * ej.v * x(ei.c, ej.r) * sinv(ej.c, ei.r);
        }
        h(bi.var, bj.var) += s;
      }
    }
  }
}

// Largest α ≤ cap with M + α dM ⪰ 0, given M ≻ 0.
double max_step(const MatrixXd& m, const MatrixXd& dm) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd l_inv_dm = llt.matrixL().solve(dm);
  MatrixXd w = llt.matrixL().solve(l_inv_dm.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(w), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

struct IpmResult {
  VectorXd y;
  double pinf = 0, dinf = 0, gap = 0;
  int iterations = 0;
  bool infeasible = false;
  std::string message;
};

IpmResult run_ipm(const Compiled& cp, const SolveOptions& opts) {
  const int m = cp.m;
  const int meq = static_cast<int>(cp.E.rows());
  const int nb = static_cast<int>(cp.blocks.size());
  int n_tot = 0;
  for (const auto& b : cp.blocks) n_tot += b.n;

  IpmResult res;
  VectorXd y = VectorXd::Zero(m);
  VectorXd w = VectorXd::Zero(meq);
  std::vector<MatrixXd> X(nb), S(nb), Sinv(nb);
  double normC = 0.0;
  for (int k = 0; k < nb; ++k) {
    const auto& b = cp.blocks[k];
    double amax = 0.0;
    for (const auto& bv : b.vars) {
      double s = 0.0;
      for (const auto& e : bv.full) s += e.v * e.v;
      amax = std::max(amax, std::sqrt(s));
    }
    const double xi_x = std::max(10.0, std::sqrt(static_cast<double>(b.n)));
    const double xi_s = std::max({10.0, std::sqrt(static_cast<double>(b.n)), b.C.norm(), amax});
    X[k] = xi_x * MatrixXd::Identity(b.n, b.n);
    S[k] = xi_s * MatrixXd::Identity(b.n, b.n);
    normC += b.C.squaredNorm();
  }
  normC = std::sqrt(normC);
  const double normf = cp.f.norm();
  const double normq = cp.q.norm();

  std::vector<MatrixXd> rs(nb), dX(nb), dS(nb), dXa(nb), dSa(nb);
  int stalls = 0;
  const double tau = 0.98;
  // Best iterate seen so far; once tol_gap is met we keep iterating a little
  // to sharpen the point, since degenerate projections converge like sqrt(mu).
  IpmResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  int no_gain = 0;

  for (int it = 0; it <= opts.max_iterations; ++it) {
    // Residuals.
    VectorXd astar_x = VectorXd::Zero(m);
    double xs = 0.0, cx = 0.0, rs_norm = 0.0;
    for (int k = 0; k < nb; ++k) {
      const auto& b = cp.blocks[k];
      rs[k] = b.C + apply_A(b, y) - S[k];
      rs_norm += rs[k].squaredNorm();
      add_adjoint(b, X[k], astar_x);
      xs += (X[k].cwiseProduct(S[k])).sum();
      cx += (b.C.cwiseProduct(X[k])).sum();
    }
    rs_norm = std::sqrt(rs_norm);
    const VectorXd rd = cp.Q * y + cp.q - astar_x - cp.E.transpose() * w;
    const VectorXd re = cp.E * y - cp.f;
    const double mu = n_tot > 0 ? xs / n_tot : 0.0;
    const double phi = 0.5 * y.dot(cp.Q * y) + cp.q.dot(y) + cp.q0;

    res.pinf = std::max(rs_norm / (1.0 + normC), re.norm() / (1.0 + normf));
    res.dinf = rd.norm() / (1.0 + normq);
    res.gap = std::max(0.0, xs) / (1.0 + std::abs(phi));
    res.iterations = it;
    res.y = y;
    const double merit = std::max({res.pinf, res.dinf, res.gap});
    if (merit < 0.5 * best_merit) {
      no_gain = 0;
    } else {
      ++no_gain;
    }
    if (merit < best_merit) {
      best_merit = merit;
      best = res;
    }
    if (opts.verbose) {
      double xmax = 0.0;
      for (const auto& xk : X) xmax = std::max(xmax, xk.norm());
      std::fprintf(stderr, "ipm %3d  pinf %.2e  dinf %.2e  gap %.2e  mu %.2e  obj %.6e  |X| %.1e |w| %.1e\n", it,
                   res.pinf, res.dinf, res.gap, mu, phi, xmax, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
    }
    if (best_merit <= opts.tol_gap && (merit <= 1e-4 * opts.tol_gap || no_gain >= 2)) return best;
    if (it == opts.max_iterations || stalls >= 3) return best_merit <= opts.tol_gap ? best : res;

    // Farkas-type certificate: X ⪰ 0, w with A*(X) + Eᵀw ≈ 0 and C•X − fᵀw < 0.
    if (it >= 5) {
      const double val = cx - cp.f.dot(w);
      if (val < 0) {
        const double ratio = (astar_x + cp.E.transpose() * w).norm() / -val;
        if (ratio < 1e-8) {
          res.infeasible = true;
          res.message = "dual certificate of infeasibility (normalized residual " + std::to_string(ratio) + ")";
          return res;
        }
      }
    }

    // Schur complement and KKT factorization.
    MatrixXd H = cp.Q;
    for (int k = 0; k < nb; ++k) {
      Eigen::LLT<MatrixXd> llt(S[k]);
      Sinv[k] = llt.solve(MatrixXd::Identity(cp.blocks[k].n, cp.blocks[k].n));
      Sinv[k] = sym(Sinv[k]);
      add_schur(cp.blocks[k], X[k], Sinv[k], H);
    }
    H = sym(H);
    // Symmetric diagonal equilibration of the KKT matrix.
    VectorXd scale(m + meq);
    for (int i = 0; i < m; ++i) scale(i) = 1.0 / std::sqrt(std::max(std::abs(H(i, i)), 1e-12));
    for (int k = 0; k < meq; ++k) {
      const double rn = (cp.E.row(k).transpose().cwiseProduct(scale.head(m))).norm();
      scale(m + k) = rn > 0 ? 1.0 / rn : 1.0;
    }
    MatrixXd K0 = MatrixXd::Zero(m + meq, m + meq);
    K0.topLeftCorner(m, m) = H;
    K0.topRightCorner(m, meq) = cp.E.transpose();
    K0.bottomLeftCorner(meq, m) = cp.E;
    K0 = scale.asDiagonal() * K0 * scale.asDiagonal();
    MatrixXd K = K0;
    K.topLeftCorner(m, m).diagonal().array() += 1e-14;
    K.bottomRightCorner(meq, meq).diagonal().array() -= 1e-14;
    Eigen::PartialPivLU<MatrixXd> lu(K);

    auto kkt_solve = [&](const VectorXd& rhs) {
      const VectorXd b = scale.cwiseProduct(rhs);
      VectorXd sol = lu.solve(b);
      double prev = (b - K0 * sol).norm();
      for (int r = 0; r < 5 && prev > 1e-15 * b.norm(); ++r) {
        const VectorXd cand = sol + lu.solve(b - K0 * sol);
        const double res = (b - K0 * cand).norm();
        if (res >= prev) break;
        sol = cand;
        prev = res;
      }
      return VectorXd(scale.cwiseProduct(sol));
    };

    // Solves for a direction with complementarity target Gc (per block).
    auto direction = [&](const std::vector<MatrixXd>& gc, VectorXd& dy, VectorXd& dw, std::vector<MatrixXd>& dx,
                         std::vector<MatrixXd>& ds) {
      VectorXd rhs1 = -rd;
      for (int k = 0; k < nb; ++k) {
        add_adjoint(cp.blocks[k], sym(gc[k]), rhs1);
        VectorXd tmp = VectorXd::Zero(m);
        add_adjoint(cp.blocks[k], sym(X[k] * rs[k] * Sinv[k]), tmp);
        rhs1 -= tmp;
      }
      VectorXd rhs(m + meq);
      rhs << rhs1, -re;
      const VectorXd sol = kkt_solve(rhs);
      dy = sol.head(m);
      dw = -sol.tail(meq);
      for (int k = 0; k < nb; ++k) {
        ds[k] = apply_A(cp.blocks[k], dy) + rs[k];
        dx[k] = sym(gc[k] - X[k] * ds[k] * Sinv[k]);
      }
    };

    auto step_lengths = [&](const std::vector<MatrixXd>& dx, const std::vector<MatrixXd>& ds) {
      double ap = std::numeric_limits<double>::infinity(), ad = ap;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(X[k], dx[k]));
        ad = std::min(ad, max_step(S[k], ds[k]));
      }
      return std::make_pair(ap, ad);
    };

    // Predictor.
    std::vector<MatrixXd> gc(nb);
    for (int k = 0; k < nb; ++k) gc[k] = -X[k];
    VectorXd dy, dw, dya, dwa;
    direction(gc, dya, dwa, dXa, dSa);
    auto [ap, ad] = step_lengths(dXa, dSa);
    const double aa = std::min({1.0, ap, ad});
    double sigma = 0.0;
    if (n_tot > 0 && mu > 0) {
      double xs_aff = 0.0;
      for (int k = 0; k < nb; ++k) xs_aff += ((X[k] + aa * dXa[k]).cwiseProduct(S[k] + aa * dSa[k])).sum();
      const double mu_aff = xs_aff / n_tot;
      sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);
    }
    // Corrector.
    for (int k = 0; k < nb; ++k) gc[k] = sigma * mu * Sinv[k] - X[k] - dXa[k] * dSa[k] * Sinv[k];
    direction(gc, dy, dw, dX, dS);
    std::tie(ap, ad) = step_lengths(dX, dS);
    const double alpha = std::min({1.0, tau * ap, tau * ad});
    if (alpha < 1e-10) {
      ++stalls;
    } else {
      stalls = 0;
    }
    y += alpha * dy;
    w += alpha * dw;
    for (int k = 0; k < nb; ++k) {
      X[k] = sym(X[k] + alpha * dX[k]);
      S[k] = sym(S[k] + alpha * dS[k]);
    }
  }
  return res;
}

}  // namespace

SolveReport solve(const ConicProblem& problem, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  auto finish = [&]() {
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  };

  const Presolved ps = presolve(problem);
  if (ps.infeasible) {
    rep.status = SolveStatus::Infeasible;
    rep.message = "presolve: " + ps.message;
    return finish();
  }
  const Compiled cp = compile(problem, ps, opts);
  const IpmResult ipm = run_ipm(cp, opts);
  rep.iterations = ipm.iterations;
  rep.dual_residual = ipm.dinf;
  rep.gap = ipm.gap;
  if (ipm.infeasible) {
    rep.status = SolveStatus::Infeasible;
    rep.message = ipm.message;
    return finish();
  }

  VectorXd values = VectorXd::Zero(problem.num_variables());
  for (int v = 0; v < problem.num_variables(); ++v) {
    if (ps.fixed[v]) values(v) = *ps.fixed[v];
  }
  for (int j = 0; j < cp.m; ++j) values(cp.original[j]) = ipm.y(j);

  // Residuals against the original (unreduced, unshifted) problem.
  auto max_eq_viol = [&]() {
    double v = 0.0;
    for (const auto& e : problem.equalities()) v = std::max(v, std::abs(e.expr.eval(values)));
    return v;
  };
  double eq_viol = max_eq_viol();
  if (eq_viol > opts.tol_eq * std::max(1.0, values.cwiseAbs().maxCoeff()) && cp.m > 0) {
    // Minimum-norm correction onto the equality set over the free variables.
    std::vector<int> col(problem.num_variables(), -1);
    for (int j = 0; j < cp.m; ++j) col[cp.original[j]] = j;
    const int ne = static_cast<int>(problem.equalities().size());
    MatrixXd E = MatrixXd::Zero(ne, cp.m);
    VectorXd r(ne);
    for (int k = 0; k < ne; ++k) {
      const auto& ex = problem.equalities()[k].expr;
      for (const auto& [v, c] : ex.terms) {
        if (col[v] >= 0) E(k, col[v]) = c;
      }
      r(k) = ex.eval(values);
    }
    MatrixXd G = E * E.transpose();
    G.diagonal().array() += 1e-14 * (1.0 + G.diagonal().maxCoeff());
    const VectorXd dy = E.transpose() * G.ldlt().solve(r);
    VectorXd trial = values;
    for (int j = 0; j < cp.m; ++j) trial(cp.original[j]) -= dy(j);
    std::swap(values, trial);
    const double polished = max_eq_viol();
    if (polished < eq_viol) {
      eq_viol = polished;
    } else {
      std::swap(values, trial);
    }
  }
  double psd_viol = 0.0;
  for (const auto& l : problem.lmis()) {
    MatrixXd f = l.expr.eval(values);
    if (l.sense == LmiSense::nsd) f = -f;
    const double lmin = lambda_min(f);
    psd_viol = std::max(psd_viol, -lmin / (1.0 + sym_norm(f)));
  }
  rep.primal_residual = std::max(eq_viol, psd_viol);
  rep.objective = problem.objective_value(values);

  const double worst = std::max({ipm.pinf, ipm.dinf, ipm.gap});
  const bool constraints_ok = eq_viol <= opts.tol_eq * std::max(1.0, values.cwiseAbs().maxCoeff()) &&
                              psd_viol <= opts.tol_psd;
  if (worst <= opts.tol_gap && constraints_ok) {
    rep.status = SolveStatus::Optimal;
  } else if (worst <= opts.tol_inaccurate) {
    rep.status = SolveStatus::Inaccurate;
  } else {
    rep.status = SolveStatus::IterationLimit;
    rep.message = "no convergence (worst residual " + std::to_string(worst) + ")";
    return finish();
  }
  rep.values = std::move(values);
  return finish();
}

}  // namespace dissip
