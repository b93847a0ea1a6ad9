#include "dissip/global_cert.hpp"

#include <chrono>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dissip {

namespace {

MatrixXd interconnection_map(const MatrixXd& M, const Dims& dims) {
  MatrixXd MI(M.rows() + M.cols(), M.cols());
  MI << M, MatrixXd::Identity(M.cols(), M.cols());
  return build_permutation(dims) * MI;
}

AffineMatrix supply_blocks(const std::vector<AffineMatrix>& xs, const MatrixXd& W) {
  Eigen::Index n = W.rows();
  for (const auto& x : xs) n += x.rows();
  AffineMatrix Q(n, n);
  Eigen::Index off = 0;
  for (const auto& x : xs) {
    Q.add_block(off, off, x);
    off += x.rows();
  }
  Q.add_block(off, off, AffineMatrix::constant(-W));
  return Q;
}

void check_sizes(const std::vector<Eigen::Index>& rows, const GlobalProblem& gp) {
  if (static_cast<int>(rows.size()) != gp.dims.n()) throw std::invalid_argument("wrong number of supply rates");
  for (int i = 0; i < gp.dims.n(); ++i) {
    if (rows[i] != gp.supply_dim(i)) {
      throw std::invalid_argument("supply rate " + std::to_string(i + 1) + " has size " + std::to_string(rows[i]) +
                                  ", expected " + std::to_string(gp.supply_dim(i)));
    }
  }
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

GlobalProblem GlobalProblem::from(const Problem& p) {
  GlobalProblem gp;
  gp.M = p.M;
  gp.dims = p.dims();
  gp.W = p.W();
  gp.iqc = p.iqc;
  gp.pins = p.pins;
  return gp;
}

int GlobalProblem::supply_dim(int i) const {
  if (iqc) return iqc->psi.at(i).outputs();
  return dims.m.at(i) + dims.p.at(i);
}

int GlobalProblem::filter_states() const {
  if (!iqc) return 0;
  int n = iqc->psi_w.states();
  for (const auto& r : iqc->psi) n += r.states();
  return n;
}

StackedFilter stacked_filter(const GlobalProblem& gp) {
  const MatrixXd T = interconnection_map(gp.M, gp.dims);
  StackedFilter f;
  if (!gp.iqc) {
    f.A = MatrixXd::Zero(0, 0);
    f.B = MatrixXd::Zero(0, T.cols());
    f.C = MatrixXd::Zero(T.rows(), 0);
    f.D = T;
    return f;
  }
  std::vector<MatrixXd> a, b, c, d;
  auto push = [&](const Realization& r) {
    if (!is_hurwitz(r)) throw std::invalid_argument("iqc filter is not Hurwitz");
    a.push_back(r.A);
    b.push_back(r.B);
    c.push_back(r.C);
    d.push_back(r.D);
  };
  for (const auto& r : gp.iqc->psi) push(r);
  push(gp.iqc->psi_w);
  const MatrixXd Bs = blkdiag(b), Ds = blkdiag(d);
  if (Ds.cols() != T.rows()) throw std::invalid_argument("iqc filter inputs do not match the interconnection");
  f.A = blkdiag(a);
  f.B = Bs * T;
  f.C = blkdiag(c);
  f.D = Ds * T;
  return f;
}

AffineMatrix assemble_static_lmi(const std::vector<AffineMatrix>& xs, const MatrixXd& W, const MatrixXd& M,
                                 const Dims& dims) {
  if (static_cast<int>(xs.size()) != dims.n()) throw std::invalid_argument("wrong number of supply rates");
  for (int i = 0; i < dims.n(); ++i) {
    if (xs[i].rows() != dims.m[i] + dims.p[i]) throw std::invalid_argument("supply rate size mismatch");
  }
  if (W.rows() != dims.pd + dims.me) throw std::invalid_argument("W size mismatch");
  return congruence(interconnection_map(M, dims), supply_blocks(xs, W));
}

MatrixXd assemble_static_lmi(const std::vector<MatrixXd>& xs, const MatrixXd& W, const MatrixXd& M,
                             const Dims& dims) {
  return assembled_form(xs, W, M, dims);
}

AffineMatrix assemble_iqc_lmi(const std::vector<AffineMatrix>& xs, const AffineMatrix& P, const GlobalProblem& gp) {
  std::vector<Eigen::Index> rows;
  for (const auto& x : xs) rows.push_back(x.rows());
  check_sizes(rows, gp);
  const StackedFilter f = stacked_filter(gp);
  const Eigen::Index ns = f.A.rows(), nv = f.D.cols();
  if (P.rows() != ns || P.cols() != ns) throw std::invalid_argument("P has the wrong size");
  if (gp.W.rows() != f.C.rows() - std::accumulate(rows.begin(), rows.end(), Eigen::Index{0})) {
    throw std::invalid_argument("W size mismatch");
  }
  MatrixXd CD(f.C.rows(), ns + nv);
  CD << f.C, f.D;
  AffineMatrix L = congruence(CD, supply_blocks(xs, gp.W));
  if (ns > 0) {
    MatrixXd Ea(ns, ns + nv);
    Ea << f.A, f.B;
    // [ÂᵀP+PÂ, PB̂; B̂ᵀP, 0] = EᵀP Ea + EaᵀP E with E = [I 0].
    MatrixXd E = MatrixXd::Zero(ns, ns + nv);
    E.leftCols(ns).setIdentity();
    const AffineMatrix PEa = P * Ea;
    const AffineMatrix cross = E.transpose() * PEa;
    L += cross;
    L += cross.transpose();
  }
  return L;
}

GlobalCheck check_global(const std::vector<MatrixXd>& xs, const GlobalProblem& gp, double tol,
                         const SolveOptions& opts, bool strict) {
  std::vector<Eigen::Index> rows;
  for (const auto& x : xs) rows.push_back(x.rows());
  check_sizes(rows, gp);
  GlobalCheck out;
  const int ns = gp.filter_states();
  if (ns == 0) {
    MatrixXd L;
    if (gp.iqc) {
      std::vector<AffineMatrix> ax;
      for (const auto& x : xs) ax.push_back(AffineMatrix::constant(x));
      L = assemble_iqc_lmi(ax, AffineMatrix(0, 0), gp).eval(VectorXd());
    } else {
      L = assemble_static_lmi(xs, gp.W, gp.M, gp.dims);
    }
    L = sym(L);
    out.lambda_max = L.size() ? lambda_max(L) : 0.0;
    out.tol = tol >= 0 ? tol : 1e-7 * (1.0 + sym_norm(L));
    if (strict) {
      // Directions the form does not depend on at all carry no strictness.
      std::vector<int> keep;
      const double zero = 1e-14 * (1.0 + sym_norm(L));
      for (int r = 0; r < L.rows(); ++r) {
        if (L.row(r).cwiseAbs().maxCoeff() > zero) keep.push_back(r);
      }
      const MatrixXd Lr = L(keep, keep);
      out.lambda_max = Lr.size() ? lambda_max(Lr) : -out.tol;
    }
    out.ok = out.lambda_max <= (strict ? -out.tol : out.tol);
    out.P = MatrixXd::Zero(0, 0);
    return out;
  }

  // Phase-I: minimize s with LMI(P) ⪯ sI, P ⪰ 0, bounded P and s.
  ConicProblem prob;
  const SymVar pv = prob.add_symmetric(ns, "P");
  const int s = prob.add_scalar("s");
  std::vector<AffineMatrix> ax;
  double qnorm = sym_norm(gp.W);
  for (const auto& x : xs) {
    ax.push_back(AffineMatrix::constant(x));
    qnorm = std::max(qnorm, sym_norm(x));
  }
  const AffineMatrix P = AffineMatrix::variable(pv);
  AffineMatrix L = assemble_iqc_lmi(ax, P, gp);
  AffineMatrix shift(L.rows(), L.cols());
  for (Eigen::Index k = 0; k < L.rows(); ++k) shift.add_entry(k, k, AffineExpr::variable(s));
  prob.add_lmi(L - shift, LmiSense::nsd, false, "phase1");
  prob.add_psd(pv, false, "P");
  AffineExpr trace(-1e4 * (1.0 + qnorm) * ns);
  for (int k = 0; k < ns; ++k) trace += AffineExpr::variable(pv.index(k, k));
  prob.add_lmi(AffineMatrix::scalar(trace), LmiSense::nsd, false, "trace bound");
  prob.add_lmi(AffineMatrix::scalar(AffineExpr::variable(s) + 1.0), LmiSense::psd, false, "s bound");
  prob.add_linear_objective(AffineExpr::variable(s));
  const SolveReport r = solve(prob, opts);
  if (!r.has_values()) {
    out.message = "phase-1 solve failed: " + r.message;
    out.lambda_max = std::numeric_limits<double>::infinity();
    return out;
  }
  out.P = sym(r.value(pv));
  const MatrixXd Lv = sym(L.eval(r.values));
  out.lambda_max = lambda_max(Lv);
  out.tol = tol >= 0 ? tol : 1e-7 * (1.0 + sym_norm(Lv));
  out.ok = out.lambda_max <= (strict ? -out.tol : out.tol) && lambda_min(out.P) >= -1e-9 * (1.0 + sym_norm(out.P));
  return out;
}

GlobalCertificate global_update(const std::vector<MatrixXd>& targets, const GlobalProblem& gp,
                                const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Eigen::Index> rows;
  for (const auto& t : targets) rows.push_back(t.rows());
  check_sizes(rows, gp);
  const int n = gp.dims.n();
  ConicProblem prob;
  std::vector<SymVar> zv;
  std::vector<AffineMatrix> az;
  for (int i = 0; i < n; ++i) {
    zv.push_back(prob.add_symmetric(gp.supply_dim(i), "Z" + std::to_string(i + 1)));
    az.push_back(AffineMatrix::variable(zv.back()));
    prob.add_distance_objective(az.back(), targets[i]);
  }
  for (const auto& pin : gp.pins) {
    const SymVar& z = zv.at(pin.subsystem);
    prob.add_equality(AffineExpr::variable(z.index(pin.row, pin.col)) - pin.value,
                      "pin Z" + std::to_string(pin.subsystem + 1));
  }
  const int ns = gp.filter_states();
  SymVar pv;
  AffineMatrix L;
  if (gp.iqc) {
    AffineMatrix P(0, 0);
    if (ns > 0) {
      pv = prob.add_symmetric(ns, "P");
      prob.add_psd(pv, false, "P");
      P = AffineMatrix::variable(pv);
    }
    L = assemble_iqc_lmi(az, P, gp);
  } else {
    L = assemble_static_lmi(az, gp.W, gp.M, gp.dims);
  }
  prob.add_lmi(L, LmiSense::nsd, true, "G");

  const SolveReport r = solve(prob, opts);
  GlobalCertificate cert;
  cert.status = r.status;
  cert.message = r.message;
  if (r.has_values()) {
    for (int i = 0; i < n; ++i) {
      cert.Z.push_back(sym(r.value(zv[i])));
      cert.distance += (cert.Z.back() - targets[i]).squaredNorm();
    }
    // Pinned entries are set exactly.
    for (const auto& pin : gp.pins) {
      cert.Z[pin.subsystem](pin.row, pin.col) = pin.value;
      cert.Z[pin.subsystem](pin.col, pin.row) = pin.value;
    }
    cert.P = ns > 0 ? MatrixXd(sym(r.value(pv))) : MatrixXd::Zero(0, 0);
    const MatrixXd Lv = sym(L.eval(r.values));
    cert.lambda_max = Lv.size() ? lambda_max(Lv) : 0.0;
  }
  cert.wall_ms = ms_since(t0);
  return cert;
}

long iqc_decision_variables(const GlobalProblem& gp) {
  const long ns = gp.filter_states();
  long total = ns * (ns + 1) / 2;
  for (int i = 0; i < gp.dims.n(); ++i) {
    const long d = gp.supply_dim(i);
    total += d * (d + 1) / 2;
  }
  return total;
}

}  // namespace dissip
