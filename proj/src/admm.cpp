#include "dissip/admm.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace dissip {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const char* status_word(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Inaccurate: return "inaccurate";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

SolveOptions loosened(SolveOptions s) {
  s.tol_eq *= 10;
  s.tol_psd *= 10;
  s.tol_gap *= 10;
  s.tol_inaccurate *= 10;
  return s;
}

void apply_pins(MatrixXd& x, const std::vector<Pin>& pins) {
  for (const auto& p : pins) {
    x(p.row, p.col) = p.value;
    x(p.col, p.row) = p.value;
  }
}

double tuple_norm(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return std::sqrt(s);
}

// Runs f(i) for i in [0, n) on up to `width` threads.
template <class F>
void parallel_for(int n, int width, F&& f) {
  if (width <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < std::min(width, n); ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) f(i);
    });
  }
}

}  // namespace

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Certified: return "Certified";
    case Outcome::IterationLimit: return "IterationLimit";
    case Outcome::Stalled: return "Stalled";
    case Outcome::ConfigError: return "ConfigError";
    case Outcome::SolverError: return "SolverError";
  }
  return "?";
}

CertResult run(const Problem& problem, const AdmmOptions& opts) {
  const auto t0 = Clock::now();
  CertResult res;
  res.warnings = validate(problem);
  const int n = static_cast<int>(problem.subsystems.size());

  GlobalProblem gp = GlobalProblem::from(problem);
  std::vector<std::vector<Pin>> pins(n);
  for (const auto& p : problem.pins) pins.at(p.subsystem).push_back(p);
  // Fixed supply rates are constants of the global problem as well.
  for (int i = 0; i < n; ++i) {
    if (const auto* f = std::get_if<FixedSupplySubsystem>(&problem.subsystems[i])) {
      for (int r = 0; r < f->X.rows(); ++r) {
        for (int c = r; c < f->X.cols(); ++c) gp.pins.push_back({i, r, c, f->X(r, c)});
      }
    }
  }

  std::vector<MatrixXd> Z(n), L(n), X(n);
  for (int i = 0; i < n; ++i) {
    const int d = problem.supply_dim(i);
    Z[i] = opts.z0.empty() ? MatrixXd::Zero(d, d) : opts.z0.at(i);
    L[i] = opts.lambda0.empty() ? MatrixXd::Zero(d, d) : opts.lambda0.at(i);
    apply_pins(Z[i], pins[i]);
  }
  const int width = opts.threads > 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<LocalCertificate> certs(n);
  std::vector<double> residuals;

  auto finish = [&](Outcome o, std::string msg) {
    res.outcome = o;
    res.message = std::move(msg);
    res.X = X;
    res.Z = Z;
    res.Lambda = L;
    res.local = certs;
    res.wall_ms = ms_since(t0);
    return res;
  };

  for (int k = 1; k <= opts.max_iters; ++k) {
    res.iterations = k;
    // X-update.
    std::vector<std::string> errors(n);
    parallel_for(n, width, [&](int i) {
      LocalTarget tgt{Z[i] - L[i], pins[i]};
      LocalCertificate c = local_update(problem, i, tgt, opts.local);
      if (!c.ok() && c.status != SolveStatus::Infeasible) {
        LocalOptions loose = opts.local;
        loose.solve = loosened(loose.solve);
        loose.verify_tol *= 10;
        c = local_update(problem, i, tgt, loose);
      }
      if (c.status == SolveStatus::Infeasible) {
        errors[i] = "config";
      } else if (!c.ok()) {
        errors[i] = "solver";
      }
      certs[i] = std::move(c);
    });
    for (int i = 0; i < n; ++i) {
      if (errors[i] == "config") {
        return finish(Outcome::ConfigError,
                      "local set of subsystem " + std::to_string(i + 1) + " is empty: " + certs[i].message);
      }
      if (errors[i] == "solver") {
        return finish(Outcome::SolverError, "local update of subsystem " + std::to_string(i + 1) +
                                                " failed after retry: " + certs[i].message);
      }
      X[i] = certs[i].X;
      apply_pins(X[i], pins[i]);
    }

    // Termination test on the fresh X tuple.
    const GlobalCheck chk = check_global(X, gp, -1.0, opts.global, true);
    IterationRecord rec;
    rec.k = k;
    rec.global_lambda_max = chk.lambda_max;
    for (const auto& c : certs) rec.local_statuses.push_back(status_word(c.status));
    if (chk.ok) {
      rec.primal_residual = tuple_norm(X, Z);
      rec.wall_ms = ms_since(t0);
      res.trace.push_back(rec);
      if (opts.keep_history) {
        res.x_history.push_back(X);
        res.z_history.push_back(Z);
      }
      res.global = chk;
      return finish(Outcome::Certified, "");
    }

    // Z-update.
    std::vector<MatrixXd> targets(n);
    for (int i = 0; i < n; ++i) targets[i] = X[i] + L[i];
    GlobalCertificate g = global_update(targets, gp, opts.global);
    if (!g.ok() && g.status != SolveStatus::Infeasible) g = global_update(targets, gp, loosened(opts.global));
    if (g.status == SolveStatus::Infeasible) {
      return finish(Outcome::ConfigError, "global set is empty under the pins: " + g.message);
    }
    if (!g.ok()) return finish(Outcome::SolverError, "global update failed after retry: " + g.message);
    Z = g.Z;

    // Λ-update.
    for (int i = 0; i < n; ++i) L[i] += X[i] - Z[i];

    rec.primal_residual = tuple_norm(X, Z);
    rec.wall_ms = ms_since(t0);
    res.trace.push_back(rec);
    if (opts.keep_history) {
      res.x_history.push_back(X);
      res.z_history.push_back(Z);
    }
    residuals.push_back(rec.primal_residual);
    const int w = opts.stall_window;
    if (static_cast<int>(residuals.size()) > w) {
      const double before = residuals[residuals.size() - 1 - w];
      const double floor = std::max(opts.stall_decrease, opts.stall_relative * before);
      if (before - residuals.back() < floor) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "residual decreased by less than %.3g over %d iterations", floor, w);
        return finish(Outcome::Stalled, buf);
      }
    }
  }
  return finish(Outcome::IterationLimit, "iteration cap reached");
}

BisectResult bisect_gain(const Problem& problem, double gamma_lo, double gamma_hi, double tol_gamma,
                         const AdmmOptions& opts) {
  BisectResult out;
  if (!(gamma_lo < gamma_hi) || !(gamma_lo > 0)) {
    out.message = "need 0 < gamma_lo < gamma_hi";
    return out;
  }
  CertResult hi = run(problem.with_gamma(gamma_hi), opts);
  out.probes.emplace_back(gamma_hi, hi.outcome);
  if (!hi.certified()) {
    out.message = "gamma_hi = " + std::to_string(gamma_hi) + " is not certified (" + to_string(hi.outcome) + ")";
    return out;
  }
  double lo = gamma_lo, up = gamma_hi;
  while (up - lo > tol_gamma) {
    const double mid = 0.5 * (lo + up);
    CertResult r = run(problem.with_gamma(mid), opts);
    out.probes.emplace_back(mid, r.outcome);
    if (r.certified()) {
      up = mid;
      hi = std::move(r);
    } else {
      lo = mid;
    }
  }
  out.ok = true;
  out.gamma = up;
  out.at_gamma = std::move(hi);
  return out;
}

std::string residual_report(const CertResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "k,primal_residual,global_lmi_lambda_max,local_statuses,wall_ms\n";
  for (const auto& rec : r.trace) {
    os << rec.k << ',' << rec.primal_residual << ',' << rec.global_lambda_max << ',';
    for (size_t i = 0; i < rec.local_statuses.size(); ++i) os << (i ? ";" : "") << rec.local_statuses[i];
    os << ',' << rec.wall_ms << '\n';
  }
  return os.str();
}

namespace {

struct LtiStack {
  MatrixXd A, B, C;
  std::vector<int> nx;
};

LtiStack stack_lti(const Problem& problem) {
  if (problem.iqc) throw std::invalid_argument("direct certification needs a static interconnection");
  std::vector<MatrixXd> a, b, c;
  LtiStack s;
  for (const auto& sub : problem.subsystems) {
    const auto* l = std::get_if<LtiSubsystem>(&sub);
    if (!l) throw std::invalid_argument("direct_separable_certify needs all subsystems LTI");
    a.push_back(l->A);
    b.push_back(l->B);
    c.push_back(l->C);
    s.nx.push_back(l->nx());
  }
  s.A = blkdiag(a);
  s.B = blkdiag(b);
  s.C = blkdiag(c);
  return s;
}

// Maps (x, d) to the closed-loop derivative F and to [d; e] H.
void closed_loop(const Problem& problem, const LtiStack& s, MatrixXd& F, MatrixXd& H) {
  const Dims dims = problem.dims();
  const int n = static_cast<int>(s.A.rows()), mu = static_cast<int>(s.B.cols()), py = static_cast<int>(s.C.rows());
  const int pd = dims.pd, me = dims.me;
  MatrixXd G = MatrixXd::Zero(py + pd, n + pd);
  G.topLeftCorner(py, n) = s.C;
  G.bottomRightCorner(pd, pd).setIdentity();
  const MatrixXd Mu = problem.M.topRows(mu), Me = problem.M.bottomRows(me);
  F = MatrixXd::Zero(n, n + pd);
  F.leftCols(n) = s.A;
  F += s.B * Mu * G;
  H = MatrixXd::Zero(pd + me, n + pd);
  H.topRightCorner(pd, pd).setIdentity();
  H.bottomRows(me) = Me * G;
}

}  // namespace

MatrixXd monolithic_lti_lmi(const Problem& problem, const std::vector<MatrixXd>& P) {
  const LtiStack s = stack_lti(problem);
  MatrixXd F, H;
  closed_loop(problem, s, F, H);
  const MatrixXd Pb = blkdiag(P);
  const int n = static_cast<int>(s.A.rows());
  MatrixXd E = MatrixXd::Zero(n, F.cols());
  E.leftCols(n).setIdentity();
  return sym(E.transpose() * Pb * F + F.transpose() * Pb * E - H.transpose() * problem.W() * H);
}

DirectResult direct_separable_certify(const Problem& problem, const SolveOptions& opts) {
  const auto t0 = Clock::now();
  const LtiStack s = stack_lti(problem);
  MatrixXd F, H;
  closed_loop(problem, s, F, H);
  const int n = static_cast<int>(s.A.rows());
  ConicProblem prob;
  AffineMatrix Pb(n, n);
  std::vector<SymVar> pv;
  int off = 0;
  for (size_t i = 0; i < s.nx.size(); ++i) {
    pv.push_back(prob.add_symmetric(s.nx[i], "P" + std::to_string(i + 1)));
    prob.add_lmi(AffineMatrix::variable(pv.back()) -
                     AffineMatrix::constant(problem.storage_floor * MatrixXd::Identity(s.nx[i], s.nx[i])),
                 LmiSense::psd, false, "P" + std::to_string(i + 1));
    Pb.add_block(off, off, AffineMatrix::variable(pv.back()));
    off += s.nx[i];
  }
  MatrixXd E = MatrixXd::Zero(n, F.cols());
  E.leftCols(n).setIdentity();
  const AffineMatrix cross = E.transpose() * (Pb * F);
  AffineMatrix L = cross + cross.transpose();
  L -= AffineMatrix::constant(H.transpose() * problem.W() * H);
  prob.add_lmi(L, LmiSense::nsd, true, "monolithic");
  const SolveReport r = solve(prob, opts);
  DirectResult out;
  out.status = r.status;
  out.message = r.message;
  if (r.has_values()) {
    for (const auto& v : pv) out.P.push_back(sym(r.value(v)));
    out.lambda_max = lambda_max(monolithic_lti_lmi(problem, out.P));
    bool psd = true;
    for (const auto& p : out.P) {
      psd = psd && lambda_min(p) - problem.storage_floor >= -1e-7 * (1.0 + sym_norm(p));
    }
    out.feasible = psd && out.lambda_max <= 1e-6 * (1.0 + sym_norm(H.transpose() * problem.W() * H));
  }
  out.wall_ms = ms_since(t0);
  return out;
}

DirectResult direct_sos_certify(const Problem& problem, const LocalOptions& opts) {
  const auto t0 = Clock::now();
  if (problem.iqc) throw std::invalid_argument("direct certification needs a static interconnection");
  const Dims dims = problem.dims();
  const int n = dims.n();
  // Global variables: states X(·) numbered across subsystems, d as Y(·).
  std::vector<Polynomial> ys, fs;
  std::vector<std::vector<Var>> xvars(n);
  std::vector<std::map<Var, Polynomial>> rename(n);
  std::vector<std::vector<Polynomial>> fi(n);
  int xo = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<Polynomial> f, h;
    int nx = 0;
    if (const auto* l = std::get_if<LtiSubsystem>(&problem.subsystems[i])) {
      nx = l->nx();
      for (int r = 0; r < nx; ++r) {
        Polynomial p;
        for (int c = 0; c < nx; ++c) p += l->A(r, c) * Polynomial(X(c));
        for (int c = 0; c < l->nu(); ++c) p += l->B(r, c) * Polynomial(U(c));
        f.push_back(p);
      }
      for (int r = 0; r < l->ny(); ++r) {
        Polynomial p;
        for (int c = 0; c < nx; ++c) p += l->C(r, c) * Polynomial(X(c));
        h.push_back(p);
      }
    } else if (const auto* p = std::get_if<PolySubsystem>(&problem.subsystems[i])) {
      if (p->eid) throw std::invalid_argument("direct_sos_certify does not handle EID subsystems");
      nx = p->nx();
      f = p->f;
      h = p->h;
    } else {
      throw std::invalid_argument("direct_sos_certify handles lti and poly subsystems only");
    }
    for (const auto& hk : h) {
      for (const Var& v : hk.variables()) {
        if (v.block == VarBlock::u) throw std::invalid_argument("direct_sos_certify needs h independent of u");
      }
    }
    for (int k = 0; k < nx; ++k) {
      rename[i][X(k)] = Polynomial(X(xo + k));
      xvars[i].push_back(X(xo + k));
    }
    xo += nx;
    for (const auto& hk : h) ys.push_back(substitute(hk, rename[i]));
    fi[i] = f;
  }
  std::vector<Polynomial> yd = ys;
  for (int k = 0; k < dims.pd; ++k) yd.emplace_back(Y(k));
  std::vector<Polynomial> ue(problem.M.rows());
  for (int r = 0; r < problem.M.rows(); ++r) {
    for (int c = 0; c < problem.M.cols(); ++c) {
      if (problem.M(r, c) != 0.0) ue[r] += problem.M(r, c) * yd[c];
    }
  }

  ConicProblem prob;
  ParamPolynomial p;
  // Supply [d; e]ᵀW[d; e].
  std::vector<Polynomial> de;
  for (int k = 0; k < dims.pd; ++k) de.emplace_back(Y(k));
  const int mu = static_cast<int>(problem.M.rows()) - dims.me;
  for (int k = 0; k < dims.me; ++k) de.push_back(ue[mu + k]);
  const MatrixXd W = problem.W();
  for (int a = 0; a < W.rows(); ++a) {
    for (int b = 0; b < W.cols(); ++b) {
      if (W(a, b) != 0.0) p += ParamPolynomial(W(a, b) * (de[a] * de[b]));
    }
  }
  std::vector<ParamPolynomial> Vs;
  int uo = 0;
  for (int i = 0; i < n; ++i) {
    const MonomialBasis vb = monomials_between(xvars[i], 1, opts.storage_degree / 2);
    const SymVar g = prob.add_symmetric(vb.size(), "V" + std::to_string(i + 1));
    prob.add_psd(g, false, "V" + std::to_string(i + 1));
    const ParamPolynomial V = gram_polynomial(g, vb);
    Vs.push_back(V);
    std::map<Var, Polynomial> sub = rename[i];
    for (int k = 0; k < dims.m[i]; ++k) sub[U(k)] = ue[uo + k];
    uo += dims.m[i];
    for (size_t k = 0; k < fi[i].size(); ++k) p -= V.derivative(xvars[i][k]) * substitute(fi[i][k], sub);
  }
  std::vector<Var> all;
  for (const auto& xv : xvars) all.insert(all.end(), xv.begin(), xv.end());
  for (int k = 0; k < dims.pd; ++k) all.push_back(Y(k));
  const GramConstraint gc = emit_sos(prob, p, sos_basis_for(p, all), "dissipation", opts.sos);
  const SolveReport r = solve(prob, opts.solve);
  DirectResult out;
  out.status = r.status;
  out.message = r.message;
  if (r.has_values()) {
    for (const auto& V : Vs) out.V += V.eval(r.values);
    bool ok = true;
    if (gc.gram.dim > 0) {
      const MatrixXd G = sym(r.value(gc.gram));
      ok = lambda_min(G) >= -1e-7 * (1.0 + sym_norm(G));
    }
    for (const auto& [m, e] : gc.equalities) ok = ok && std::abs(e.eval(r.values)) <= 1e-7;
    out.feasible = ok;
  }
  out.wall_ms = ms_since(t0);
  return out;
}

}  // namespace dissip
