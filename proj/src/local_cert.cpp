#include "dissip/local_cert.hpp"

#include <chrono>

namespace dissip {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// X variable, pins and the proximal objective shared by every update.
SymVar add_supply(ConicProblem& prob, const LocalTarget& tgt) {
  const int k = static_cast<int>(tgt.C.rows());
  if (tgt.C.cols() != k || !is_symmetric(tgt.C)) throw std::invalid_argument("local target must be square symmetric");
  SymVar x = prob.add_symmetric(k, "X");
  for (const auto& pin : tgt.pins) {
    prob.add_equality(AffineExpr::variable(x.index(pin.row, pin.col)) - AffineExpr(pin.value), "pin");
  }
  prob.add_distance_objective(AffineMatrix::variable(x), tgt.C);
  return x;
}

// [AᵀP+PA, PB; BᵀP, 0] − [C D]ᵀX[C D] for affine P and X.
AffineMatrix storage_lmi(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C, const MatrixXd& D,
                         const AffineMatrix& P, const AffineMatrix& X) {
  const Eigen::Index n = A.rows(), m = B.cols();
  AffineMatrix L(n + m, n + m);
  if (n > 0) {
    const AffineMatrix PA = P * A;
    L.add_block(0, 0, PA + PA.transpose());
    const AffineMatrix PB = P * B;
    L.add_block(0, n, PB);
    L.add_block(n, 0, PB.transpose());
  }
  MatrixXd CD(C.rows(), n + m);
  CD << C, D;
  L -= congruence(CD, X);
  return L;
}

MatrixXd storage_lmi_value(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C, const MatrixXd& D,
                           const MatrixXd& P, const MatrixXd& X) {
  const Eigen::Index n = A.rows(), m = B.cols();
  MatrixXd L = MatrixXd::Zero(n + m, n + m);
  L.topLeftCorner(n, n) = A.transpose() * P + P * A;
  L.topRightCorner(n, m) = P * B;
  L.bottomLeftCorner(m, n) = B.transpose() * P;
  MatrixXd CD(C.rows(), n + m);
  CD << C, D;
  return sym(L - CD.transpose() * X * CD);
}

void finish_report(LocalCertificate& cert, const SolveReport& r, const SymVar& x, const MatrixXd& target) {
  cert.status = r.status;
  cert.message = r.message;
  if (r.has_values()) {
    cert.X = sym(r.value(x));
    cert.distance = (cert.X - target).squaredNorm();
  }
}

LocalCertificate quadratic_update(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C, const MatrixXd& D,
                                  const LocalTarget& tgt, const LocalOptions& opts, const char* kind) {
  const auto t0 = Clock::now();
  LocalCertificate cert;
  cert.kind = kind;
  ConicProblem prob;
  SymVar x = add_supply(prob, tgt);
  if (C.rows() != tgt.C.rows()) throw std::invalid_argument("local target size does not match the supply rate");
  SymVar p = prob.add_symmetric(static_cast<int>(A.rows()), "P");
  if (p.dim > 0) {
    if (opts.storage_floor > 0.0) {
      prob.add_lmi(AffineMatrix::variable(p) - AffineMatrix::constant(opts.storage_floor * MatrixXd::Identity(p.dim, p.dim)),
                   LmiSense::psd, false, "P");
    } else {
      prob.add_psd(p, false, "P");
    }
  }
  prob.add_lmi(storage_lmi(A, B, C, D, AffineMatrix::variable(p), AffineMatrix::variable(x)), LmiSense::nsd, false,
               "dissipation");
  const SolveReport r = solve(prob, opts.solve);
  finish_report(cert, r, x, tgt.C);
  if (r.has_values()) {
    cert.P = p.dim > 0 ? sym(r.value(p)) : MatrixXd(0, 0);
    const MatrixXd L = storage_lmi_value(A, B, C, D, cert.P, cert.X);
    const double lmax = lambda_max(L);
    const double pmin = cert.P.size() ? lambda_min(cert.P) - opts.storage_floor : 0.0;
    cert.verify_residual = std::max(lmax / (1.0 + sym_norm(L)), -pmin / (1.0 + sym_norm(cert.P)));
    cert.verified = lmax <= opts.verify_tol * (1.0 + sym_norm(L)) && pmin >= -1e-7 * (1.0 + sym_norm(cert.P));
    for (const auto& pin : tgt.pins) {
      if (std::abs(cert.X(pin.row, pin.col) - pin.value) > 1e-7) cert.verified = false;
    }
  }
  cert.wall_ms = ms_since(t0);
  return cert;
}

// [u; y] ↦ Σ X_jk z_j z_k as a parametrized polynomial.
ParamPolynomial supply_polynomial(const SymVar& x, const std::vector<Polynomial>& z) {
  ParamPolynomial w;
  for (int j = 0; j < x.dim; ++j) {
    for (int k = j; k < x.dim; ++k) {
      ParamPolynomial e;
      e.add_term(Monomial(), AffineExpr::variable(x.index(j, k), j == k ? 1.0 : 2.0));
      w += e * (z[j] * z[k]);
    }
  }
  return w;
}

struct SosProgram {
  ConicProblem prob;
  SymVar x;
  MonomialBasis v_basis;
  SymVar v_gram;
  ParamPolynomial V;
  std::vector<GramConstraint> constraints;
  std::vector<std::pair<AffineExpr, std::string>> extra_eqs;
  std::map<Var, Polynomial> v_out;  // change of variables applied to V
};

std::vector<Var> vars_of(VarBlock b, int n) {
  std::vector<Var> out;
  for (int i = 0; i < n; ++i) out.push_back({b, i});
  return out;
}

// Solves the assembled SOS program and checks every Gram matrix and
// coefficient equality at the returned point.
LocalCertificate finish_sos(SosProgram& sp, const LocalTarget& tgt, const LocalOptions& opts, const char* kind,
                            Clock::time_point t0) {
  LocalCertificate cert;
  cert.kind = kind;
  const SolveReport r = solve(sp.prob, opts.solve);
  finish_report(cert, r, sp.x, tgt.C);
  if (r.has_values()) {
    cert.V = sp.V.eval(r.values);
    if (!sp.v_out.empty()) cert.V = substitute(cert.V, sp.v_out);
    double worst = 0.0;
    bool ok = true;
    for (const auto& gc : sp.constraints) {
      const MatrixXd G = gc.gram.dim > 0 ? sym(r.value(gc.gram)) : MatrixXd(0, 0);
      cert.grams.push_back(G);
      if (G.size()) {
        const double gmin = lambda_min(G);
        worst = std::max(worst, -gmin / (1.0 + sym_norm(G)));
        if (gmin < -1e-7 * (1.0 + sym_norm(G))) ok = false;
      }
      for (const auto& [m, e] : gc.equalities) {
        const double res = std::abs(e.eval(r.values));
        worst = std::max(worst, res);
        if (res > 1e-7) ok = false;
      }
    }
    for (const auto& [e, label] : sp.extra_eqs) {
      const double res = std::abs(e.eval(r.values));
      worst = std::max(worst, res);
      if (res > 1e-7) ok = false;
    }
    for (const auto& pin : tgt.pins) {
      if (std::abs(cert.X(pin.row, pin.col) - pin.value) > 1e-7) ok = false;
    }
    cert.verified = ok;
    cert.verify_residual = worst;
  }
  cert.wall_ms = ms_since(t0);
  return cert;
}

void check_degree(int deg) {
  if (deg < 2 || deg % 2 != 0) throw std::invalid_argument("storage degree must be even and at least 2");
}

std::vector<Polynomial> supply_inputs(int nu, const std::vector<Polynomial>& h) {
  std::vector<Polynomial> z;
  for (int i = 0; i < nu; ++i) z.emplace_back(U(i));
  for (const auto& hi : h) z.push_back(hi);
  return z;
}

// V = bᵀG b over monomials of degree 1..deg/2 in `vars`; V ∈ Σ by construction.
void add_storage(SosProgram& sp, const std::vector<Var>& vars, int deg, const SosOptions&) {
  sp.v_basis = monomials_between(vars, 1, deg / 2);
  sp.v_gram = sp.prob.add_symmetric(sp.v_basis.size(), "V.G");
  sp.prob.add_psd(sp.v_gram, false, "V");
  sp.V = gram_polynomial(sp.v_gram, sp.v_basis);
}

}  // namespace

MatrixXd lti_dissipation_matrix(const LtiSubsystem& sys, const MatrixXd& P, const MatrixXd& X) {
  const int m = sys.nu(), p = sys.ny();
  MatrixXd C = MatrixXd::Zero(m + p, sys.nx()), D = MatrixXd::Zero(m + p, m);
  C.bottomRows(p) = sys.C;
  D.topRows(m).setIdentity();
  return storage_lmi_value(sys.A, sys.B, C, D, P, X);
}

LocalCertificate lti_local_update(const LtiSubsystem& sys, const LocalTarget& tgt, const LocalOptions& opts) {
  const int m = sys.nu(), p = sys.ny();
  MatrixXd C = MatrixXd::Zero(m + p, sys.nx()), D = MatrixXd::Zero(m + p, m);
  C.bottomRows(p) = sys.C;
  D.topRows(m).setIdentity();
  return quadratic_update(sys.A, sys.B, C, D, tgt, opts, "lti");
}

AugmentedIqc augment_iqc(const LtiSubsystem& sys, const Realization& psi) {
  const int n = sys.nx(), m = sys.nu(), p = sys.ny(), ne = psi.states();
  if (psi.inputs() != m + p) throw std::invalid_argument("psi input size must equal m + p");
  const MatrixXd Bu = psi.B.leftCols(m), By = psi.B.rightCols(p);
  const MatrixXd Du = psi.D.leftCols(m), Dy = psi.D.rightCols(p);
  AugmentedIqc a;
  a.A = MatrixXd::Zero(n + ne, n + ne);
  a.A.topLeftCorner(n, n) = sys.A;
  a.A.bottomLeftCorner(ne, n) = By * sys.C;
  a.A.bottomRightCorner(ne, ne) = psi.A;
  a.B = MatrixXd(n + ne, m);
  a.B << sys.B, Bu;
  a.C = MatrixXd(psi.outputs(), n + ne);
  a.C << Dy * sys.C, psi.C;
  a.D = Du;
  return a;
}

LocalCertificate iqc_local_update(const LtiSubsystem& sys, const Realization& psi, const LocalTarget& tgt,
                                  const LocalOptions& opts) {
  if (!is_hurwitz(psi)) throw std::invalid_argument("psi is not Hurwitz");
  const AugmentedIqc a = augment_iqc(sys, psi);
  return quadratic_update(a.A, a.B, a.C, a.D, tgt, opts, "iqc");
}

LocalCertificate fixed_local_update(const FixedSupplySubsystem& sys, const LocalTarget& tgt) {
  LocalCertificate cert;
  cert.kind = "fixed_supply";
  cert.status = SolveStatus::Optimal;
  cert.X = sys.X;
  cert.distance = (sys.X - tgt.C).squaredNorm();
  cert.verified = true;
  return cert;
}

LocalCertificate sos_local_update(const PolySubsystem& sys, const LocalTarget& tgt, const LocalOptions& opts) {
  check_degree(opts.storage_degree);
  const auto t0 = Clock::now();
  SosProgram sp;
  sp.x = add_supply(sp.prob, tgt);
  const auto xv = vars_of(VarBlock::x, sys.nx());
  add_storage(sp, xv, opts.storage_degree, opts.sos);

  ParamPolynomial diss = supply_polynomial(sp.x, supply_inputs(sys.nu(), sys.h));
  for (int i = 0; i < sys.nx(); ++i) diss -= sp.V.derivative(X(i)) * sys.f[i];
  auto vars = xv;
  for (const Var& v : vars_of(VarBlock::u, sys.nu())) vars.push_back(v);
  sp.constraints.push_back(emit_sos(sp.prob, diss, sos_basis_for(diss, vars), "dissipation", opts.sos));
  return finish_sos(sp, tgt, opts, "sos", t0);
}

LocalCertificate rational_local_update(const RationalSubsystem& sys, const LocalTarget& tgt,
                                       const LocalOptions& opts) {
  check_degree(opts.storage_degree);
  const auto t0 = Clock::now();
  SosProgram sp;
  sp.x = add_supply(sp.prob, tgt);
  const auto xv = vars_of(VarBlock::x, sys.nx());
  add_storage(sp, xv, opts.storage_degree, opts.sos);

  Polynomial qprod(1.0);
  for (const auto& q : sys.q) qprod *= q;
  ParamPolynomial diss = supply_polynomial(sp.x, supply_inputs(sys.nu(), sys.h)) * qprod;
  for (int i = 0; i < sys.nx(); ++i) {
    Polynomial others(1.0);
    for (int j = 0; j < sys.nx(); ++j) {
      if (j != i) others *= sys.q[j];
    }
    diss -= sp.V.derivative(X(i)) * (sys.p[i] * others);
  }
  auto vars = xv;
  for (const Var& v : vars_of(VarBlock::u, sys.nu())) vars.push_back(v);
  sp.constraints.push_back(emit_sos(sp.prob, diss, sos_basis_for(diss, vars), "dissipation", opts.sos));
  return finish_sos(sp, tgt, opts, "rational", t0);
}

LocalCertificate eid_local_update(const PolySubsystem& sys, const LocalTarget& tgt, const LocalOptions& opts) {
  check_degree(opts.storage_degree);
  for (const auto& f : sys.f) {
    if (f.degree() == 0) throw std::invalid_argument("equilibrium set is empty (constant nonzero dynamics)");
  }
  const auto t0 = Clock::now();
  const int nx = sys.nx(), nu = sys.nu();
  // Internally x and u hold the deviations x − x⋆ and u − u⋆. Every basis
  // monomial carries a deviation factor, so V(x⋆, x⋆) ≡ 0 holds by
  // construction and the Gram matrices avoid the face where the
  // dissipation inequality is tight.
  const auto dv = vars_of(VarBlock::x, nx), ev = vars_of(VarBlock::u, nu);
  const auto xsv = vars_of(VarBlock::xs, nx), usv = vars_of(VarBlock::us, nu);
  auto dev_degree = [](const Monomial& m) {
    int d = 0;
    for (const auto& [v, k] : m.powers()) {
      if (v.block == VarBlock::x || v.block == VarBlock::u) d += k;
    }
    return d;
  };
  auto keep_deviating = [&](MonomialBasis b) {
    std::erase_if(b.monomials, [&](const Monomial& m) { return dev_degree(m) == 0; });
    return b;
  };

  SosProgram sp;
  sp.x = add_supply(sp.prob, tgt);
  auto storage_vars = dv;
  storage_vars.insert(storage_vars.end(), xsv.begin(), xsv.end());
  sp.v_basis = keep_deviating(monomials_between(storage_vars, 1, opts.storage_degree / 2));
  sp.v_gram = sp.prob.add_symmetric(sp.v_basis.size(), "V.G");
  sp.prob.add_psd(sp.v_gram, false, "V");
  sp.V = gram_polynomial(sp.v_gram, sp.v_basis);

  std::map<Var, Polynomial> to_abs, star;
  for (int i = 0; i < nx; ++i) {
    to_abs[X(i)] = Polynomial(X(i)) + Polynomial(Xs(i));
    star[X(i)] = Polynomial(Xs(i));
    sp.v_out[X(i)] = Polynomial(X(i)) - Polynomial(Xs(i));
  }
  for (int i = 0; i < nu; ++i) {
    to_abs[U(i)] = Polynomial(U(i)) + Polynomial(Us(i));
    star[U(i)] = Polynomial(Us(i));
  }

  // w(u − u⋆, h(x,u) − h(x⋆,u⋆)).
  std::vector<Polynomial> z;
  for (int i = 0; i < nu; ++i) z.emplace_back(U(i));
  for (const auto& h : sys.h) z.push_back(substitute(h, to_abs) - substitute(h, star));
  ParamPolynomial diss = supply_polynomial(sp.x, z);
  for (int i = 0; i < nx; ++i) diss -= sp.V.derivative(X(i)) * substitute(sys.f[i], to_abs);

  auto all = dv;
  all.insert(all.end(), ev.begin(), ev.end());
  all.insert(all.end(), xsv.begin(), xsv.end());
  all.insert(all.end(), usv.begin(), usv.end());
  int fdeg = 0;
  for (const auto& f : sys.f) fdeg = std::max(fdeg, f.degree());
  const int rdeg = opts.multiplier_degree >= 0 ? opts.multiplier_degree : fdeg;
  const MonomialBasis rbasis = monomials_between(all, 0, rdeg);
  for (int i = 0; i < nx; ++i) {
    const ParamPolynomial r = free_polynomial(sp.prob, rbasis, "r" + std::to_string(i + 1));
    diss += r * substitute(sys.f[i], star);
  }

  // Terms of deviation degree below two cannot come from the reduced Gram
  // basis and must cancel.
  ParamPolynomial rest;
  for (const auto& [m, e] : diss.terms()) {
    if (dev_degree(m) >= 2) {
      rest.add_term(m, e);
    } else if (!e.is_constant() || e.constant != 0.0) {
      sp.prob.add_equality(e, "dissipation[" + m.str() + "]");
      sp.extra_eqs.emplace_back(e, m.str());
    }
  }
  sp.constraints.push_back(
      emit_sos(sp.prob, rest, keep_deviating(sos_basis_for(rest, all)), "dissipation", opts.sos));
  return finish_sos(sp, tgt, opts, "eid", t0);
}

LocalCertificate local_update(const Problem& prob, int i, const LocalTarget& tgt, const LocalOptions& options) {
  const Subsystem& s = prob.subsystems.at(i);
  LocalOptions opts = options;
  opts.storage_floor = std::max(opts.storage_floor, prob.storage_floor);
  if (const auto* f = std::get_if<FixedSupplySubsystem>(&s)) return fixed_local_update(*f, tgt);
  if (prob.iqc) {
    const Realization& psi = prob.iqc->psi.at(i);
    if (const auto* l = std::get_if<LtiSubsystem>(&s)) return iqc_local_update(*l, psi, tgt, opts);
    if (psi.states() > 0) throw std::invalid_argument("dynamic psi requires an lti subsystem");
  }
  if (const auto* l = std::get_if<LtiSubsystem>(&s)) return lti_local_update(*l, tgt, opts);
  if (const auto* p = std::get_if<PolySubsystem>(&s)) {
    return p->eid ? eid_local_update(*p, tgt, opts) : sos_local_update(*p, tgt, opts);
  }
  return rational_local_update(std::get<RationalSubsystem>(s), tgt, opts);
}

}  // namespace dissip
