#include "dissip/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dissip/conic.hpp"
#include "dissip/sos.hpp"

namespace dissip {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string sub_name(int i) { return "subsystem " + std::to_string(i); }

void check_poly_vars(const Polynomial& p, int nx, int nu, const std::string& where) {
  for (const Var& v : p.variables()) {
    const bool ok = (v.block == VarBlock::x && v.index < nx) || (v.block == VarBlock::u && v.index < nu);
    if (!ok) throw ModelError(where + ": variable " + to_string(v) + " is not a state or input of this subsystem");
  }
}

std::map<Var, double> origin(int nx, int nu) {
  std::map<Var, double> z;
  for (int i = 0; i < nx; ++i) z[X(i)] = 0.0;
  for (int i = 0; i < nu; ++i) z[U(i)] = 0.0;
  return z;
}

}  // namespace

int input_dim(const Subsystem& s) {
  return std::visit([](const auto& x) { return x.nu(); }, s);
}

int output_dim(const Subsystem& s) {
  return std::visit([](const auto& x) { return x.ny(); }, s);
}

const char* type_name(const Subsystem& s) {
  return std::visit(overloaded{[](const LtiSubsystem&) { return "lti"; },
                               [](const PolySubsystem&) { return "poly"; },
                               [](const RationalSubsystem&) { return "rational"; },
                               [](const FixedSupplySubsystem&) { return "fixed_supply"; }},
                    s);
}

int Dims::total_m() const {
  int t = me;
  for (int v : m) t += v;
  return t;
}

int Dims::total_p() const {
  int t = pd;
  for (int v : p) t += v;
  return t;
}

MatrixXd build_permutation(const Dims& dims) {
  if (dims.m.size() != dims.p.size()) throw ModelError("build_permutation: input/output lists differ in length");
  for (std::size_t i = 0; i < dims.m.size(); ++i) {
    if (dims.m[i] < 0 || dims.p[i] < 0) throw ModelError("build_permutation: negative dimension");
  }
  if (dims.pd < 0 || dims.me < 0) throw ModelError("build_permutation: negative dimension");
  const int mt = dims.total_m(), pt = dims.total_p();
  const int n = mt + pt;
  // Source offsets in [u; e; y; d].
  const int e0 = mt - dims.me, y0 = mt, d0 = mt + pt - dims.pd;
  MatrixXd P = MatrixXd::Zero(n, n);
  int row = 0, u_off = 0, y_off = y0;
  for (int i = 0; i < dims.n(); ++i) {
    for (int k = 0; k < dims.m[i]; ++k) P(row++, u_off++) = 1.0;
    for (int k = 0; k < dims.p[i]; ++k) P(row++, y_off++) = 1.0;
  }
  for (int k = 0; k < dims.pd; ++k) P(row++, d0 + k) = 1.0;
  for (int k = 0; k < dims.me; ++k) P(row++, e0 + k) = 1.0;
  return P;
}

Assumption1Report validate_assumption1(const MatrixXd& M, const Dims& dims) {
  Assumption1Report rep;
  if (M.rows() != dims.total_m() || M.cols() != dims.total_p()) {
    rep.violations.push_back("M is " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()) + ", expected " +
                             std::to_string(dims.total_m()) + "x" + std::to_string(dims.total_p()));
    return rep;
  }
  int r0 = 0, c0 = 0;
  for (int i = 0; i < dims.n(); ++i) {
    const MatrixXd self = M.block(r0, c0, dims.m[i], dims.p[i]);
    if (self.size() > 0 && self.cwiseAbs().maxCoeff() > 0.0) {
      rep.violations.push_back(sub_name(i) + ": block y_i -> u_i is nonzero (self loop)");
    }
    const MatrixXd rows = M.middleRows(r0, dims.m[i]);
    if (dims.m[i] > 0) {
      Eigen::JacobiSVD<MatrixXd> svd(rows);
      const auto& sv = svd.singularValues();
      const double smax = sv.size() ? sv(0) : 0.0;
      int rank = 0;
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > 1e-9 * smax && sv(k) > 0.0) ++rank;
      }
      if (rank < dims.m[i]) rep.violations.push_back(sub_name(i) + ": rows of M feeding u_i are linearly dependent");
    }
    r0 += dims.m[i];
    c0 += dims.p[i];
  }
  return rep;
}

const char* to_string(GainConvention c) { return c == GainConvention::A ? "A" : "B"; }

MatrixXd l2_gain_supply(double gamma, int n_in, int n_out, GainConvention convention) {
  if (!(gamma > 0)) throw ModelError("l2_gain_supply: gamma must be positive");
  MatrixXd W = MatrixXd::Zero(n_in + n_out, n_in + n_out);
  const double a = convention == GainConvention::A ? 1.0 : gamma * gamma;
  const double b = convention == GainConvention::A ? 1.0 / (gamma * gamma) : 1.0;
  W.topLeftCorner(n_in, n_in).diagonal().setConstant(a);
  W.bottomRightCorner(n_out, n_out).diagonal().setConstant(-b);
  return W;
}

MatrixXd passivity_supply(int n) {
  if (n <= 0) throw ModelError("passivity_supply: channel count must be positive");
  MatrixXd X = MatrixXd::Zero(2 * n, 2 * n);
  X.topRightCorner(n, n).setIdentity();
  X.bottomLeftCorner(n, n).setIdentity();
  return X;
}

MatrixXd platoon_incidence(const std::vector<std::pair<int, int>>& edges, int n) {
  MatrixXd D = MatrixXd::Zero(n, static_cast<Eigen::Index>(edges.size()));
  std::set<std::pair<int, int>> seen;
  for (std::size_t l = 0; l < edges.size(); ++l) {
    auto [a, b] = edges[l];
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw ModelError("platoon_incidence: edge " + std::to_string(l) + " has an invalid node");
    }
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      throw ModelError("platoon_incidence: repeated edge " + std::to_string(a) + "-" + std::to_string(b));
    }
    D(a, l) = 1.0;
    D(b, l) = -1.0;
  }
  return D;
}

Realization static_identity(int channels) {
  Realization r;
  r.A = MatrixXd::Zero(0, 0);
  r.B = MatrixXd::Zero(0, channels);
  r.C = MatrixXd::Zero(channels, 0);
  r.D = MatrixXd::Identity(channels, channels);
  return r;
}

Realization pole_basis(double pole, int order, int channels) {
  const int c = channels, ns = order * c, nz = (order + 1) * c;
  Realization r;
  r.A = MatrixXd::Zero(ns, ns);
  r.B = MatrixXd::Zero(ns, c);
  r.C = MatrixXd::Zero(nz, ns);
  r.D = MatrixXd::Zero(nz, c);
  for (int k = 0; k < order; ++k) {
    r.A.block(k * c, k * c, c, c).diagonal().setConstant(-pole);
    if (k > 0) r.A.block(k * c, (k - 1) * c, c, c).setIdentity();
    r.C.block((k + 1) * c, k * c, c, c).setIdentity();
  }
  if (order > 0) r.B.topRows(c).setIdentity();
  r.D.topRows(c).setIdentity();
  return r;
}

bool is_hurwitz(const Realization& r, double margin) { return r.states() == 0 || spectral_abscissa(r.A) < -margin; }

Dims Problem::dims() const {
  Dims d;
  for (const auto& s : subsystems) {
    d.m.push_back(input_dim(s));
    d.p.push_back(output_dim(s));
  }
  d.pd = pd;
  d.me = me;
  return d;
}

MatrixXd Problem::W() const {
  if (objective.kind == Objective::Kind::supply) return objective.W;
  // Gain objectives in IQC mode apply to a static Ψ_w on [d; e].
  if (iqc && (iqc->psi_w.states() != 0 || iqc->psi_w.D != MatrixXd::Identity(pd + me, pd + me))) {
    throw ModelError("l2_gain objective in IQC mode needs a static identity psi_w");
  }
  return l2_gain_supply(objective.gamma, pd, me, objective.convention);
}

int Problem::supply_dim(int i) const {
  if (iqc) return iqc->psi.at(i).outputs();
  return input_dim(subsystems.at(i)) + output_dim(subsystems.at(i));
}

bool is_all_lti(const Problem& p) {
  if (p.iqc) return false;
  return std::all_of(p.subsystems.begin(), p.subsystems.end(),
                     [](const Subsystem& s) { return std::holds_alternative<LtiSubsystem>(s); });
}

Problem Problem::with_gamma(double gamma) const {
  if (objective.kind != Objective::Kind::l2_gain) throw ModelError("with_gamma: objective is not an L2 gain");
  Problem q = *this;
  q.objective.gamma = gamma;
  return q;
}

std::vector<std::string> validate(const Problem& p) {
  const int n = static_cast<int>(p.subsystems.size());
  if (n == 0) throw ModelError("problem has no subsystems");
  for (int i = 0; i < n; ++i) {
    const std::string where = sub_name(i);
    std::visit(overloaded{
                   [&](const LtiSubsystem& s) {
                     if (s.A.rows() != s.A.cols()) throw ModelError(where + ": A is not square");
                     if (s.B.rows() != s.A.rows()) throw ModelError(where + ": B has wrong row count");
                     if (s.C.cols() != s.A.rows()) throw ModelError(where + ": C has wrong column count");
                   },
                   [&](const PolySubsystem& s) {
                     for (const auto& f : s.f) check_poly_vars(f, s.nx(), s.nu(), where);
                     for (const auto& h : s.h) check_poly_vars(h, s.nx(), s.nu(), where);
                     const auto z = origin(s.nx(), s.nu());
                     for (const auto& f : s.f) {
                       if (std::abs(f.eval(z)) > 1e-12) throw ModelError(where + ": f(0,0) != 0");
                     }
                     for (const auto& h : s.h) {
                       if (std::abs(h.eval(z)) > 1e-12) throw ModelError(where + ": h(0,0) != 0");
                     }
                   },
                   [&](const RationalSubsystem& s) {
                     if (s.q.size() != s.p.size()) throw ModelError(where + ": p and q differ in length");
                     for (const auto& f : s.p) check_poly_vars(f, s.nx(), s.nu(), where);
                     for (const auto& f : s.q) check_poly_vars(f, s.nx(), s.nu(), where);
                     for (const auto& h : s.h) check_poly_vars(h, s.nx(), s.nu(), where);
                     const auto z = origin(s.nx(), s.nu());
                     for (const auto& f : s.p) {
                       if (std::abs(f.eval(z)) > 1e-12) throw ModelError(where + ": p(0,0) != 0");
                     }
                     if (!(s.eps > 0)) throw ModelError(where + ": denominator margin must be positive");
                     std::vector<Var> vars;
                     for (int k = 0; k < s.nx(); ++k) vars.push_back(X(k));
                     for (int k = 0; k < s.nu(); ++k) vars.push_back(U(k));
                     for (std::size_t k = 0; k < s.q.size(); ++k) {
                       const Polynomial qe = s.q[k] - s.eps;
                       ConicProblem prob;
                       emit_sos(prob, ParamPolynomial(qe), sos_basis_for(ParamPolynomial(qe), vars), "q");
                       if (solve(prob).status != SolveStatus::Optimal) {
                         throw ModelError(where + ": denominator q" + std::to_string(k + 1) + " - eps is not SOS");
                       }
                     }
                   },
                   [&](const FixedSupplySubsystem& s) {
                     if (!is_symmetric(s.X)) throw ModelError(where + ": fixed supply X is not symmetric");
                     if (s.n_inputs < 0 || s.n_inputs > s.X.rows()) throw ModelError(where + ": bad input count");
                   }},
               p.subsystems[i]);
  }
  const Dims d = p.dims();
  if (p.M.rows() != d.total_m() || p.M.cols() != d.total_p()) {
    throw ModelError("M is " + std::to_string(p.M.rows()) + "x" + std::to_string(p.M.cols()) + ", expected " +
                     std::to_string(d.total_m()) + "x" + std::to_string(d.total_p()));
  }
  if (p.iqc) {
    if (static_cast<int>(p.iqc->psi.size()) != n) throw ModelError("iqc: need one psi per subsystem");
    for (int i = 0; i < n; ++i) {
      const auto& r = p.iqc->psi[i];
      if (r.inputs() != d.m[i] + d.p[i]) throw ModelError("iqc: psi " + std::to_string(i) + " input size mismatch");
      if (!is_hurwitz(r)) throw ModelError("iqc: psi " + std::to_string(i) + " is not Hurwitz");
      if (!std::holds_alternative<LtiSubsystem>(p.subsystems[i]) && r.states() > 0) {
        throw ModelError("iqc: dynamic psi is only supported for lti subsystems");
      }
    }
    if (p.iqc->psi_w.inputs() != p.pd + p.me) throw ModelError("iqc: psi_w input size mismatch");
    if (!is_hurwitz(p.iqc->psi_w)) throw ModelError("iqc: psi_w is not Hurwitz");
  }
  const MatrixXd W = p.W();
  const int wdim = p.iqc ? p.iqc->psi_w.outputs() : p.pd + p.me;
  if (W.rows() != wdim || W.cols() != wdim) throw ModelError("W has wrong size");
  if (!is_symmetric(W)) throw ModelError("W is not symmetric");
  for (const auto& pin : p.pins) {
    if (pin.subsystem < 0 || pin.subsystem >= n) throw ModelError("pin refers to a missing subsystem");
    const int k = p.supply_dim(pin.subsystem);
    if (pin.row < 0 || pin.col < 0 || pin.row >= k || pin.col >= k) throw ModelError("pin entry out of range");
  }
  for (const auto& a : p.pins) {
    for (const auto& b : p.pins) {
      if (a.subsystem == b.subsystem && ((a.row == b.row && a.col == b.col) || (a.row == b.col && a.col == b.row)) &&
          a.value != b.value) {
        throw ModelError("inconsistent pins on subsystem " + std::to_string(a.subsystem));
      }
    }
  }
  std::vector<std::string> warnings;
  for (auto& v : validate_assumption1(p.M, d).violations) warnings.push_back("assumption 1: " + v);
  return warnings;
}

MatrixXd assembled_form(const std::vector<MatrixXd>& xs, const MatrixXd& W, const MatrixXd& M, const Dims& dims) {
  if (static_cast<int>(xs.size()) != dims.n()) throw ModelError("assembled_form: wrong number of supply rates");
  std::vector<MatrixXd> blocks;
  for (int i = 0; i < dims.n(); ++i) {
    if (xs[i].rows() != dims.m[i] + dims.p[i]) throw ModelError("assembled_form: supply rate size mismatch");
    blocks.push_back(xs[i]);
  }
  if (W.rows() != dims.pd + dims.me) throw ModelError("assembled_form: W size mismatch");
  blocks.push_back(-W);
  const MatrixXd Q = blkdiag(blocks);
  MatrixXd MI(M.rows() + M.cols(), M.cols());
  MI << M, MatrixXd::Identity(M.cols(), M.cols());
  const MatrixXd T = build_permutation(dims) * MI;
  return sym(T.transpose() * Q * T);
}

}  // namespace dissip
