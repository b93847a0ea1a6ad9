#include "dissip/sos.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>

namespace dissip {

namespace {

void extend(const std::vector<Var>& vars, std::size_t from, int budget, std::vector<std::pair<Var, int>>& cur,
            std::vector<Monomial>& out) {
  if (from == vars.size()) {
    out.emplace_back(cur);
    return;
  }
  for (int k = 0; k <= budget; ++k) {
    if (k > 0) cur.emplace_back(vars[from], k);
    extend(vars, from + 1, budget - k, cur, out);
    if (k > 0) cur.pop_back();
  }
}

bool may_be_nonzero(const AffineExpr& e) { return !e.terms.empty() || e.constant != 0.0; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MonomialBasis monomials_between(const std::vector<Var>& vars, int min_degree, int max_degree) {
  MonomialBasis b;
  b.vars = vars;
  std::sort(b.vars.begin(), b.vars.end());
  b.vars.erase(std::unique(b.vars.begin(), b.vars.end()), b.vars.end());
  b.max_degree = max_degree;
  if (max_degree < 0) return b;
  std::vector<Monomial> all;
  std::vector<std::pair<Var, int>> cur;
  extend(b.vars, 0, max_degree, cur, all);
  for (auto& m : all) {
    if (m.degree() >= min_degree) b.monomials.push_back(m);
  }
  std::sort(b.monomials.begin(), b.monomials.end());
  return b;
}

MonomialBasis default_basis(const std::vector<Var>& vars, int degree) {
  if (degree < 0 || degree % 2 != 0) {
    throw std::invalid_argument("default_basis: degree must be even and nonnegative, got " + std::to_string(degree));
  }
  return monomials_between(vars, 0, degree / 2);
}

// ---------------------------------------------------------- ParamPolynomial

ParamPolynomial::ParamPolynomial(const Polynomial& p) {
  for (const auto& [m, c] : p.terms()) terms_.emplace(m, AffineExpr(c));
}

void ParamPolynomial::add_term(const Monomial& m, const AffineExpr& e) {
  auto [it, inserted] = terms_.emplace(m, e);
  if (!inserted) it->second += e;
  if (!may_be_nonzero(it->second)) terms_.erase(it);
}

AffineExpr ParamPolynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? AffineExpr() : it->second;
}

int ParamPolynomial::degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

ParamPolynomial& ParamPolynomial::operator+=(const ParamPolynomial& q) {
  for (const auto& [m, e] : q.terms_) add_term(m, e);
  return *this;
}

ParamPolynomial& ParamPolynomial::operator-=(const ParamPolynomial& q) {
  for (const auto& [m, e] : q.terms_) add_term(m, -e);
  return *this;
}

ParamPolynomial operator*(const ParamPolynomial& a, const Polynomial& p) {
  ParamPolynomial out;
  for (const auto& [ma, e] : a.terms_) {
    for (const auto& [mp, c] : p.terms()) out.add_term(ma * mp, c * e);
  }
  return out;
}

ParamPolynomial operator*(double s, ParamPolynomial a) {
  if (s == 0.0) return {};
  for (auto& [m, e] : a.terms_) e *= s;
  return a;
}

ParamPolynomial ParamPolynomial::derivative(Var v) const {
  ParamPolynomial out;
  for (const auto& [m, e] : terms_) {
    const int k = m.power(v);
    if (k == 0) continue;
    std::vector<std::pair<Var, int>> powers;
    for (const auto& [w, j] : m.powers()) {
      if (w != v) {
        powers.emplace_back(w, j);
      } else if (j > 1) {
        powers.emplace_back(w, j - 1);
      }
    }
    out.add_term(Monomial(std::move(powers)), static_cast<double>(k) * e);
  }
  return out;
}

ParamPolynomial ParamPolynomial::substitute(const std::map<Var, Polynomial>& subs) const {
  ParamPolynomial out;
  for (const auto& [m, e] : terms_) {
    const Polynomial image = dissip::substitute(Polynomial::monomial(m), subs);
    for (const auto& [mi, c] : image.terms()) out.add_term(mi, c * e);
  }
  return out;
}

Polynomial ParamPolynomial::eval(const VectorXd& y) const {
  Polynomial::Terms t;
  for (const auto& [m, e] : terms_) {
    const double c = e.eval(y);
    if (c != 0.0) t.emplace(m, c);
  }
  return Polynomial(std::move(t));
}

ParamPolynomial gram_polynomial(const SymVar& g, const MonomialBasis& basis) {
  if (g.dim != basis.size()) throw std::invalid_argument("gram_polynomial: size mismatch");
  ParamPolynomial out;
  for (int i = 0; i < basis.size(); ++i) {
    for (int j = i; j < basis.size(); ++j) {
      out.add_term(basis.monomials[i] * basis.monomials[j], AffineExpr::variable(g.index(i, j), i == j ? 1.0 : 2.0));
    }
  }
  return out;
}

ParamPolynomial free_polynomial(ConicProblem& prob, const MonomialBasis& monomials, const std::string& label) {
  ParamPolynomial out;
  for (const auto& m : monomials.monomials) {
    out.add_term(m, AffineExpr::variable(prob.add_scalar(label + "[" + m.str() + "]")));
  }
  return out;
}

MonomialBasis sos_basis_for(const ParamPolynomial& p, const std::vector<Var>& vars) {
  int lo = std::numeric_limits<int>::max(), hi = 0;
  for (const auto& [m, e] : p.terms()) {
    lo = std::min(lo, m.degree());
    hi = std::max(hi, m.degree());
  }
  if (p.terms().empty()) lo = 0;
  return monomials_between(vars, lo / 2, (hi + 1) / 2);
}

// ---------------------------------------------------------------- emit_sos

GramConstraint emit_sos(ConicProblem& prob, const ParamPolynomial& p, const MonomialBasis& basis,
                        const std::string& label, const SosOptions& opts) {
  GramConstraint gc;
  gc.label = label;
  gc.basis = basis;
  const std::set<Var> allowed(basis.vars.begin(), basis.vars.end());
  for (const auto& [m, e] : p.terms()) {
    for (const auto& [v, k] : m.powers()) {
      if (!allowed.contains(v)) {
        throw BasisDeficientError("sos '" + label + "': monomial " + m.str() + " uses variable " + to_string(v) +
                                  " outside the basis variables");
      }
    }
  }

  {
    std::set<Monomial> products;
    for (std::size_t i = 0; i < basis.monomials.size(); ++i) {
      for (std::size_t j = i; j < basis.monomials.size(); ++j) products.insert(basis.monomials[i] * basis.monomials[j]);
    }
    for (const auto& [m, e] : p.terms()) {
      if (!products.contains(m)) {
        throw BasisDeficientError("sos '" + label + "': monomial " + m.str() + " is not a product of basis monomials");
      }
    }
  }

  // Terms of p left outside the pruned span still get their equality (forcing
  // the coefficient to zero), exactly as the full basis would.
  if (opts.prune) {
    std::vector<Monomial>& b = gc.basis.monomials;
    bool changed = true;
    while (changed) {
      changed = false;
      std::map<Monomial, int> cross;
      for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = i + 1; j < b.size(); ++j) ++cross[b[i] * b[j]];
      }
      std::vector<Monomial> kept;
      for (const auto& m : b) {
        const Monomial sq = m * m;
        if (p.terms().contains(sq) || cross.contains(sq)) {
          kept.push_back(m);
        } else {
          changed = true;
        }
      }
      b = std::move(kept);
    }
  }

  const int n = gc.basis.size();
  gc.gram = prob.add_symmetric(n, label + ".G");
  if (n > 0) prob.add_psd(gc.gram, false, label);

  const ParamPolynomial bgb = gram_polynomial(gc.gram, gc.basis);
  std::map<Monomial, AffineExpr> rows;
  for (const auto& [m, e] : bgb.terms()) rows[m] += e;
  for (const auto& [m, e] : p.terms()) rows[m] -= e;
  for (auto& [m, e] : rows) {
    prob.add_equality(e, label + "[" + m.str() + "]");
    gc.equalities.emplace_back(m, std::move(e));
  }
  return gc;
}

void GramConstraint::dump(std::ostream& os, const ConicProblem& prob) const {
  os << "sos " << label << " gram " << gram.dim << "\n  basis:";
  for (const auto& m : basis.monomials) os << ' ' << m.str();
  os << '\n';
  for (const auto& [m, e] : equalities) {
    os << "  " << m.str() << ":";
    for (const auto& [v, c] : e.terms) os << ' ' << fmt(c) << '*' << prob.variable_name(v);
    os << " + " << fmt(e.constant) << " = 0\n";
  }
}

}  // namespace dissip
