#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dissip/conic.hpp"
#include "dissip/polynomial.hpp"

namespace dissip {

struct MonomialBasis {
  std::vector<Monomial> monomials;  // sorted, no duplicates
  std::vector<Var> vars;
  int max_degree = 0;

  int size() const { return static_cast<int>(monomials.size()); }
};

/// All monomials in `vars` of degree ≤ degree/2. Throws on odd degree.
MonomialBasis default_basis(const std::vector<Var>& vars, int degree);

/// All monomials in `vars` with min_degree ≤ degree ≤ max_degree.
MonomialBasis monomials_between(const std::vector<Var>& vars, int min_degree, int max_degree);

/// Polynomial whose coefficients are affine in conic decision variables.
class ParamPolynomial {
 public:
  using Terms = std::map<Monomial, AffineExpr>;

  ParamPolynomial() = default;
  ParamPolynomial(const Polynomial& p);  // NOLINT(google-explicit-constructor)

  const Terms& terms() const { return terms_; }
  void add_term(const Monomial& m, const AffineExpr& e);
  AffineExpr coefficient(const Monomial& m) const;
  int degree() const;

  ParamPolynomial& operator+=(const ParamPolynomial& q);
  ParamPolynomial& operator-=(const ParamPolynomial& q);
  friend ParamPolynomial operator+(ParamPolynomial a, const ParamPolynomial& b) { return a += b; }
  friend ParamPolynomial operator-(ParamPolynomial a, const ParamPolynomial& b) { return a -= b; }
  friend ParamPolynomial operator*(const ParamPolynomial& a, const Polynomial& p);
  friend ParamPolynomial operator*(const Polynomial& p, const ParamPolynomial& a) { return a * p; }
  friend ParamPolynomial operator*(double s, ParamPolynomial a);

  ParamPolynomial derivative(Var v) const;
  ParamPolynomial substitute(const std::map<Var, Polynomial>& subs) const;
  /// Plugs in solved decision-variable values.
  Polynomial eval(const VectorXd& y) const;

 private:
  Terms terms_;
};

/// bᵀGb for a symmetric matrix variable G over basis b.
ParamPolynomial gram_polynomial(const SymVar& g, const MonomialBasis& basis);

/// Σ c_m m with a fresh scalar decision variable c_m per monomial.
ParamPolynomial free_polynomial(ConicProblem& prob, const MonomialBasis& monomials, const std::string& label);

class BasisDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GramConstraint {
  std::string label;
  SymVar gram;
  MonomialBasis basis;  // after pruning
  std::vector<std::pair<Monomial, AffineExpr>> equalities;  // coefficient match, expr == 0

  void dump(std::ostream& os, const ConicProblem& prob) const;
};

struct SosOptions {
  // Drop basis monomials b whose square b² is absent from p and cannot be
  // produced by any other pair of basis elements (their Gram row is forced
  // to zero).
  bool prune = true;
};

/// Adds {G ⪰ 0, coefficients(bᵀGb) = coefficients(p)} to `prob`.
GramConstraint emit_sos(ConicProblem& prob, const ParamPolynomial& p, const MonomialBasis& basis,
                        const std::string& label = "sos", const SosOptions& opts = {});

/// Basis for an SOS constraint on p over `vars`: monomials up to half the
/// (even-rounded) degree of p.
MonomialBasis sos_basis_for(const ParamPolynomial& p, const std::vector<Var>& vars);

}  // namespace dissip
