#include <doctest.h>

#include <random>
#include <sstream>

#include "dissip/sos.hpp"

using namespace dissip;

namespace {

// Global minimum of a univariate polynomial via the real roots of p'.
double univariate_min(const Polynomial& p) {
  const int d = p.degree();
  const Polynomial dp = p.derivative(X(0));
  const int n = dp.degree();
  std::vector<double> c(n + 1, 0.0);
  for (const auto& [m, v] : dp.terms()) c[m.degree()] = v;
  MatrixXd comp = MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
  Eigen::EigenSolver<MatrixXd> es(comp);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (std::abs(es.eigenvalues()(i).imag()) > 1e-9) continue;
    best = std::min(best, p.eval({{X(0), es.eigenvalues()(i).real()}}));
  }
  (void)d;
  return best;
}

SolveStatus sos_status(const Polynomial& p, const MonomialBasis& b) {
  ConicProblem prob;
  emit_sos(prob, ParamPolynomial(p), b);
  return solve(prob).status;
}

}  // namespace

TEST_CASE("default basis") {
  auto b = default_basis({X(0)}, 4);
  REQUIRE(b.size() == 3);
  CHECK(b.monomials[0].is_constant());
  CHECK(b.monomials[1] == Monomial(X(0)));
  CHECK(b.monomials[2] == Monomial(X(0), 2));
  auto b2 = default_basis({X(0), X(1)}, 2);
  REQUIRE(b2.size() == 3);
  CHECK(b2.monomials[1] == Monomial(X(0)));
  CHECK(b2.monomials[2] == Monomial(X(1)));
  CHECK(default_basis({}, 0).size() == 1);
  CHECK_THROWS_AS(default_basis({X(0)}, 3), std::invalid_argument);
}

TEST_CASE("emit_sos feasibility examples") {
  Polynomial x = X(0);
  auto b = default_basis({X(0)}, 4);
  CHECK(sos_status(x.pow(4) + 2.0 * x * x + 1.0, b) == SolveStatus::Optimal);
  CHECK(sos_status(-1.0 * x * x, default_basis({X(0)}, 2)) == SolveStatus::Infeasible);

  for (double c0 : {5.0, 2.5, 2.0, 1.0}) {
    Polynomial p = x.pow(4) - 3.0 * x * x + c0;
    const double pmin = univariate_min(p);
    const SolveStatus s = sos_status(p, b);
    CAPTURE(c0);
    if (pmin > 1e-6) CHECK(s == SolveStatus::Optimal);
    if (pmin < -1e-6) CHECK(s == SolveStatus::Infeasible);
  }
}

TEST_CASE("basis deficient error names the monomial") {
  ConicProblem prob;
  Polynomial x = X(0);
  try {
    emit_sos(prob, ParamPolynomial(x.pow(6)), default_basis({X(0)}, 4), "p");
    FAIL("expected BasisDeficientError");
  } catch (const BasisDeficientError& e) {
    CHECK(std::string(e.what()).find("x1^6") != std::string::npos);
  }
}

TEST_CASE("Gram round trip") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    auto basis = default_basis({X(0), X(1), U(0)}, 4);
    const int n = basis.size();
    MatrixXd l(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) l(i, j) = g(rng);
    MatrixXd gram = l * l.transpose();
    Polynomial p;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) p += Polynomial::monomial(basis.monomials[i] * basis.monomials[j], gram(i, j));

    ConicProblem prob;
    SosOptions opts;
    opts.prune = false;
    GramConstraint gc = emit_sos(prob, ParamPolynomial(p), basis, "rt", opts);
    VectorXd y = VectorXd::Zero(prob.num_variables());
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) y(gc.gram.index(i, j)) = gram(i, j);
    for (const auto& [m, e] : gc.equalities) CHECK(std::abs(e.eval(y)) < 1e-9 * (1 + gram.norm()));
  }
}

TEST_CASE("emitted constraints are deterministic") {
  Polynomial x = X(0), u = U(0);
  ParamPolynomial p = ParamPolynomial(x.pow(4) + x * u + u * u);
  auto dump = [&] {
    ConicProblem prob;
    std::ostringstream os;
    emit_sos(prob, p, default_basis({X(0), U(0)}, 4), "d").dump(os, prob);
    return os.str();
  };
  CHECK(dump() == dump());
}

TEST_CASE("enlarging the basis keeps feasibility") {
  Polynomial x = X(0), y = X(1);
  Polynomial p = (x * x - y).pow(2) + (x + y).pow(2);
  CHECK(sos_status(p, default_basis({X(0), X(1)}, 4)) == SolveStatus::Optimal);
  CHECK(sos_status(p, default_basis({X(0), X(1)}, 6)) == SolveStatus::Optimal);
}

TEST_CASE("free coefficients enter linearly") {
  // p = x^4 + c x^2 + 1 is SOS iff c ≥ -2; maximize -c ⇒ c = -2.
  ConicProblem prob;
  int c = prob.add_scalar("c");
  Polynomial x = X(0);
  ParamPolynomial p = ParamPolynomial(x.pow(4) + 1.0);
  p.add_term(Monomial(X(0), 2), AffineExpr::variable(c));
  emit_sos(prob, p, default_basis({X(0)}, 4));
  prob.add_linear_objective(AffineExpr::variable(c));
  SolveReport r = solve(prob);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.value(c) == doctest::Approx(-2.0).epsilon(1e-5));
}
