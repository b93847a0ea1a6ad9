#include <doctest.h>

#include <random>

#include "dissip/polynomial.hpp"

using namespace dissip;

namespace {

Polynomial random_poly(std::mt19937_64& rng, int nvars, int terms, int maxdeg) {
  std::uniform_int_distribution<int> var(0, nvars - 1), deg(0, maxdeg);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  Polynomial p;
  for (int t = 0; t < terms; ++t) {
    Polynomial m(coef(rng));
    int d = deg(rng);
    for (int k = 0; k < d; ++k) m *= Polynomial(X(var(rng)));
    p += m;
  }
  return p;
}

std::map<Var, double> random_point(std::mt19937_64& rng, int nvars) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::map<Var, double> z;
  for (int i = 0; i < nvars; ++i) z[X(i)] = u(rng);
  return z;
}

bool same(const Polynomial& p, const Polynomial& q, double tol = 1e-12) {
  Polynomial d = p - q;
  for (const auto& [m, c] : d.terms()) {
    if (std::abs(c) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("add and mul examples") {
  Polynomial x = X(0), y = X(1);
  CHECK(((x * x + 1.0) + Polynomial(-1.0)).terms() == (x * x).terms());
  CHECK(((x + y) + (x - y)).terms() == (2.0 * x).terms());
  CHECK(((x + 1.0) * (x - 1.0)).terms() == (x * x - 1.0).terms());
  CHECK((x * x * (y * y * y)).degree() == 5);
  CHECK((x + 0.0).terms() == x.terms());
}

TEST_CASE("grad") {
  Polynomial x1 = X(0), x2 = X(1);
  auto g = grad(x1 * x1 * x2, {X(0), X(1)});
  CHECK(same(g[0], 2.0 * x1 * x2));
  CHECK(same(g[1], x1 * x1));
  CHECK(grad(Polynomial(3.0), {X(0)})[0].is_zero());

  // storage function of the rational example
  const double a = 1.5, b = 0.5, c = 1.0;
  Polynomial v = (a * b / 2) * x1.pow(4) + (a * c / 2) * x2.pow(4) + a * x2 * x2;
  auto gv = grad(v, {X(0), X(1)});
  CHECK(same(gv[0], 2 * a * b * x1.pow(3)));
  CHECK(same(gv[1], 2 * a * c * x2.pow(3) + 2 * a * x2));
}

TEST_CASE("eval and substitute") {
  Polynomial x1 = X(0), x2 = X(1), u = U(0), y = Y(0);
  CHECK(eval(x1 * x1 + 2.0 * x1 * x2, {{X(0), 1.0}, {X(1), 2.0}}) == doctest::Approx(5.0));
  CHECK(eval(Polynomial(), {}) == 0.0);
  CHECK(eval((x1 * x1 + 1.0).pow(2), {{X(0), 2.0}}) == doctest::Approx(25.0));
  CHECK(same(substitute(u * u - y * y, Y(0), x2), u * u - x2 * x2));
  CHECK(same(substitute(x1 * x2 + 3.0, X(0), x1), x1 * x2 + 3.0));
  CHECK(eval(substitute(y * u, Y(0), x2), {{X(1), 3.0}, {U(0), 2.0}}) == doctest::Approx(6.0));
  CHECK_THROWS_AS(eval(x1 * x2, {{X(0), 1.0}}), PolynomialError);
}

TEST_CASE("variable table mismatch") {
  VariableTable t1{.nx = 1, .nu = 1};
  VariableTable t2{.nx = 2, .nu = 1};
  Polynomial p = Polynomial(X(0)).with_table(t1);
  Polynomial q = Polynomial(X(0)).with_table(t2);
  CHECK_THROWS_AS(add(p, q), PolynomialError);
  CHECK_THROWS_AS(mul(p, q), PolynomialError);
  CHECK_NOTHROW(add(p, Polynomial(1.0)));
}

TEST_CASE("ring properties on random polynomials") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Polynomial p = random_poly(rng, 3, 5, 3), q = random_poly(rng, 3, 5, 3), r = random_poly(rng, 3, 4, 2);
    CHECK(same((p * q) * r, p * (q * r), 1e-10));
    CHECK(same(p * (q + r), p * q + p * r, 1e-10));
    if (!p.is_zero() && !q.is_zero()) CHECK((p * q).degree() == p.degree() + q.degree());
    auto z = random_point(rng, 3);
    const double pv = p.eval(z), qv = q.eval(z);
    CHECK(eval(p + q, z) == doctest::Approx(pv + qv).epsilon(1e-10));
    CHECK(eval(p * q, z) == doctest::Approx(pv * qv).epsilon(1e-10));
    for (int i = 0; i < 3; ++i) {
      Polynomial lhs = (p * q).derivative(X(i));
      Polynomial rhs = p * q.derivative(X(i)) + q * p.derivative(X(i));
      CHECK(same(lhs, rhs, 1e-10));
    }
    Polynomial s = substitute(p, X(0), q);
    std::map<Var, double> z2 = z;
    z2[X(0)] = qv;
    CHECK(eval(s, z) == doctest::Approx(p.eval(z2)).epsilon(1e-9));
  }
}

TEST_CASE("parse and print round trip") {
  Polynomial p = parse_polynomial("3.5*x1^2*u1 - 2*x2 + 1e-3");
  CHECK(p.coefficient(Monomial({{X(0), 2}, {U(0), 1}})) == 3.5);
  CHECK(p.coefficient(Monomial(X(1))) == -2.0);
  CHECK(p.coefficient(Monomial()) == 1e-3);
  CHECK(parse_polynomial(p.str()).terms() == p.terms());
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    Polynomial q = random_poly(rng, 4, 6, 4);
    CHECK(parse_polynomial(q.str()).terms() == q.terms());
  }
  CHECK(parse_polynomial("-x1^3 + u1").terms() == (-1.0 * Polynomial(X(0)).pow(3) + Polynomial(U(0))).terms());
  CHECK_THROWS_AS(parse_polynomial("3*z1"), PolynomialError);
  CHECK_THROWS_AS(parse_polynomial("3*x1^"), PolynomialError);
}

TEST_CASE("graded lex order is deterministic") {
  Monomial one, x1(X(0)), x2(X(1)), x1sq(X(0), 2);
  CHECK(one < x1);
  CHECK(x1 < x2);
  CHECK(x2 < x1sq);
  CHECK(x1sq < x1 * x2);
  CHECK(x1 * x2 < Monomial(X(1), 2));
}
