#include <doctest.h>

#include <random>
#include <sstream>

#include "dissip/conic.hpp"

using namespace dissip;

namespace {

MatrixXd clip_psd(const MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(c);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd random_sym(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return sym(a);
}

}  // namespace

TEST_CASE("psd_check") {
  CHECK(psd_check(MatrixXd::Identity(3, 3), 0.0));
  MatrixXd d(2, 2);
  d << 1, 0, 0, -1e-3;
  CHECK_FALSE(psd_check(d, 1e-7));
  CHECK(psd_check(MatrixXd::Zero(4, 4), 0.0));
  MatrixXd ns(2, 2);
  ns << 1, 2, 0, 1;
  CHECK_THROWS_AS(psd_check(ns, 1e-7), std::invalid_argument);
}

TEST_CASE("projection of diag(1,-1) onto the PSD cone") {
  ConicProblem p;
  SymVar x = p.add_symmetric(2, "X");
  p.add_psd(x);
  MatrixXd c(2, 2);
  c << 1, 0, 0, -1;
  p.add_distance_objective(AffineMatrix::variable(x), c);
  SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  MatrixXd expect(2, 2);
  expect << 1, 0, 0, 0;
  CHECK((r.value(x) - expect).norm() < 1e-6);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("PSD projection matches eigenvalue clipping") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 8;
    MatrixXd c = random_sym(rng, n);
    ConicProblem p;
    SymVar x = p.add_symmetric(n);
    p.add_psd(x);
    p.add_distance_objective(AffineMatrix::variable(x), c);
    SolveReport r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    MatrixXd xv = r.value(x);
    CHECK((xv - clip_psd(c)).norm() < 1e-6);
    const double recomputed = (xv - c).squaredNorm();
    CHECK(std::abs(r.objective - recomputed) <= 1e-6 * std::max(1.0, recomputed));
  }
}

TEST_CASE("infeasible scalar LMIs") {
  ConicProblem p;
  int x = p.add_scalar("x");
  p.add_lmi(AffineMatrix::scalar(AffineExpr::variable(x)), LmiSense::psd);
  p.add_lmi(AffineMatrix::scalar(AffineExpr::variable(x) + AffineExpr(1.0)), LmiSense::nsd);
  SolveReport r = solve(p);
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK_FALSE(r.has_values());
}

TEST_CASE("unconstrained distance returns the target") {
  std::mt19937_64 rng(1);
  MatrixXd c = random_sym(rng, 3);
  ConicProblem p;
  SymVar x = p.add_symmetric(3);
  p.add_distance_objective(AffineMatrix::variable(x), c);
  SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK((r.value(x) - c).norm() < 1e-9);
}

TEST_CASE("equalities and a strict LMI") {
  // x + y = 1, [[x, 1], [1, y]] ⪰ 0 forces x = y = 1/2 ... which is infeasible
  // (xy ≥ 1 needs x + y ≥ 2), so shift the right-hand side to 4.
  ConicProblem p;
  int x = p.add_scalar(), y = p.add_scalar();
  p.add_equality(AffineExpr::variable(x) + AffineExpr::variable(y) - AffineExpr(4.0));
  AffineMatrix m(2, 2);
  m.add_entry(0, 0, AffineExpr::variable(x));
  m.add_entry(1, 1, AffineExpr::variable(y));
  m.add_entry(0, 1, AffineExpr(1.0));
  m.add_entry(1, 0, AffineExpr(1.0));
  p.add_lmi(m, LmiSense::psd, true);
  p.add_squared_objective(AffineExpr::variable(x) - AffineExpr(3.9));
  SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  const double xv = r.value(x), yv = r.value(y);
  CHECK(xv + yv == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(xv * yv >= 1.0);
  // boundary: x(4 - x) = 1 at x = 2 + √3 ≈ 3.732
  CHECK(xv == doctest::Approx(2.0 + std::sqrt(3.0)).epsilon(1e-4));

  ConicProblem q = p;
  q.add_equality(AffineExpr::variable(x) - AffineExpr(1.0));
  q.add_equality(AffineExpr::variable(y) - AffineExpr(0.5));
  CHECK(solve(q).status == SolveStatus::Infeasible);
}

TEST_CASE("facial reduction handles a structurally zero row") {
  // [[0, a], [a, b]] ⪰ 0 forces a = 0.
  ConicProblem p;
  int a = p.add_scalar(), b = p.add_scalar();
  AffineMatrix m(2, 2);
  m.add_entry(0, 1, AffineExpr::variable(a));
  m.add_entry(1, 0, AffineExpr::variable(a));
  m.add_entry(1, 1, AffineExpr::variable(b));
  p.add_lmi(m, LmiSense::psd, true);
  p.add_squared_objective(AffineExpr::variable(a) - AffineExpr(2.0));
  p.add_squared_objective(AffineExpr::variable(b) - AffineExpr(3.0));
  SolveReport r = solve(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(std::abs(r.value(a)) < 1e-9);
  CHECK(r.value(b) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("sdpa dump is stable") {
  ConicProblem p;
  SymVar x = p.add_symmetric(2);
  p.add_psd(x);
  p.add_equality(AffineExpr::variable(x.index(0, 0)) - AffineExpr(1.0));
  std::ostringstream a, b;
  p.dump_sdpa(a);
  p.dump_sdpa(b);
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());
}
