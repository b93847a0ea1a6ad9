#include <doctest.h>

#include <cmath>
#include <random>

#include "dissip/examples.hpp"
#include "dissip/io.hpp"
#include "dissip/local_cert.hpp"

using namespace dissip;

namespace {

double sigma_max(const MatrixXd& m) { return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0); }

// min over a log grid of b in [1e-2, 1e2]^k of σ̄(BMB⁻¹), k = n_free ≤ 2.
double grid_scaled_norm(const MatrixXd& M, int n_free, int points) {
  const int n = static_cast<int>(M.rows());
  auto at = [&](double b1, double b2) {
    VectorXd b = VectorXd::Ones(n);
    if (n_free > 0) b(0) = b1;
    if (n_free > 1) b(1) = b2;
    return sigma_max(b.asDiagonal() * M * b.cwiseInverse().asDiagonal());
  };
  double best = 1e300;
  for (int i = 0; i < points; ++i) {
    const double b1 = std::pow(10.0, -2.0 + 4.0 * i / (points - 1));
    if (n_free < 2) {
      best = std::min(best, at(b1, 1.0));
      continue;
    }
    for (int j = 0; j < points; ++j) best = std::min(best, at(b1, std::pow(10.0, -2.0 + 4.0 * j / (points - 1))));
  }
  return best;
}

}  // namespace

TEST_CASE("portable rng") {
  PortableRng a(42), b(42), c(43);
  double diff = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(x == b.uniform());
    diff += std::abs(x - c.uniform());
  }
  CHECK(diff > 0.0);
  PortableRng g(7);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double z = g.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / 20000) < 0.05);
  CHECK(std::abs(s2 / 20000 - 1.0) < 0.05);
}

TEST_CASE("diag_scaled_norm oracles") {
  MatrixXd m(2, 2);
  m << 0, 2, 0.5, 0;
  CHECK(diag_scaled_norm(m, 1) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(diag_scaled_norm(m, 0) == doctest::Approx(2.0).epsilon(1e-3));

  const double t = 0.7;
  MatrixXd rot(2, 2);
  rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  CHECK(diag_scaled_norm(rot, 2) == doctest::Approx(1.0).epsilon(1e-3));

  MatrixXd d = MatrixXd::Zero(3, 3);
  d.diagonal() << 3, -2, 0.5;
  CHECK(diag_scaled_norm(d, 2) == doctest::Approx(3.0).epsilon(1e-3));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 4; ++trial) {
    MatrixXd r(3, 3);
    for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = g(rng);
    const double oracle = grid_scaled_norm(r, 2, 161);
    const double v = diag_scaled_norm(r, 2);
    CHECK(v <= oracle * (1.0 + 1e-3));
    CHECK(v >= oracle * 0.97);
  }
}

TEST_CASE("skew family") {
  const Problem p = gen_skew(8, 5);
  REQUIRE(p.subsystems.size() == 8);
  const MatrixXd top = p.M.topRows(8);
  CHECK((top + top.transpose()).norm() == 0.0);
  CHECK(p.M.bottomRows(8) == MatrixXd::Identity(8, 8));
  CHECK(validate(p).empty());
  // Each block is passive with P = I.
  for (const auto& s : p.subsystems) {
    const auto& l = std::get<LtiSubsystem>(s);
    CHECK((l.A + l.A.transpose()).maxCoeff() <= 0.0);
    const auto c = lti_local_update(l, {passivity_supply(1), {}});
    REQUIRE(c.ok());
    CHECK(c.distance < 1e-8);
  }
  CHECK(problem_to_json(gen_skew(8, 5)).dump() == problem_to_json(p).dump());
  CHECK(problem_to_json(gen_skew(8, 6)).dump() != problem_to_json(p).dump());
}

TEST_CASE("rational and poly families") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Problem r = gen_rational(6, seed);
    CHECK(validate(r).empty());
    CHECK(r.subsystems.size() == 6);
    CHECK(std::holds_alternative<RationalSubsystem>(r.subsystems[0]));
    CHECK(r.objective.kind == Objective::Kind::l2_gain);
    const Problem q = gen_poly(4, seed);
    CHECK(validate(q).empty());
    CHECK(std::holds_alternative<PolySubsystem>(q.subsystems[0]));
  }
  RationalParams poly;
  poly.polynomial = true;
  const Problem r = gen_rational(3, 1, poly);
  CHECK(std::holds_alternative<PolySubsystem>(r.subsystems[0]));
  CHECK(problem_to_json(gen_rational(5, 9)).dump() == problem_to_json(gen_rational(5, 9)).dump());
}

TEST_CASE("platoon family") {
  const int n = 5;
  const Problem p = gen_platoon(n, true, 0.8);
  CHECK(p.subsystems.size() == static_cast<size_t>(2 * n - 1));
  CHECK(p.pins.size() == static_cast<size_t>(2 * n));
  CHECK(gen_platoon(n, false).pins.empty());
  CHECK(p.objective.gamma == 0.8);
  CHECK_NOTHROW(validate(p));
}

TEST_CASE("iqc pair") {
  const Problem stat = gen_iqc_pair(false);
  const Problem dyn = gen_iqc_pair(true, 3);
  CHECK_FALSE(stat.iqc.has_value());
  REQUIRE(dyn.iqc.has_value());
  CHECK(dyn.iqc->psi[0].outputs() == 8);
  CHECK(is_hurwitz(dyn.iqc->psi[0]));
  CHECK(peak_gain(stat, 400) == doctest::Approx(0.862).epsilon(0.01));
}
