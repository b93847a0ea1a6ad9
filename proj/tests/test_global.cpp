#include <doctest.h>

#include <random>

#include "dissip/global_cert.hpp"

using namespace dissip;

namespace {

Dims scalar_dims(int n, int pd, int me) {
  Dims d;
  d.m.assign(n, 1);
  d.p.assign(n, 1);
  d.pd = pd;
  d.me = me;
  return d;
}

// u1 = −y2 + d, u2 = y1, e = y1.
GlobalProblem feedback_pair(const MatrixXd& W) {
  GlobalProblem gp;
  gp.M = MatrixXd(3, 3);
  gp.M << 0, -1, 1, 1, 0, 0, 1, 0, 0;
  gp.dims = scalar_dims(2, 1, 1);
  gp.W = W;
  return gp;
}

// u = d, e = y.
GlobalProblem passthrough(const MatrixXd& W) {
  GlobalProblem gp;
  gp.M = MatrixXd(2, 2);
  gp.M << 0, 1, 1, 0;
  gp.dims = scalar_dims(1, 1, 1);
  gp.W = W;
  return gp;
}

MatrixXd random_sym(std::mt19937_64& rng, int n, double s = 1.0) {
  std::normal_distribution<double> g(0.0, s);
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return sym(a);
}

MatrixXd psd_part(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
}

double tuple_dist(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("check_global examples") {
  const MatrixXd pass = passivity_supply(1);
  CHECK(check_global({pass, pass}, feedback_pair(pass)).ok);
  CHECK(check_global({pass, pass}, feedback_pair(pass)).lambda_max == doctest::Approx(0.0));
  CHECK_FALSE(check_global({pass, pass}, feedback_pair(MatrixXd::Zero(2, 2))).ok);
  const MatrixXd w = l2_gain_supply(0.5, 1, 1);
  CHECK(check_global({w}, passthrough(w)).ok);
  CHECK_THROWS(check_global({pass}, feedback_pair(pass)));
}

TEST_CASE("assemble_static_lmi") {
  std::mt19937_64 rng(3);
  const GlobalProblem gp = feedback_pair(MatrixXd::Zero(2, 2));
  ConicProblem prob;
  const SymVar a = prob.add_symmetric(2), b = prob.add_symmetric(2);
  const AffineMatrix L = assemble_static_lmi({AffineMatrix::variable(a), AffineMatrix::variable(b)},
                                             MatrixXd::Constant(2, 2, 0.3), gp.M, gp.dims);
  for (int t = 0; t < 5; ++t) {
    const MatrixXd xa = random_sym(rng, 2), xb = random_sym(rng, 2);
    VectorXd y(prob.num_variables());
    for (int r = 0; r < 2; ++r) {
      for (int c = r; c < 2; ++c) {
        y(a.index(r, c)) = xa(r, c);
        y(b.index(r, c)) = xb(r, c);
      }
    }
    const MatrixXd num = assemble_static_lmi({xa, xb}, MatrixXd::Constant(2, 2, 0.3), gp.M, gp.dims);
    CHECK((L.eval(y) - num).norm() < 1e-12);
  }
  const MatrixXd z = MatrixXd::Zero(2, 2);
  CHECK(assemble_static_lmi({z, z}, z, gp.M, gp.dims).norm() == 0.0);

  // Lossless skew interconnection of passive blocks: exactly zero.
  MatrixXd skew(2, 2);
  skew << 0, 1.7, -1.7, 0;
  const MatrixXd pass = passivity_supply(1);
  CHECK(assemble_static_lmi({pass, pass}, MatrixXd::Zero(0, 0), skew, scalar_dims(2, 0, 0)).norm() < 1e-15);
}

TEST_CASE("global_update projection") {
  // Target inside G: unchanged.
  const MatrixXd pass = passivity_supply(1);
  MatrixXd inner = pass;
  inner.diagonal().setConstant(-0.1);
  const GlobalProblem fb = feedback_pair(pass);
  const auto in = global_update({inner, inner}, fb);
  REQUIRE(in.ok());
  CHECK(in.distance < 1e-10);
  CHECK((in.Z[0] - inner).norm() < 1e-5);

  // Passthrough: G = {X ⪯ W}, so the projection is W − (W − T)₊ up to the margin.
  std::mt19937_64 rng(5);
  const MatrixXd W = l2_gain_supply(1.0, 1, 1);
  const GlobalProblem pt = passthrough(W);
  MatrixXd t(2, 2);
  t << 2, 0, 0, -1;
  auto c = global_update({t}, pt);
  REQUIRE(c.ok());
  CHECK((c.Z[0] - W).norm() < 1e-5);
  for (int k = 0; k < 20; ++k) {
    const MatrixXd target = random_sym(rng, 2, 2.0);
    const MatrixXd oracle = W - psd_part(W - target);
    const auto r = global_update({target}, pt);
    REQUIRE(r.ok());
    CHECK((r.Z[0] - oracle).norm() < 1e-5);
    CHECK(check_global(r.Z, pt).ok);
  }
}

TEST_CASE("global_update properties") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 6; ++trial) {
    GlobalProblem gp;
    gp.dims = scalar_dims(2, 1, 1);
    gp.M = MatrixXd(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) gp.M(i, j) = g(rng);
    }
    gp.M(0, 0) = gp.M(1, 1) = 0.0;
    gp.W = l2_gain_supply(1.0 + std::abs(g(rng)), 1, 1);
    const std::vector<MatrixXd> a = {random_sym(rng, 2), random_sym(rng, 2)};
    const std::vector<MatrixXd> b = {random_sym(rng, 2), random_sym(rng, 2)};
    const auto pa = global_update(a, gp), pb = global_update(b, gp);
    REQUIRE(pa.ok());
    REQUIRE(pb.ok());
    CHECK(check_global(pa.Z, gp, 1e-6).ok);
    CHECK(tuple_dist(pa.Z, pb.Z) <= tuple_dist(a, b) + 1e-6);

    // The same instance through the IQC path with identity filters.
    GlobalProblem iq = gp;
    iq.iqc = IqcSpec{{static_identity(2), static_identity(2)}, static_identity(2)};
    const auto qa = global_update(a, iq);
    REQUIRE(qa.ok());
    CHECK(tuple_dist(pa.Z, qa.Z) < 1e-6);
    CHECK(qa.P.size() == 0);
  }
}

TEST_CASE("pins in the global update") {
  const MatrixXd pass = passivity_supply(1);
  GlobalProblem fb = feedback_pair(pass);
  fb.pins = {{0, 0, 0, 0.0}, {0, 0, 1, 1.0}};
  MatrixXd t(2, 2);
  t << 0.4, 0.3, 0.3, 0.2;
  const auto c = global_update({t, t}, fb);
  REQUIRE(c.ok());
  CHECK(c.Z[0](0, 0) == 0.0);
  CHECK(c.Z[0](0, 1) == 1.0);
  CHECK(c.Z[0](1, 0) == 1.0);
}

TEST_CASE("iqc global lmi") {
  // Static Ψ: the IQC form equals the static one.
  const GlobalProblem fb = feedback_pair(passivity_supply(1));
  GlobalProblem iq = fb;
  iq.iqc = IqcSpec{{static_identity(2), static_identity(2)}, static_identity(2)};
  const MatrixXd x = passivity_supply(1);
  const MatrixXd Ls = assemble_static_lmi({x, x}, fb.W, fb.M, fb.dims);
  const MatrixXd Li = assemble_iqc_lmi({AffineMatrix::constant(x), AffineMatrix::constant(x)}, AffineMatrix(0, 0), iq)
                          .eval(VectorXd());
  CHECK((Ls - Li).norm() < 1e-14);

  // Sizing of a 30-block instance with five-term filters.
  GlobalProblem big;
  big.dims = scalar_dims(30, 1, 1);
  big.M = MatrixXd::Zero(31, 31);
  big.W = l2_gain_supply(1.0, 1, 1);
  IqcSpec spec;
  for (int i = 0; i < 30; ++i) spec.psi.push_back(pole_basis(1.0, 5, 2));
  spec.psi_w = static_identity(2);
  big.iqc = spec;
  CHECK(big.filter_states() == 300);
  CHECK(big.supply_dim(0) == 12);
  CHECK(iqc_decision_variables(big) == 47490);

  // Dynamic Ψ with X_i = diag(Π, 0) acting only on the static channel behaves
  // like the static test with P = 0 feasible.
  GlobalProblem dyn = fb;
  dyn.iqc = IqcSpec{{pole_basis(2.0, 1, 2), pole_basis(2.0, 1, 2)}, static_identity(2)};
  MatrixXd xi = MatrixXd::Zero(4, 4);
  xi.topLeftCorner(2, 2) = passivity_supply(1);
  const auto chk = check_global({xi, xi}, dyn);
  CHECK(chk.ok);
  CHECK(chk.P.rows() == 4);
  MatrixXd bad = xi;
  bad(1, 1) = 1.0;
  CHECK_FALSE(check_global({bad, bad}, dyn).ok);
}
