#include "dissip/examples.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "dissip/conic.hpp"

namespace dissip {

double PortableRng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double PortableRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

LtiSubsystem lti(MatrixXd A, MatrixXd B, MatrixXd C) { return {std::move(A), std::move(B), std::move(C)}; }

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

// Magnitude log-uniform on [lo, hi], random sign.
double random_scaling(PortableRng& rng, double lo, double hi) {
  const double mag = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  return rng.uniform() < 0.5 ? -mag : mag;
}

struct SmallGainNet {
  std::vector<double> a, b, c, psi, phi;
  MatrixXd M;
};

// Steps shared by the rational and polynomial families: parameters, S,
// the diagonal-scaling normalization and the disguising scalings.
SmallGainNet small_gain_net(int n, std::uint64_t seed, const RationalParams& prm) {
  PortableRng rng(seed);
  SmallGainNet net;
  double gamma = 0.0;
  for (int i = 0; i < n; ++i) {
    net.a.push_back(rng.uniform(prm.a_lo, prm.a_hi));
    net.b.push_back(rng.uniform(prm.b_lo, prm.b_hi));
    net.c.push_back(prm.polynomial ? 0.0 : rng.uniform(prm.c_lo, prm.c_hi));
    gamma = std::max(gamma, 1.0 / net.a.back());
  }
  MatrixXd S(n + 1, n + 1);
  for (int r = 0; r <= n; ++r) {
    for (int c = 0; c <= n; ++c) S(r, c) = rng.normal();
  }
  // No direct y_i → u_i feedback, so the interconnection meets Assumption 1.
  for (int i = 0; i < n; ++i) S(i, i) = 0.0;
  const double beta = diag_scaled_norm(S, n);
  if (beta > 0) S *= 0.99 / (gamma * beta);
  VectorXd in_scale = VectorXd::Ones(n + 1), out_scale = VectorXd::Ones(n + 1);
  for (int i = 0; i < n; ++i) {
    net.psi.push_back(prm.scaled ? random_scaling(rng, prm.scale_lo, prm.scale_hi) : 1.0);
    net.phi.push_back(prm.scaled ? random_scaling(rng, prm.scale_lo, prm.scale_hi) : 1.0);
    in_scale(i) = 1.0 / net.psi.back();
    out_scale(i) = 1.0 / net.phi.back();
  }
  net.M = in_scale.asDiagonal() * S * out_scale.asDiagonal();
  return net;
}

void gain_objective(Problem& p, double gamma) {
  p.pd = 1;
  p.me = 1;
  p.objective.kind = Objective::Kind::l2_gain;
  p.objective.gamma = gamma;
  p.objective.convention = GainConvention::A;
  p.objective.W = l2_gain_supply(gamma, 1, 1);
}

}  // namespace

Problem gen_skew(int n, std::uint64_t seed, const SkewParams& prm) {
  if (n < 2) throw std::invalid_argument("gen_skew needs n >= 2");
  PortableRng rng(seed);
  Problem p;
  for (int i = 0; i < n; ++i) {
    const double eps = rng.uniform(0.0, prm.eps_max);
    MatrixXd A(2, 2), B(2, 1), C(1, 2);
    A << -eps, 1, -1, -eps;
    B << 0, 1;
    C << 0, 1;
    p.subsystems.push_back(lti(A, B, C));
  }
  const int n1 = n / 2, n2 = n - n1;
  MatrixXd M0(n1, n2);
  for (int r = 0; r < n1; ++r) {
    for (int c = 0; c < n2; ++c) M0(r, c) = rng.normal();
  }
  p.M = MatrixXd::Zero(2 * n, n);
  p.M.block(0, n1, n1, n2) = M0;
  p.M.block(n1, 0, n2, n1) = -M0.transpose();
  p.M.bottomRows(n).setIdentity();
  p.pd = 0;
  p.me = n;
  p.objective.kind = Objective::Kind::supply;
  p.objective.W = MatrixXd::Zero(n, n);
  p.storage_floor = prm.storage_floor;
  p.note = "skew family, seed " + std::to_string(seed) +
           "; stability: e = y, W = 0 with strict global LMI, storages P_i >= " +
           std::to_string(prm.storage_floor) + " I";
  return p;
}

Problem gen_rational(int n, std::uint64_t seed, const RationalParams& prm) {
  const SmallGainNet net = small_gain_net(n, seed, prm);
  Problem p;
  for (int i = 0; i < n; ++i) {
    const Polynomial x1(X(0)), x2(X(1)), u(U(0));
    const Polynomial num = -net.a[i] * x2 - net.b[i] * x1.pow(3) + net.psi[i] * u;
    if (prm.polynomial) {
      PolySubsystem s;
      s.f = {x2, num};
      s.h = {net.phi[i] * x2};
      s.n_inputs = 1;
      p.subsystems.push_back(s);
    } else {
      RationalSubsystem s;
      s.p = {x2, num};
      s.q = {Polynomial(1.0), 1.0 + net.c[i] * x2.pow(2)};
      s.h = {net.phi[i] * x2};
      s.n_inputs = 1;
      p.subsystems.push_back(s);
    }
  }
  p.M = net.M;
  gain_objective(p, 1.0);
  p.note = std::string(prm.polynomial ? "polynomial" : "rational") + " family, seed " + std::to_string(seed);
  return p;
}

Problem gen_poly(int n, std::uint64_t seed, const RationalParams& prm) {
  RationalParams q = prm;
  q.polynomial = true;
  const SmallGainNet net = small_gain_net(n, seed, q);
  Problem p;
  for (int i = 0; i < n; ++i) {
    const Polynomial x(X(0)), u(U(0));
    PolySubsystem s;
    s.f = {-net.a[i] * x - net.b[i] * x.pow(3) + net.psi[i] * u};
    s.h = {net.phi[i] * x};
    s.n_inputs = 1;
    p.subsystems.push_back(s);
  }
  p.M = net.M;
  gain_objective(p, 1.0);
  p.note = "scalar cubic family, seed " + std::to_string(seed);
  return p;
}

Problem gen_platoon(int n, bool pinned, double gamma) {
  if (n < 2) throw std::invalid_argument("gen_platoon needs n >= 2");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  const MatrixXd D = platoon_incidence(edges, n);
  const int L = n - 1;
  Problem p;
  for (int i = 0; i < n; ++i) p.subsystems.push_back(lti(scalar(-1.0), scalar(1.0), scalar(1.0)));
  for (int l = 0; l < L; ++l) p.subsystems.push_back(FixedSupplySubsystem{passivity_supply(1), 1, "link"});
  // Rows [u; η; e], columns [v; z; d].
  p.M = MatrixXd::Zero(n + L + 1, n + L + 1);
  p.M.block(0, n, n, L) = -D;
  p.M(n - 1, n + L) = 1.0;
  p.M.block(n, 0, L, n) = D.transpose();
  p.M(n + L, 0) = 1.0;
  gain_objective(p, gamma);
  if (pinned) {
    for (int i = 0; i < n; ++i) {
      p.pins.push_back({i, 0, 0, 0.0});
      p.pins.push_back({i, 0, 1, 1.0});
    }
  }
  p.note = "platoon chain; nominal velocities only shift the equilibrium and are omitted";
  return p;
}

Problem gen_iqc_pair(bool iqc, int order, double gamma) {
  Problem p;
  p.subsystems.push_back(lti(scalar(-1.0), scalar(1.0), scalar(1.0)));
  p.subsystems.push_back(lti(scalar(-0.2), scalar(1.0), scalar(0.4)));
  p.M = MatrixXd(3, 3);
  p.M << 0, -1, 1, 1, 0, 0, 1, 0, 0;
  gain_objective(p, gamma);
  if (iqc) {
    IqcSpec s;
    s.psi = {pole_basis(2.0, order, 2), pole_basis(2.0, order, 2)};
    s.psi_w = static_identity(2);
    p.iqc = s;
  }
  p.note = iqc ? "iqc pair, pole 2, order " + std::to_string(order) : "iqc pair, static dissipativity";
  return p;
}

double diag_scaled_norm(const MatrixXd& M, int n_free) {
  if (M.rows() != M.cols()) throw std::invalid_argument("diag_scaled_norm needs a square matrix");
  if (n_free < 0 || n_free > M.rows()) throw std::invalid_argument("diag_scaled_norm: bad block count");
  const int n = static_cast<int>(M.rows());
  const double smax = n ? Eigen::JacobiSVD<MatrixXd>(M).singularValues()(0) : 0.0;
  if (smax == 0.0) return 0.0;
  auto scaled_norm = [&](const VectorXd& d2) {
    const VectorXd b = d2.cwiseSqrt();
    const MatrixXd s = b.asDiagonal() * M * b.cwiseInverse().asDiagonal();
    return Eigen::JacobiSVD<MatrixXd>(s).singularValues()(0);
  };
  // Feasibility of t²D − MᵀDM ≻ 0 with D = diag(δ, I).
  auto feasible = [&](double t, VectorXd& d2) {
    ConicProblem prob;
    std::vector<int> vars;
    AffineMatrix Dm(n, n);
    for (int i = 0; i < n; ++i) {
      if (i < n_free) {
        vars.push_back(prob.add_scalar());
        Dm.add_entry(i, i, AffineExpr::variable(vars.back()));
        // With no fixed block the scale of D is free; δ ≥ 1 removes it.
        const double floor = n_free == n ? 1.0 : 1e-8;
        prob.add_lmi(AffineMatrix::scalar(AffineExpr::variable(vars.back()) - floor), LmiSense::psd);
      } else {
        Dm.add_entry(i, i, 1.0);
      }
    }
    prob.add_lmi(t * t * Dm - congruence(M, Dm), LmiSense::psd, true);
    SolveOptions o;
    o.strict_margin = 1e-9;
    const SolveReport r = solve(prob, o);
    if (!r.has_values()) return false;
    d2 = VectorXd::Ones(n);
    for (int i = 0; i < n_free; ++i) d2(i) = r.values(vars[i]);
    return d2.minCoeff() > 0;
  };
  double lo = 0.0, hi = smax;
  VectorXd d2;
  while (hi - lo > 1e-5 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid, d2)) {
      hi = std::min(mid, scaled_norm(d2));
    } else {
      lo = mid;
    }
  }
  return hi;
}

double peak_gain(const Problem& problem, int points, double w_lo, double w_hi) {
  std::vector<MatrixXd> a, b, c;
  for (const auto& s : problem.subsystems) {
    const auto& l = std::get<LtiSubsystem>(s);
    a.push_back(l.A);
    b.push_back(l.B);
    c.push_back(l.C);
  }
  const MatrixXd A = blkdiag(a), B = blkdiag(b), C = blkdiag(c);
  const int mu = static_cast<int>(B.cols()), py = static_cast<int>(C.rows());
  const int pd = problem.pd, me = problem.me;
  const MatrixXd Muy = problem.M.topLeftCorner(mu, py), Mud = problem.M.topRightCorner(mu, pd);
  const MatrixXd Mey = problem.M.bottomLeftCorner(me, py), Med = problem.M.bottomRightCorner(me, pd);
  const MatrixXd Acl = A + B * Muy * C, Bcl = B * Mud, Ccl = Mey * C, Dcl = Med;
  using CMat = Eigen::MatrixXcd;
  const int n = static_cast<int>(A.rows());
  auto gain_at = [&](double w) {
    CMat Z = std::complex<double>(0, w) * CMat::Identity(n, n) - Acl.cast<std::complex<double>>();
    const CMat G = Ccl.cast<std::complex<double>>() * Z.partialPivLu().solve(Bcl.cast<std::complex<double>>()) +
                   Dcl.cast<std::complex<double>>();
    return Eigen::JacobiSVD<CMat>(G).singularValues()(0);
  };
  double best = gain_at(0.0), best_w = 0.0;
  const double step = std::log(w_hi / w_lo) / (points - 1);
  for (int k = 0; k < points; ++k) {
    const double w = w_lo * std::exp(step * k);
    const double g = gain_at(w);
    if (g > best) {
      best = g;
      best_w = w;
    }
  }
  // Golden-section refinement around the best grid point.
  if (best_w > 0) {
    double l = best_w * std::exp(-step), r = best_w * std::exp(step);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double m1 = r - phi * (r - l), m2 = l + phi * (r - l);
      if (gain_at(m1) > gain_at(m2)) {
        r = m2;
      } else {
        l = m1;
      }
    }
    best = std::max(best, gain_at(0.5 * (l + r)));
  }
  return best;
}

}  // namespace dissip
