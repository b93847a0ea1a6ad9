// Acceptance run: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "dissip/admm.hpp"
#include "dissip/examples.hpp"

using namespace dissip;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d %s: %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Certified all-LTI runs for the soundness check.
struct Sound {
  std::string label;
  double lambda_max;
};
std::vector<Sound> sound;

void record_soundness(const std::string& label, const Problem& p, const CertResult& r) {
  if (!r.certified() || !is_all_lti(p)) return;
  std::vector<MatrixXd> P;
  for (const auto& c : r.local) P.push_back(c.P);
  sound.push_back({label, lambda_max(monolithic_lti_lmi(p, P))});
}

void skew() {
  const auto t0 = Clock::now();
  AdmmOptions o;
  o.max_iters = 100;
  int ok = 0, worst = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const Problem p = gen_skew(20, seed);
    const CertResult r = run(p, o);
    if (r.certified()) {
      ++ok;
      worst = std::max(worst, r.iterations);
    }
    record_soundness("skew seed " + std::to_string(seed), p, r);
  }
  const double s = seconds_since(t0);
  report(1, ok >= 19 && s < 300.0,
         fmt("%d/20 skew instances (N=20) certified within 100 iterations, max %d iterations, %.1f s", ok, worst, s));
}

void rational() {
  const auto t0 = Clock::now();
  AdmmOptions o;
  o.local.storage_degree = 4;
  int ok = 0, worst = 0;
  bool gain_one = true;
  for (int seed = 1; seed <= 10; ++seed) {
    const Problem p = gen_rational(10, seed);
    gain_one = gain_one && p.objective.kind == Objective::Kind::l2_gain && p.objective.gamma == 1.0;
    const CertResult r = run(p, o);
    if (r.certified()) {
      ++ok;
      worst = std::max(worst, r.iterations);
    }
  }
  const double s = seconds_since(t0);
  report(2, ok == 10 && gain_one && s < 900.0,
         fmt("%d/10 rational instances (N=10, degree-4 storage) certified gain <= 1, max %d iterations, %.1f s", ok,
             worst, s));
}

void platoon() {
  const auto t0 = Clock::now();
  const BisectResult b = bisect_gain(gen_platoon(20, true), 0.5, 1.0, 0.01);
  const CertResult un = run(gen_platoon(20, false));
  const double s = seconds_since(t0);
  const bool in_range = b.ok && b.gamma >= 0.69 && b.gamma <= 0.73;
  report(3, in_range && un.outcome == Outcome::Stalled && s < 600.0,
         fmt("pinned gamma_min = %.4f (%zu probes), unpinned outcome %s after %d iterations, %.1f s", b.gamma,
             b.probes.size(), to_string(un.outcome), un.iterations, s));
}

void iqc() {
  const auto t0 = Clock::now();
  const Problem stat = gen_iqc_pair(false, 3, 1.0);
  const double peak = peak_gain(stat);
  const bool a = std::abs(peak - 0.862) <= 0.005;

  const CertResult rs = run(stat);
  const DirectResult ds = direct_separable_certify(stat);
  const bool b = (rs.outcome == Outcome::Stalled || rs.outcome == Outcome::IterationLimit) && !ds.feasible;

  const CertResult ri = run(gen_iqc_pair(true, 3, 0.87));
  const BisectResult bi = bisect_gain(gen_iqc_pair(true, 3, 1.0), 0.8, 1.0, 0.01);
  const bool c = ri.certified() && bi.ok && bi.gamma <= 0.87;
  const double s = seconds_since(t0);
  report(4, a && b && c && s < 300.0,
         fmt("(a) peak gain %.4f; (b) static gamma=1 ADMM %s, direct %s feasible=%d; (c) IQC K=3 gamma=0.87 %s in %d "
             "iterations, bisection %.4f; %.1f s",
             peak, to_string(rs.outcome), to_string(ds.status), ds.feasible ? 1 : 0, to_string(ri.outcome),
             ri.iterations, bi.gamma, s));
}

Problem random_lti(std::uint64_t seed) {
  PortableRng rng(1000 + seed);
  Problem p;
  const int n = rng.uniform() < 0.5 ? 2 : 3;
  for (int i = 0; i < n; ++i) {
    const int nx = 1 + static_cast<int>(rng.uniform() * 3);
    LtiSubsystem s;
    s.A = MatrixXd(nx, nx);
    s.B = MatrixXd(nx, 1);
    s.C = MatrixXd(1, nx);
    for (int r = 0; r < nx; ++r) {
      for (int c = 0; c < nx; ++c) s.A(r, c) = rng.normal();
      s.B(r, 0) = rng.normal();
      s.C(0, r) = rng.normal();
    }
    const double shift = Eigen::EigenSolver<MatrixXd>(s.A).eigenvalues().real().maxCoeff() + rng.uniform(0.2, 1.0);
    s.A -= shift * MatrixXd::Identity(nx, nx);
    p.subsystems.push_back(s);
  }
  p.pd = p.me = 1;
  p.M = MatrixXd(n + 1, n + 1);
  for (int r = 0; r <= n; ++r) {
    for (int c = 0; c <= n; ++c) p.M(r, c) = 0.6 * rng.normal();
  }
  for (int i = 0; i < n; ++i) p.M(i, i) = 0.0;
  p.objective.kind = Objective::Kind::l2_gain;
  p.objective.gamma = std::pow(10.0, rng.uniform(-0.5, 1.0));
  return p;
}

void separable_equivalence() {
  const auto t0 = Clock::now();
  int agree = 0, feasible = 0;
  std::string notes;
  for (int k = 0; k < 50; ++k) {
    const Problem p = random_lti(k);
    const CertResult r = run(p);
    const DirectResult d = direct_separable_certify(p);
    record_soundness("random LTI " + std::to_string(k), p, r);
    feasible += d.feasible;
    if (r.certified() == d.feasible) {
      ++agree;
      continue;
    }
    AdmmOptions longer;
    longer.max_iters = 3000;
    longer.stall_window = 500;
    const CertResult r2 = run(p, longer);
    notes += fmt(" [#%d admm %s/%d, direct %d; with 3000 iterations %s/%d]", k, to_string(r.outcome), r.iterations,
                 d.feasible ? 1 : 0, to_string(r2.outcome), r2.iterations);
  }
  const double s = seconds_since(t0);
  report(5, agree >= 48, fmt("ADMM and direct separable search agree on %d/50 (%d direct-feasible), %.1f s%s", agree,
                             feasible, s, notes.c_str()));
}

void soundness() {
  double worst = -1e300;
  std::string where;
  for (const auto& e : sound) {
    if (e.lambda_max > worst) {
      worst = e.lambda_max;
      where = e.label;
    }
  }
  report(6, !sound.empty() && worst <= 1e-5,
         fmt("%zu certified all-LTI runs, worst monolithic lambda_max %.3g (%s)", sound.size(), worst, where.c_str()));
}

void trend() {
  AdmmOptions o;
  o.local.storage_degree = 2;
  LocalOptions lo;
  lo.storage_degree = 2;
  std::vector<double> ta, td;
  std::string rows;
  for (int n : {4, 8, 12}) {
    const Problem p = gen_poly(n, 1);
    const CertResult r = run(p, o);
    const DirectResult d = direct_sos_certify(p, lo);
    ta.push_back(r.wall_ms);
    td.push_back(d.wall_ms);
    rows += fmt("N=%d admm %s %.0f ms, direct feasible=%d %.0f ms; ", n, to_string(r.outcome), r.wall_ms,
                d.feasible ? 1 : 0, d.wall_ms);
  }
  const double ga = ta[2] / ta[0], gd = td[2] / td[0];
  report(7, gd > ga && ta[2] < td[2], fmt("%sgrowth N=4..12 admm x%.1f, direct x%.1f", rows.c_str(), ga, gd));
}

void unit_suites() {
  const auto t0 = Clock::now();
  const int rc = std::system(UNIT_TESTS_PATH " > /dev/null 2>&1");
  const double s = seconds_since(t0);
  report(8, rc == 0 && s < 120.0, fmt("unit_tests exit %d in %.1f s", rc, s));
}

}  // namespace

int main() {
  skew();
  rational();
  platoon();
  iqc();
  separable_equivalence();
  soundness();
  trend();
  unit_suites();
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
