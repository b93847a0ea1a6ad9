#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "dissip/model.hpp"

namespace dissip {

/// mt19937_64 with hand-written uniform and normal draws, so streams agree
/// across standard libraries.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : eng_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();   // Box–Muller, one draw per call

 private:
  std::mt19937_64 eng_;
};

struct SkewParams {
  double eps_max = 0.1;
  double storage_floor = 1.0;  // W = 0 on e = y; storages P_i ⪰ floor·I
};

struct RationalParams {
  double a_lo = 1.0, a_hi = 2.0, b_lo = 0.0, b_hi = 1.0, c_lo = 0.5, c_hi = 2.0;
  double scale_lo = 0.5, scale_hi = 2.0;
  bool scaled = true;
  bool polynomial = false;  // c = 0
};

Problem gen_skew(int n, std::uint64_t seed, const SkewParams& prm = {});
Problem gen_rational(int n, std::uint64_t seed, const RationalParams& prm = {});
/// Scalar cubic subsystems ẋ = −a x − b x³ + Ψu, y = Φx with the same
/// small-gain construction as gen_rational.
Problem gen_poly(int n, std::uint64_t seed, const RationalParams& prm = {});
Problem gen_platoon(int n, bool pinned = true, double gamma = 1.0);
Problem gen_iqc_pair(bool iqc, int order = 3, double gamma = 1.0);

/// inf σ̄(BMB⁻¹) over B = diag(b₁,…,b_k, I) with b_i > 0 scaling the first
/// k coordinates (square M); relative accuracy 1e−4.
double diag_scaled_norm(const MatrixXd& M, int n_free);

/// Peak of σ̄ of the closed loop d → e over a log-spaced frequency grid
/// (all-LTI static problems).
double peak_gain(const Problem& problem, int points = 4000, double w_lo = 1e-4, double w_hi = 1e4);

}  // namespace dissip
