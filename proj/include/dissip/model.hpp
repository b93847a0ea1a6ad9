#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dissip/linalg.hpp"
#include "dissip/polynomial.hpp"

namespace dissip {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ẋ = Ax + Bu, y = Cx.
struct LtiSubsystem {
  MatrixXd A, B, C;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ny() const { return static_cast<int>(C.rows()); }
};

/// ẋ = f(x,u), y = h(x,u) with polynomial f, h. With `eid` set, the local
/// set is the equilibrium-independent one.
struct PolySubsystem {
  std::vector<Polynomial> f, h;
  int n_inputs = 0;
  bool eid = false;

  int nx() const { return static_cast<int>(f.size()); }
  int nu() const { return n_inputs; }
  int ny() const { return static_cast<int>(h.size()); }
};

/// ẋ_i = p_i(x,u) / q_i(x,u), y = h(x,u), with q_i − ε SOS.
struct RationalSubsystem {
  std::vector<Polynomial> p, q, h;
  int n_inputs = 0;
  double eps = 1e-6;

  int nx() const { return static_cast<int>(p.size()); }
  int nu() const { return n_inputs; }
  int ny() const { return static_cast<int>(h.size()); }
};

/// A block whose supply rate is given, not searched.
struct FixedSupplySubsystem {
  MatrixXd X;
  int n_inputs = 0;
  std::string note;

  int nu() const { return n_inputs; }
  int ny() const { return static_cast<int>(X.rows()) - n_inputs; }
};

using Subsystem = std::variant<LtiSubsystem, PolySubsystem, RationalSubsystem, FixedSupplySubsystem>;

int input_dim(const Subsystem& s);
int output_dim(const Subsystem& s);
const char* type_name(const Subsystem& s);

struct Dims {
  std::vector<int> m, p;  // per-subsystem input/output sizes
  int pd = 0, me = 0;     // disturbance / performance sizes

  int n() const { return static_cast<int>(m.size()); }
  int total_m() const;  // Σm_i + m_e (rows of M)
  int total_p() const;  // Σp_i + p_d (cols of M)
};

/// Permutation with [u1;y1;…;uN;yN;d;e] = P [u;e;y;d].
MatrixXd build_permutation(const Dims& dims);

struct Assumption1Report {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

Assumption1Report validate_assumption1(const MatrixXd& M, const Dims& dims);

enum class GainConvention { A, B };

const char* to_string(GainConvention c);

/// A: diag(I, −γ⁻²I), B: diag(γ²I, −I), over [d; e].
MatrixXd l2_gain_supply(double gamma, int n_in, int n_out, GainConvention convention = GainConvention::A);
/// [[0, I], [I, 0]].
MatrixXd passivity_supply(int n);
/// Incidence D (N×L): +1 for the leading node of each edge, −1 for the trailing one.
MatrixXd platoon_incidence(const std::vector<std::pair<int, int>>& edges, int n);

/// State-space realization (Â, B̂, Ĉ, D̂) of a stable filter.
struct Realization {
  MatrixXd A, B, C, D;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(D.cols()); }
  int outputs() const { return static_cast<int>(D.rows()); }
};

Realization static_identity(int channels);
/// [ψ0; …; ψK] ⊗ I_c with ψk(s) = (1/(s+pole))^k.
Realization pole_basis(double pole, int order, int channels);
bool is_hurwitz(const Realization& r, double margin = 1e-9);

struct IqcSpec {
  std::vector<Realization> psi;  // acts on [u_i; y_i]
  Realization psi_w;             // acts on [d; e]
};

struct Pin {
  int subsystem = 0;
  int row = 0, col = 0;
  double value = 0.0;
};

struct Objective {
  enum class Kind { supply, l2_gain } kind = Kind::supply;
  MatrixXd W;
  double gamma = 1.0;
  GainConvention convention = GainConvention::A;
};

struct Problem {
  std::vector<Subsystem> subsystems;
  MatrixXd M;
  int pd = 0, me = 0;
  Objective objective;
  std::vector<Pin> pins;
  std::optional<IqcSpec> iqc;
  double storage_floor = 0.0;  // lower bound on quadratic storages, P_i ⪰ floor·I
  std::string note;

  Dims dims() const;
  /// Global supply matrix over [d; e] (or over Ψ_w's output in IQC mode).
  MatrixXd W() const;
  /// Supply-rate size of subsystem i (m_i + p_i, or Ψ_i's output size).
  int supply_dim(int i) const;
  Problem with_gamma(double gamma) const;
};

/// Every subsystem LTI and the interconnection static.
bool is_all_lti(const Problem& p);

/// Structural checks; throws ModelError. Returns warnings (Assumption 1).
std::vector<std::string> validate(const Problem& p);

/// [y;d]ᵀ-form of Σ [u_i;y_i]ᵀX_i[u_i;y_i] − [d;e]ᵀW[d;e] evaluated through M.
MatrixXd assembled_form(const std::vector<MatrixXd>& xs, const MatrixXd& W, const MatrixXd& M, const Dims& dims);

}  // namespace dissip
