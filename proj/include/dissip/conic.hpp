#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dissip/linalg.hpp"

namespace dissip {

/// Sparse affine form Σ coeff·y[var] + constant over the scalar decision
/// variables of a ConicProblem.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;  // sorted by variable, no zeros
  double constant = 0.0;

  AffineExpr() = default;
  AffineExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static AffineExpr variable(int var, double coeff = 1.0);

  bool is_constant() const { return terms.empty(); }
  double coefficient(int var) const;
  double eval(const VectorXd& y) const;

  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double s);
  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
  AffineExpr operator-() const { return -1.0 * *this; }
  bool operator==(const AffineExpr&) const = default;
};

/// Handle to a symmetric matrix variable; its upper triangle occupies
/// dim·(dim+1)/2 consecutive scalar variables.
struct SymVar {
  int offset = -1;
  int dim = 0;

  int index(int r, int c) const;
  int size() const { return dim * (dim + 1) / 2; }
};

/// Matrix whose entries are affine in the decision variables:
/// constant + Σ_var y[var]·coefficient(var). Shapes need not be square.
class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(Eigen::Index rows, Eigen::Index cols);
  static AffineMatrix constant(const MatrixXd& c);
  static AffineMatrix variable(const SymVar& v);
  static AffineMatrix scalar(const AffineExpr& e);

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }
  const MatrixXd& constant_part() const { return constant_; }
  const std::map<int, MatrixXd>& coefficients() const { return coeffs_; }

  AffineExpr entry(Eigen::Index r, Eigen::Index c) const;
  void add_entry(Eigen::Index r, Eigen::Index c, const AffineExpr& e);
  /// Adds `m` into the block starting at (r0, c0).
  void add_block(Eigen::Index r0, Eigen::Index c0, const AffineMatrix& m);
  AffineMatrix block(Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) const;

  AffineMatrix transpose() const;
  MatrixXd eval(const VectorXd& y) const;

  AffineMatrix& operator+=(const AffineMatrix& other);
  AffineMatrix& operator-=(const AffineMatrix& other);
  AffineMatrix& operator*=(double s);
  friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
  friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
  friend AffineMatrix operator*(double s, AffineMatrix a) { return a *= s; }
  friend AffineMatrix operator*(const MatrixXd& l, const AffineMatrix& m);
  friend AffineMatrix operator*(const AffineMatrix& m, const MatrixXd& r);

 private:
  void check_same_shape(const AffineMatrix& other) const;
  MatrixXd constant_;
  std::map<int, MatrixXd> coeffs_;
};

/// Lᵀ·M·L for an affine symmetric M.
AffineMatrix congruence(const MatrixXd& l, const AffineMatrix& m);

enum class LmiSense { psd, nsd };

struct LmiConstraint {
  AffineMatrix expr;
  LmiSense sense = LmiSense::psd;
  bool strict = false;  // shifted by the solver's strictification margin
  std::string label;
};

struct EqualityConstraint {
  AffineExpr expr;  // expr == 0
  std::string label;
};

/// Minimize  Σ weight·(expr)² + linear  subject to equalities and LMIs.
/// With no objective terms the problem is a pure feasibility problem.
class ConicProblem {
 public:
  int add_scalar(std::string name = {});
  SymVar add_symmetric(int dim, std::string name = {});
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::string& variable_name(int v) const { return names_.at(v); }

  void add_equality(const AffineExpr& e, std::string label = {});
  void add_lmi(const AffineMatrix& m, LmiSense sense, bool strict = false, std::string label = {});
  void add_psd(const SymVar& v, bool strict = false, std::string label = {});

  void add_linear_objective(const AffineExpr& e);
  void add_squared_objective(const AffineExpr& e, double weight = 1.0);
  /// Adds ‖m − target‖_F² to the objective.
  void add_distance_objective(const AffineMatrix& m, const MatrixXd& target, double weight = 1.0);

  const std::vector<EqualityConstraint>& equalities() const { return equalities_; }
  const std::vector<LmiConstraint>& lmis() const { return lmis_; }
  const AffineExpr& linear_objective() const { return linear_; }
  const std::vector<std::pair<AffineExpr, double>>& squared_objective() const { return squares_; }
  bool has_objective() const { return !squares_.empty() || !linear_.is_constant(); }

  double objective_value(const VectorXd& y) const;

  /// Sparse SDPA-style text dump (dual form, equalities as paired LP rows).
  void dump_sdpa(std::ostream& os) const;

 private:
  void check_expr(const AffineExpr& e) const;
  void check_matrix(const AffineMatrix& m) const;

  std::vector<std::string> names_;
  std::vector<EqualityConstraint> equalities_;
  std::vector<LmiConstraint> lmis_;
  AffineExpr linear_;
  std::vector<std::pair<AffineExpr, double>> squares_;
};

enum class SolveStatus { Optimal, Infeasible, Inaccurate, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double tol_eq = 1e-8;        // absolute equality residual
  double tol_psd = 1e-7;       // λ_min ≥ −tol_psd·(1+‖F‖)
  double tol_gap = 1e-8;       // interior-point stopping tolerance
  double tol_inaccurate = 1e-5;
  double strict_margin = 1e-6;
  int max_iterations = 100;
  bool verbose = false;
};

struct SolveReport {
  SolveStatus status = SolveStatus::IterationLimit;
  VectorXd values;  // present iff Optimal or Inaccurate
  double objective = 0.0;
  double primal_residual = 0.0;  // worst equality / LMI violation in the original problem
  double dual_residual = 0.0;
  double gap = 0.0;
  double wall_ms = 0.0;
  int iterations = 0;
  std::string message;

  bool has_values() const { return values.size() > 0; }
  double value(int var) const { return values(var); }
  MatrixXd value(const SymVar& v) const;
  double value(const AffineExpr& e) const { return e.eval(values); }
  MatrixXd value(const AffineMatrix& m) const { return m.eval(values); }
};

SolveReport solve(const ConicProblem& problem, const SolveOptions& opts = {});

}  // namespace dissip
