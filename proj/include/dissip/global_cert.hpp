#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dissip/conic.hpp"
#include "dissip/model.hpp"

namespace dissip {

struct GlobalProblem {
  MatrixXd M;
  Dims dims;
  MatrixXd W;
  std::optional<IqcSpec> iqc;
  std::vector<Pin> pins;

  static GlobalProblem from(const Problem& p);
  int supply_dim(int i) const;
  /// Order of the joint filter state (0 in static mode).
  int filter_states() const;
};

/// The stacked filter (Â, B̂, Ĉ, D̂) acting on [y; d]; the input maps already
/// include P_π[M; I]. In static mode Â is empty and D̂ = P_π[M; I].
struct StackedFilter {
  MatrixXd A, B, C, D;
};
StackedFilter stacked_filter(const GlobalProblem& gp);

/// [M;I]ᵀP_πᵀ diag(X₁,…,X_N,−W) P_π[M;I] over affine X's.
AffineMatrix assemble_static_lmi(const std::vector<AffineMatrix>& xs, const MatrixXd& W, const MatrixXd& M,
                                 const Dims& dims);
MatrixXd assemble_static_lmi(const std::vector<MatrixXd>& xs, const MatrixXd& W, const MatrixXd& M,
                             const Dims& dims);

/// [ÂᵀP+PÂ, PB̂; B̂ᵀP, 0] + [Ĉ D̂]ᵀ diag(X_i, −W) [Ĉ D̂] with P a symmetric variable
/// (empty in static mode).
AffineMatrix assemble_iqc_lmi(const std::vector<AffineMatrix>& xs, const AffineMatrix& P, const GlobalProblem& gp);

struct GlobalCheck {
  bool ok = false;
  double lambda_max = 0.0;  // of the assembled LMI (at the best P in IQC mode)
  double tol = 0.0;
  MatrixXd P;
  std::string message;
};

/// Membership of a supply tuple in G: λ_max ≤ tol, or λ_max ≤ −tol when
/// `strict`. tol < 0 uses 1e−7·(1+‖assembled‖).
GlobalCheck check_global(const std::vector<MatrixXd>& xs, const GlobalProblem& gp, double tol = -1.0,
                         const SolveOptions& opts = {}, bool strict = false);

struct GlobalCertificate {
  SolveStatus status = SolveStatus::IterationLimit;
  std::vector<MatrixXd> Z;
  MatrixXd P;
  double distance = 0.0;    // Σ ‖Z_i − target_i‖²
  double lambda_max = 0.0;  // assembled LMI at the returned point
  double wall_ms = 0.0;
  std::string message;

  bool ok() const { return status == SolveStatus::Optimal || status == SolveStatus::Inaccurate; }
};

GlobalCertificate global_update(const std::vector<MatrixXd>& targets, const GlobalProblem& gp,
                                const SolveOptions& opts = {});

/// Scalar decision variables of the IQC global update (P plus all X_i).
long iqc_decision_variables(const GlobalProblem& gp);

}  // namespace dissip
