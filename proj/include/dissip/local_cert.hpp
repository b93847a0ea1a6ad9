#pragma once

#include <string>
#include <vector>

#include "dissip/conic.hpp"
#include "dissip/model.hpp"
#include "dissip/sos.hpp"

namespace dissip {

struct LocalTarget {
  MatrixXd C;             // Z − Λ
  std::vector<Pin> pins;  // entries of X frozen (subsystem field ignored)
};

struct LocalOptions {
  int storage_degree = 4;
  int multiplier_degree = -1;  // EID multiplier r; −1 means deg f
  SolveOptions solve;
  SosOptions sos;
  double verify_tol = 1e-6;
  double storage_floor = 0.0;  // P ⪰ floor·I on quadratic storages
};

struct LocalCertificate {
  SolveStatus status = SolveStatus::IterationLimit;
  std::string kind;
  MatrixXd X;
  MatrixXd P;                  // quadratic storage (LTI / IQC); over (x, η) for IQC
  Polynomial V;                // polynomial storage (SOS paths)
  std::vector<MatrixXd> grams; // Gram matrices of every SOS constraint
  double distance = 0.0;       // ‖X − C‖_F²
  bool verified = false;
  double verify_residual = 0.0;
  double wall_ms = 0.0;
  std::string message;

  bool ok() const { return (status == SolveStatus::Optimal || status == SolveStatus::Inaccurate) && verified; }
};

LocalCertificate lti_local_update(const LtiSubsystem& sys, const LocalTarget& tgt, const LocalOptions& opts = {});
LocalCertificate sos_local_update(const PolySubsystem& sys, const LocalTarget& tgt, const LocalOptions& opts = {});
LocalCertificate rational_local_update(const RationalSubsystem& sys, const LocalTarget& tgt,
                                       const LocalOptions& opts = {});
LocalCertificate eid_local_update(const PolySubsystem& sys, const LocalTarget& tgt, const LocalOptions& opts = {});
LocalCertificate iqc_local_update(const LtiSubsystem& sys, const Realization& psi, const LocalTarget& tgt,
                                  const LocalOptions& opts = {});
LocalCertificate fixed_local_update(const FixedSupplySubsystem& sys, const LocalTarget& tgt);

/// Dispatches on the subsystem kind (and the problem's IQC section).
LocalCertificate local_update(const Problem& prob, int i, const LocalTarget& tgt, const LocalOptions& opts = {});

/// Dissipation LMI [AᵀP+PA, PB; BᵀP, 0] − SᵀXS with S:(x,u) → (u, Cx),
/// evaluated numerically. Used for re-verification and by the separable-storage oracle.
MatrixXd lti_dissipation_matrix(const LtiSubsystem& sys, const MatrixXd& P, const MatrixXd& X);

/// The series connection of an LTI subsystem with Ψ acting on (u, y):
/// state (x, η), input u, output z.
struct AugmentedIqc {
  MatrixXd A, B, C, D;
};
AugmentedIqc augment_iqc(const LtiSubsystem& sys, const Realization& psi);

}  // namespace dissip
