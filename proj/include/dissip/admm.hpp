#pragma once

#include <string>
#include <vector>

#include "dissip/global_cert.hpp"
#include "dissip/local_cert.hpp"

namespace dissip {

enum class Outcome { Certified, IterationLimit, Stalled, ConfigError, SolverError };

const char* to_string(Outcome o);

struct AdmmOptions {
  int max_iters = 500;
  int stall_window = 50;
  double stall_decrease = 1e-10;
  double stall_relative = 1e-3;  // also stalled if the decrease is below this fraction of the residual
  int threads = 0;  // 0: hardware concurrency
  LocalOptions local;
  SolveOptions global;
  std::vector<MatrixXd> z0, lambda0;  // empty: zero start
  bool keep_history = false;          // store X, Z per iteration
};

struct IterationRecord {
  int k = 0;
  double primal_residual = 0.0;    // ‖X − Z‖_F over the tuple
  double global_lambda_max = 0.0;  // assembled LMI at Xᵏ
  std::vector<std::string> local_statuses;
  double wall_ms = 0.0;
};

struct CertResult {
  Outcome outcome = Outcome::IterationLimit;
  int iterations = 0;
  std::vector<MatrixXd> X, Z, Lambda;
  std::vector<LocalCertificate> local;
  GlobalCheck global;
  std::vector<IterationRecord> trace;
  std::vector<std::vector<MatrixXd>> x_history, z_history;
  std::vector<std::string> warnings;
  std::string message;
  double wall_ms = 0.0;

  bool certified() const { return outcome == Outcome::Certified; }
};

CertResult run(const Problem& problem, const AdmmOptions& opts = {});

struct BisectResult {
  bool ok = false;
  double gamma = 0.0;
  std::vector<std::pair<double, Outcome>> probes;
  CertResult at_gamma;
  std::string message;
};

/// Smallest γ on the bisection grid with a Certified run; γ_hi is probed first.
BisectResult bisect_gain(const Problem& problem, double gamma_lo, double gamma_hi, double tol_gamma = 0.01,
                         const AdmmOptions& opts = {});

/// (k, primal_residual, global_lmi_lambda_max, local_statuses, wall_ms) rows with a header.
std::string residual_report(const CertResult& r);

/// Closed-loop dissipation matrix of an all-LTI problem for storage
/// blkdiag(P_i), over (x, d): He(Pᵀ(Ax+Bu)) − [d;e]ᵀW[d;e] with u, e from M.
MatrixXd monolithic_lti_lmi(const Problem& problem, const std::vector<MatrixXd>& P);

struct DirectResult {
  SolveStatus status = SolveStatus::IterationLimit;
  bool feasible = false;
  std::vector<MatrixXd> P;  // LTI path
  Polynomial V;             // SOS path
  double lambda_max = 0.0;  // monolithic LMI at the returned P (LTI path)
  double wall_ms = 0.0;
  std::string message;
};

/// One SDP over separable quadratic storages of an all-LTI static problem.
DirectResult direct_separable_certify(const Problem& problem, const SolveOptions& opts = {});

/// One SOS program over separable polynomial storages (poly subsystems with
/// h independent of u, and LTI subsystems), static interconnection.
DirectResult direct_sos_certify(const Problem& problem, const LocalOptions& opts = {});

}  // namespace dissip
