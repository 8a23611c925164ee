#pragma once

// Detectability and observability of output pairs (C, A).

#include <cstdint>
#include <optional>
#include <string>

#include "lyacert/matrix_kernel.hpp"

namespace lyacert {

/// Generator A (n x n) observed through C (m x n), m >= 1.
class ObservedPair {
 public:
  ObservedPair(Matrix a, Matrix c);

  const Matrix& a() const { return a_; }
  const Matrix& c() const { return c_; }
  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return c_.rows(); }
  /// C^T C.
  Matrix q() const;

 private:
  Matrix a_;
  Matrix c_;
};

/// Eigenvalues with real part >= -kUnstableBoundary count as not decaying.
inline constexpr double kUnstableBoundary = 1e-9;

/// Rank of [A - lambda I; C] is n for every eigenvalue with Re lambda >= -1e-9.
bool hautus_detectable(const ObservedPair& pair, double tol = 1e-9);

/// [C; CA; ...; CA^{n-1}].
Matrix observability_matrix(const ObservedPair& pair);

/// Orthonormal basis of the largest A-invariant subspace inside ker C.
Matrix unobservable_subspace(const ObservedPair& pair, double rank_tol = 1e-9);

struct L2Decision {
  bool detectable = true;
  Matrix unobservable;
  /// Spectral abscissa of A restricted to the unobservable subspace; absent
  /// when that subspace is trivial.
  std::optional<double> abscissa_on_unobservable;
  /// x with C T(t) x = 0 and ||T(t) x|| not square integrable.
  std::optional<Vector> witness;
};

/// int ||C T x||^2 < inf  =>  int ||T x||^2 < inf for all x holds iff A is
/// exponentially stable on the unobservable subspace.
L2Decision l2_decide(const ObservedPair& pair, double tol = 1e-9);
bool l2_detectable(const ObservedPair& pair, double tol = 1e-9);

/// F = Sigma C^T with Sigma the stabilizing solution of
/// A Sigma + Sigma A^T - Sigma C^T C Sigma + I = 0; A - F C is stable.
Matrix stabilizing_output_injection(const ObservedPair& pair);

struct ExponentialDetectability {
  bool detectable = false;
  std::optional<Matrix> injection;
  std::string reason;
};

/// Wraps stabilizing_output_injection; throws InternalInconsistencyError if a
/// stabilizing injection exists while the L2 decision says otherwise.
ExponentialDetectability is_exponentially_detectable(const ObservedPair& pair);

/// W(t0) = int_0^t0 e^{tA^T} C^T C e^{tA} dt.
Matrix observability_gramian(const ObservedPair& pair, double t0);

/// Largest eps with x^T W(t0) x >= eps ||T(t0) x||^2 for all x: the smallest
/// eigenvalue of the pencil (W(t0), e^{t0 A^T} e^{t0 A}).
double final_observability_constant(const ObservedPair& pair, double t0);

bool is_finally_observable(const ObservedPair& pair, double t0, double tol = 1e-10);

struct PiDetectorResult {
  bool detector = true;
  std::optional<Vector> witness;
  int samples_checked = 0;
  /// Samples where horizon-doubling integrals contradicted the verdict.
  int quadrature_disagreements = 0;
};

/// int <Q T x, T x> < inf  =>  int ||T x||^2 < inf, decided through the
/// factor C = rkhs_factor(Q) and spot-checked on `samples` random states.
PiDetectorResult pi_detector_check(const Matrix& a, const Matrix& q, int samples = 16,
                                   std::uint64_t seed = 0);

struct ObserverAudit {
  double eps_star = 0.0;
  /// max over samples of (lhs - rhs)_+ / lhs for
  /// int_0^inf ||Tx||^2 <= int_0^t0 ||Tx||^2 + (t0 / eps) int_0^inf ||CTx||^2.
  double max_violation = 0.0;
  double min_relative_slack = kInf;
  /// lambda_min(rhs - lhs) / ||lhs|| as quadratic forms.
  double operator_slack = 0.0;
  int samples = 0;
};

ObserverAudit observer_implies_detector_audit(const ObservedPair& pair, double t0, int samples,
                                              std::uint64_t seed);

/// Relative residual of T(t)x = T_{A-FC}(t)x + int_0^t T_{A-FC}(t-s) F C T(s)x ds.
double duhamel_residual(const ObservedPair& pair, const Matrix& f, double t, const Vector& x);

/// Horizon-doubling estimate of int_0^inf x^T e^{tA^T} Q e^{tA} x dt; nullopt
/// when the partial integrals do not settle.
std::optional<double> improper_quadratic_integral(const Matrix& a, const Matrix& q,
                                                  const Vector& x);

struct DetectabilityReport {
  bool hautus = false;
  bool exponential = false;
  std::optional<Matrix> injection;
  bool l2 = false;
  Matrix unobservable;
  std::optional<double> abscissa_on_unobservable;
  std::optional<double> t0;
  std::optional<double> eps_star;
};

/// Runs all three detectability notions; they must agree.
DetectabilityReport detectability_report(const ObservedPair& pair,
                                         std::optional<double> t0 = std::nullopt);

}  // namespace lyacert
