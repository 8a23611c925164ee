#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lyacert/matrix_kernel.hpp"
#include "lyacert/order_structures.hpp"

namespace lyacert {

bool is_metzler(const Matrix& a);

/// The matrix semigroup T(t) = e^{tA} on R^n, optionally ordered by a vector cone.
class SemigroupProbe {
 public:
  /// Throws NotMetzlerError for an orthant cone with a non-Metzler generator;
  /// PSD cones are rejected (use the Lyapunov operator on Sym(n) instead).
  explicit SemigroupProbe(Matrix a, std::optional<ConeSpec> cone = std::nullopt,
                          SpaceNorm norm = SpaceNorm(2.0));

  const Matrix& generator() const { return a_; }
  const std::optional<ConeSpec>& cone() const { return cone_; }
  const SpaceNorm& norm() const { return norm_; }
  Eigen::Index dim() const { return a_.rows(); }

 private:
  Matrix a_;
  std::optional<ConeSpec> cone_;
  SpaceNorm norm_;
};

struct TrajectorySample {
  double t = 0.0;
  Vector state;
  double norm = 0.0;
};

std::vector<TrajectorySample> trajectory(const SemigroupProbe& probe, const Vector& x,
                                         std::span<const double> grid);

/// Emits "t,norm" rows.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples);

bool is_exponentially_stable(const SemigroupProbe& probe, double tol_abscissa = 1e-10);

struct WeakL1Options {
  double residue_tol = 1e-9;
  double abscissa_tol = 1e-10;
  /// Eigenvector condition numbers beyond this count as defective.
  double max_eigvec_condition = 1e8;
  bool allow_fallback = true;
};

struct WeakL1Witness {
  Vector phi;
  Vector x;
};

struct WeakL1Result {
  bool stable = true;
  /// False when the defective-matrix heuristic decided the verdict.
  bool exact = true;
  std::optional<WeakL1Witness> witness;
};

/// Decides whether int_0^inf <phi, T(t) x> dt < inf for all positive phi, x.
WeakL1Result weak_L1_stable_on_cone(const SemigroupProbe& probe,
                                    const WeakL1Options& options = {});

struct DetectorCheck {
  bool detector = true;
  std::optional<Vector> witness_phi;
};

/// Weak L1 detector test for z on the orthant: integrability of <phi, T z>
/// must force integrability of <phi, T x> for every positive x.
DetectorCheck weak_detector_check(const SemigroupProbe& probe, const Vector& z,
                                  const WeakL1Options& options = {});

/// -A^{-1}, cross-checked against S(t) at a long horizon and, when the probe
/// carries a cone, against cone preservation.
Matrix s_infinity(const SemigroupProbe& probe);

/// Relative residuals of the integrated-semigroup identities at time t.
struct LemmaReport {
  double derivative = 0.0;         // (S(t+h) - S(t-h)) / 2h vs T(t)
  double as_identity = 0.0;        // A S(t) vs T(t) - I
  double commutation = 0.0;        // A S(t) vs S(t) A
  double cesaro_identity = 0.0;    // A int_0^t S vs S(t) - tI
  double inner_commutation = 0.0;  // A int_0^t S vs (int_0^t S) A
  /// (1/t) int_0^t S vs -A^{-1}; stable generators only.
  std::optional<double> cesaro_limit;

  double max_algebraic() const;
};

LemmaReport lemma_AS_suite(const Matrix& a, double t, double h = 1e-5);

struct StabilityReport {
  double abscissa = 0.0;
  bool exponential = false;
  std::optional<GrowthBound> growth;
  std::optional<WeakL1Result> weak_l1;
  /// int_0^inf ||T(t) x|| dt < inf for all x; coincides with exponential
  /// stability for matrix semigroups.
  bool l1_pi = false;
};

/// Throws InternalInconsistencyError if exponential stability holds while
/// weak L1 stability on the cone does not.
StabilityReport analyze_stability(const SemigroupProbe& probe, double horizon = 0.0,
                                  int steps = 200);

}  // namespace lyacert
