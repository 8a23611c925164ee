#pragma once

// Dense linear algebra used throughout lyacert: matrix exponentials and
// their exact time integrals, spectra, induced and nuclear norms.

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <string_view>

namespace lyacert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// An l_p norm on R^dim. p = kInf encodes the max norm.
class SpaceNorm {
 public:
  explicit SpaceNorm(double p = 2.0);

  double p() const { return p_; }
  /// Hoelder conjugate q with 1/p + 1/q = 1.
  double dual_exponent() const;
  SpaceNorm dual() const { return SpaceNorm(dual_exponent()); }

  double operator()(const Eigen::Ref<const Vector>& x) const;

  bool is_one() const { return p_ == 1.0; }
  bool is_two() const { return p_ == 2.0; }
  bool is_inf() const { return p_ == kInf; }

 private:
  double p_;
};

/// ||e^{tA}|| <= m * exp(-eps * t).
struct GrowthBound {
  double m = 1.0;
  double eps = 0.0;
};

/// A two-sided bound on a norm. exact() when the bound is attained.
struct NormBound {
  double lower = 0.0;
  double upper = 0.0;

  bool exact() const { return lower == upper; }
  double gap_ratio() const { return lower > 0.0 ? upper / lower : kInf; }
};

void require_square(const Matrix& a, std::string_view what);
void require_finite(const Matrix& a, std::string_view what);
/// Throws SymmetryError when ||a - a^T|| > tol * max(1, ||a||).
void require_symmetric(const Matrix& a, std::string_view what, double tol = 1e-12);

Matrix symmetrize(const Matrix& a);

/// e^{tA}.
Matrix expm(const Matrix& a, double t = 1.0);

/// S(t) = int_0^t e^{sA} ds, read off the exponential of [[A, I], [0, 0]].
Matrix integral_exp(const Matrix& a, double t);

/// int_0^t S(tau) dtau, read off the exponential of [[A, I, 0], [0, 0, I], [0, 0, 0]].
Matrix cesaro_integral(const Matrix& a, double t);

ComplexVector eigenvalues(const Matrix& a);
double spectral_abscissa(const Matrix& a);

/// Fits a decay bound on a uniform grid of steps+1 points over [0, horizon].
/// The rate is 95% of the spectral decay rate; m is the grid maximum of
/// ||e^{tA}||_2 e^{eps t}.
GrowthBound growth_fit(const Matrix& a, double horizon, int steps);

inline constexpr double kGrowthMargin = 0.05;

/// Operator norm from (R^cols, p_from) to (R^rows, p_to). Exact whenever
/// p_from = 1, p_to = inf, or p_from = p_to in {2, inf}; otherwise a
/// certified interval.
NormBound induced_norm(const Matrix& m, const SpaceNorm& p_from, const SpaceNorm& p_to);

double nuclear_norm(const Matrix& m);
double spectral_norm(const Matrix& m);
Vector singular_values(const Matrix& m);

/// Orthonormal coordinates on symmetric n x n matrices: diagonal entries,
/// then sqrt(2) * a(i, j) for i < j in column order. Dimension n(n+1)/2.
Vector svec(const Matrix& sym);
Matrix smat(const Eigen::Ref<const Vector>& coords);
inline Eigen::Index sym_dim(Eigen::Index n) { return n * (n + 1) / 2; }

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& sym);

}  // namespace lyacert
