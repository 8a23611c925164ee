#pragma once

// The Lyapunov generator P -> A^T P + P A, the implemented semigroup it
// generates, its predual on two-fold tensors, and Lyapunov equation solvers.

#include <optional>
#include <string>
#include <vector>

#include "lyacert/matrix_kernel.hpp"

namespace lyacert {

/// rho = sum_ij coeffs(i, j) e_i (x) e_j in R^n (x) R^n, with l_p factors.
class Tensor2 {
 public:
  /// Throws SymmetryError when `symmetric` is set on an asymmetric grid.
  explicit Tensor2(Matrix coeffs, bool symmetric = false, double p = 2.0);

  /// x (x) y.
  static Tensor2 monomial(const Vector& x, const Vector& y, double p = 2.0);

  const Matrix& coeffs() const { return coeffs_; }
  bool symmetric() const { return symmetric_; }
  double p() const { return p_; }
  Eigen::Index dim() const { return coeffs_.rows(); }

 private:
  Matrix coeffs_;
  bool symmetric_;
  double p_;
};

/// P -> A^T P + P A on Sym(n).
class LyapunovOperator {
 public:
  explicit LyapunovOperator(Matrix a);

  const Matrix& generator() const { return a_; }
  Matrix apply(const Matrix& p) const;
  /// Matrix of the operator in svec coordinates, n(n+1)/2 square.
  Matrix sym_lift() const;
  /// I (x) A^T + A^T (x) I acting on column-major vec(P), n^2 square.
  Matrix kron_lift() const;

 private:
  Matrix a_;
};

Matrix lyap_apply(const Matrix& a, const Matrix& p);

/// e^{tV^T} P e^{tA}; with V = A this is the Lyapunov semigroup.
Matrix implemented_apply(const Matrix& a, const Matrix& v, double t, const Matrix& p);

/// Predual action R -> e^{tA} R e^{tV^T}, i.e. x (x) y -> T(t)x (x) V(t)y.
Tensor2 tensor_semigroup_apply(const Matrix& a, const Matrix& v, double t, const Tensor2& rho);

/// <<P, rho>> = trace(P coeffs); on monomials <P x, y>.
double pairing(const Matrix& p, const Tensor2& rho);

/// Projective tensor norm. Exact for p = 1 (entrywise l1) and p = 2 (nuclear
/// norm); for other p an interval from explicit decompositions (upper) and
/// dual operators of certified norm (lower).
NormBound projective_norm(const Tensor2& rho);

Tensor2 symmetric_project(const Tensor2& rho);

struct RankOneTerm {
  double weight = 0.0;
  Vector direction;
};

/// coeffs = sum weight_k u_k u_k^T with orthonormal u_k.
std::vector<RankOneTerm> grothendieck_decompose(const Tensor2& rho);

struct TensorSplit {
  Tensor2 plus;
  Tensor2 minus;
};

/// rho = plus - minus, both sums of positive multiples of u (x) u.
TensorSplit split_pm(const Tensor2& rho);

/// C with C^T C = Q from the spectral square root, keeping eigenvalues at or
/// above rank_tol * lambda_max. Q = 0 yields a single zero row.
Matrix rkhs_factor(const Matrix& q, double rank_tol = 1e-12, double psd_tol = 1e-9);

struct LyapunovSolution {
  Matrix p;
  /// ||A^T P + P A + Q|| / ||Q||.
  double residual = 0.0;
  std::string method;
};

/// Throws SingularSystemError when lambda_i + lambda_j = 0 for some
/// eigenvalue pair (i <= j).
void require_nonresonant(const Matrix& a);

/// Solves A^T P + P A = -Q on symmetric coordinates.
LyapunovSolution lyap_solve_direct(const Matrix& a, const Matrix& q);

/// int_0^t e^{sA^T} Q e^{sA} ds from the exponential of [[-A^T, Q], [0, A]].
Matrix gramian(const Matrix& a, const Matrix& q, double t);

struct IntegralPolicy {
  /// Interval length; 0 selects 0.5 / (1 + |spectral abscissa|).
  double step = 0.0;
  double relative_stop = 1e-12;
  long max_steps = 2'000'000;
};

struct IntegralSolution {
  LyapunovSolution solution;
  long steps = 0;
  double step = 0.0;
  /// min over increments of lambda_min(increment) / ||P||; >= -1e-12 means
  /// the partial sums were monotone.
  double worst_increment = 0.0;
  bool monotone = true;
  /// Relative distance to the direct solver, when that solver applies.
  std::optional<double> direct_agreement;
};

/// P = int_0^inf e^{tA^T} Q e^{tA} dt as a sum of exact per-interval Gramians.
/// Throws DivergenceError for a generator that is not exponentially stable.
IntegralSolution lyap_solve_integral(const Matrix& a, const Matrix& q,
                                     const IntegralPolicy& policy = {});

struct SymOperator {
  /// Matrix on svec coordinates.
  Matrix coords;
  /// Images of the PSD spanning set {e_i e_i^T, (e_i + e_j)(e_i + e_j)^T} are PSD.
  bool positive_on_psd_basis = false;

  Matrix apply(const Matrix& sym) const { return smat(coords * svec(sym)); }
};

/// -(A^T . + . A)^{-1} on Sym(n).
SymOperator s_infinity_operator(const Matrix& a);

}  // namespace lyacert
