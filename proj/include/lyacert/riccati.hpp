#pragma once

#include "lyacert/matrix_kernel.hpp"

namespace lyacert {

/// Complex Schur form H = U T U^* reordered so that eigenvalues with negative
/// real part occupy the leading `stable_count` diagonal positions.
struct OrderedSchur {
  ComplexMatrix u;
  ComplexMatrix t;
  Eigen::Index stable_count = 0;
};

OrderedSchur ordered_schur(const Matrix& h);

/// Real orthonormal basis of the stable invariant subspace of A.
Matrix stable_subspace(const Matrix& a);

struct RiccatiSolution {
  Matrix x;
  /// ||A^T X + X A - X G X + Q|| / max(1, ||Q||).
  double residual = 0.0;
};

/// Stabilizing solution of A^T X + X A - X G X + Q = 0 (G, Q symmetric PSD)
/// from the stable invariant subspace of the Hamiltonian
/// [[A, -G], [-Q, -A^T]]. Throws MarginalError when the Hamiltonian has
/// imaginary-axis eigenvalues and NoInjectionError when the stable subspace
/// is not a graph.
RiccatiSolution care_stabilizing(const Matrix& a, const Matrix& g, const Matrix& q);

}  // namespace lyacert
