#include "lyacert/riccati.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "lyacert/errors.hpp"

namespace lyacert {

namespace {

// Swaps the adjacent diagonal entries k, k+1 of an upper triangular T with a
// unitary rotation, updating the Schur vectors.
void swap_adjacent(ComplexMatrix& t, ComplexMatrix& u, Eigen::Index k) {
  const std::complex<double> a = t(k, k);
  const std::complex<double> b = t(k, k + 1);
  const std::complex<double> c = t(k + 1, k + 1);
  // (b, c - a) is an eigenvector of the 2x2 block for eigenvalue c.
  Eigen::Vector2cd v(b, c - a);
  const double nv = v.norm();
  if (nv == 0.0) return;
  v /= nv;
  Eigen::Matrix2cd q;
  q.col(0) = v;
  q.col(1) << -std::conj(v[1]), std::conj(v[0]);
  t.middleRows(k, 2) = q.adjoint() * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * q;
  u.middleCols(k, 2) = u.middleCols(k, 2) * q;
  t(k + 1, k) = 0.0;
  t(k, k) = c;
  t(k + 1, k + 1) = a;
}

}  // namespace

OrderedSchur ordered_schur(const Matrix& h) {
  require_square(h, "ordered_schur");
  Eigen::ComplexSchur<ComplexMatrix> schur(h.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) throw NumericalError("ordered_schur: Schur iteration failed");
  OrderedSchur out{schur.matrixU(), schur.matrixT(), 0};
  const Eigen::Index n = h.rows();
  for (Eigen::Index target = 0; target < n; ++target) {
    Eigen::Index found = -1;
    for (Eigen::Index j = target; j < n; ++j) {
      if (out.t(j, j).real() < 0.0) {
        found = j;
        break;
      }
    }
    if (found < 0) break;
    for (Eigen::Index k = found; k > target; --k) swap_adjacent(out.t, out.u, k - 1);
    out.stable_count = target + 1;
  }
  return out;
}

Matrix stable_subspace(const Matrix& a) {
  const OrderedSchur s = ordered_schur(a);
  const Eigen::Index n = a.rows();
  if (s.stable_count == 0) return Matrix::Zero(n, 0);
  const ComplexMatrix basis = s.u.leftCols(s.stable_count);
  // The subspace is real: real and imaginary parts span it.
  Matrix stacked(n, 2 * s.stable_count);
  stacked << basis.real(), basis.imag();
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(s.stable_count);
}

RiccatiSolution care_stabilizing(const Matrix& a, const Matrix& g, const Matrix& q) {
  require_square(a, "care_stabilizing");
  const Eigen::Index n = a.rows();
  if (g.rows() != n || g.cols() != n || q.rows() != n || q.cols() != n) {
    throw DimensionError("care_stabilizing: G and Q must match A");
  }
  Matrix h(2 * n, 2 * n);
  h << a, -g, -q, -a.transpose();

  const ComplexVector spectrum = eigenvalues(h);
  const double scale = std::max(1.0, h.norm());
  for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
    if (std::abs(spectrum[k].real()) <= 1e-10 * scale) {
      std::ostringstream os;
      os << "care_stabilizing: Hamiltonian eigenvalue " << spectrum[k]
         << " lies on the imaginary axis";
      throw MarginalError(os.str());
    }
  }

  const OrderedSchur s = ordered_schur(h);
  if (s.stable_count != n) {
    throw NumericalError("care_stabilizing: Hamiltonian stable subspace has the wrong dimension");
  }
  const ComplexMatrix u1 = s.u.topLeftCorner(n, n);
  const ComplexMatrix u2 = s.u.bottomLeftCorner(n, n);
  Eigen::JacobiSVD<ComplexMatrix> svd(u1);
  const Vector sv = svd.singularValues();
  if (sv[n - 1] <= 1e-10 * sv[0]) {
    throw NoInjectionError("care_stabilizing: stable Hamiltonian subspace is not a graph");
  }
  // X = U2 U1^{-1}, via U1^T X^T = U2^T.
  const ComplexMatrix xc = u1.transpose().fullPivLu().solve(u2.transpose()).transpose();
  RiccatiSolution sol;
  sol.x = symmetrize(xc.real());
  sol.residual = (a.transpose() * sol.x + sol.x * a - sol.x * g * sol.x + q).norm() /
                 std::max(1.0, q.norm());
  return sol;
}

}  // namespace lyacert
