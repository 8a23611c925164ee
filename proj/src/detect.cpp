#include "lyacert/detect.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "lyacert/errors.hpp"
#include "lyacert/lyapunov.hpp"
#include "lyacert/riccati.hpp"

namespace lyacert {

ObservedPair::ObservedPair(Matrix a, Matrix c) : a_(std::move(a)), c_(std::move(c)) {
  require_square(a_, "ObservedPair");
  require_finite(a_, "ObservedPair A");
  require_finite(c_, "ObservedPair C");
  if (c_.rows() < 1 || c_.cols() != a_.rows()) {
    std::ostringstream os;
    os << "ObservedPair: C must be m x " << a_.rows() << " with m >= 1, got " << c_.rows() << "x"
       << c_.cols();
    throw DimensionError(os.str());
  }
}

Matrix ObservedPair::q() const { return symmetrize(c_.transpose() * c_); }

namespace {

double rank_scale(const ObservedPair& pair) {
  return std::max({1.0, pair.a().norm(), pair.c().norm()});
}

// Orthonormal basis (columns) of ker M, singular values <= threshold count as zero.
Matrix null_space(const Matrix& m, double threshold) {
  if (m.cols() == 0) return Matrix::Zero(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) rank += sv[k] > threshold ? 1 : 0;
  return svd.matrixV().rightCols(m.cols() - rank);
}

}  // namespace

bool hautus_detectable(const ObservedPair& pair, double tol) {
  const Eigen::Index n = pair.n();
  const ComplexVector lambda = eigenvalues(pair.a());
  const double threshold = tol * rank_scale(pair);
  ComplexMatrix stacked(n + pair.m(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (lambda[k].real() < -kUnstableBoundary) continue;
    stacked.topRows(n) = pair.a().cast<std::complex<double>>();
    stacked.topRows(n).diagonal().array() -= lambda[k];
    stacked.bottomRows(pair.m()) = pair.c().cast<std::complex<double>>();
    Eigen::JacobiSVD<ComplexMatrix> svd(stacked);
    if (svd.singularValues()[n - 1] < threshold) return false;
  }
  return true;
}

Matrix observability_matrix(const ObservedPair& pair) {
  const Eigen::Index n = pair.n();
  const Eigen::Index m = pair.m();
  Matrix out(n * m, n);
  Matrix block = pair.c();
  for (Eigen::Index k = 0; k < n; ++k) {
    out.middleRows(k * m, m) = block;
    block = block * pair.a();
  }
  return out;
}

Matrix unobservable_subspace(const ObservedPair& pair, double rank_tol) {
  // N_0 = ker C, N_{k+1} = {x in N_k : A x in N_k}; each step is an
  // orthogonal null-space computation, avoiding powers of A.
  const double threshold = rank_tol * rank_scale(pair);
  const Eigen::Index n = pair.n();
  Matrix z = null_space(pair.c(), threshold);
  while (z.cols() > 0) {
    const Matrix az = pair.a() * z;
    const Matrix outside = az - z * (z.transpose() * az);
    const Matrix y = null_space(outside, threshold);
    if (y.cols() == z.cols()) break;
    z = y.cols() == 0 ? Matrix(Matrix::Zero(n, 0)) : Matrix(z * y);
    if (z.cols() > 0) {
      Eigen::HouseholderQR<Matrix> qr(z);
      z = qr.householderQ() * Matrix::Identity(n, z.cols());
    }
  }
  if (z.cols() > 0) {
    const Matrix az = pair.a() * z;
    const double leak = (az - z * (z.transpose() * az)).norm();
    if (leak > 1e-6 * rank_scale(pair)) {
      throw NumericalError("unobservable_subspace: computed subspace is not A-invariant");
    }
  }
  return z;
}

L2Decision l2_decide(const ObservedPair& pair, double tol) {
  L2Decision d;
  d.unobservable = unobservable_subspace(pair);
  if (d.unobservable.cols() == 0) return d;
  const Matrix& z = d.unobservable;
  const Matrix restricted = z.transpose() * pair.a() * z;
  Eigen::EigenSolver<Matrix> eig(restricted);
  if (eig.info() != Eigen::Success) throw NumericalError("l2_decide: eigensolver failed");
  const ComplexVector lambda = eig.eigenvalues();
  Eigen::Index worst = 0;
  lambda.real().maxCoeff(&worst);
  d.abscissa_on_unobservable = lambda[worst].real();
  d.detectable = *d.abscissa_on_unobservable < -tol;
  if (!d.detectable) {
    const ComplexVector v = eig.eigenvectors().col(worst);
    Vector w = v.real().norm() >= v.imag().norm() ? Vector(v.real()) : Vector(v.imag());
    d.witness = (z * w).normalized();
  }
  return d;
}

bool l2_detectable(const ObservedPair& pair, double tol) { return l2_decide(pair, tol).detectable; }

Matrix stabilizing_output_injection(const ObservedPair& pair) {
  if (!hautus_detectable(pair)) {
    throw NoInjectionError("stabilizing_output_injection: pair is not detectable");
  }
  const Eigen::Index n = pair.n();
  // Dual Riccati A S + S A^T - S C^T C S + I = 0 is the control Riccati
  // equation for (A^T, C^T).
  const RiccatiSolution sol =
      care_stabilizing(pair.a().transpose(), pair.q(), Matrix::Identity(n, n));
  Matrix f = sol.x * pair.c().transpose();
  const double closed = spectral_abscissa(pair.a() - f * pair.c());
  if (!(closed < 0.0)) {
    std::ostringstream os;
    os << "stabilizing_output_injection: A - FC has spectral abscissa " << closed;
    throw NumericalError(os.str());
  }
  return f;
}

ExponentialDetectability is_exponentially_detectable(const ObservedPair& pair) {
  ExponentialDetectability out;
  try {
    out.injection = stabilizing_output_injection(pair);
    out.detectable = true;
  } catch (const NoInjectionError& e) {
    out.reason = e.what();
  } catch (const MarginalError& e) {
    out.reason = e.what();
  }
  if (out.detectable && !l2_detectable(pair)) {
    throw InternalInconsistencyError(
        "is_exponentially_detectable: stabilizing injection found for a pair that is not "
        "L2 detectable");
  }
  return out;
}

Matrix observability_gramian(const ObservedPair& pair, double t0) {
  if (!(t0 > 0.0)) throw InvalidArgument("observability_gramian: t0 must be positive");
  return gramian(pair.a(), pair.q(), t0);
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
std::pair<Vector, Vector> gauss_legendre(int points) {
  Matrix jacobi = Matrix::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  return {eig.eigenvalues(), 2.0 * eig.eigenvectors().row(0).transpose().cwiseAbs2()};
}

// L with L^T L = W(t0), stacked from sqrt(w_k) C e^{s_k A} on short panels.
// Small eigenvalues of W survive in the singular values of L, where forming
// W itself would bury them under eps |W|.
Matrix observability_factor(const ObservedPair& pair, double t0) {
  const int points = std::max(12, static_cast<int>(pair.n()) + 1);
  const auto [nodes, weights] = gauss_legendre(points);
  const int panels = std::max(1, static_cast<int>(std::ceil(t0 * spectral_norm(pair.a()) / 0.5)));
  const double h = t0 / panels;
  std::vector<Matrix> offsets;
  for (int j = 0; j < points; ++j) offsets.push_back(expm(pair.a(), 0.5 * h * (nodes[j] + 1.0)));
  const Matrix step = expm(pair.a(), h);
  const Eigen::Index m = pair.m();
  Matrix factor(m * panels * points, pair.n());
  Matrix start = Matrix::Identity(pair.n(), pair.n());
  Eigen::Index row = 0;
  for (int p = 0; p < panels; ++p) {
    for (int j = 0; j < points; ++j) {
      factor.middleRows(row, m) = std::sqrt(0.5 * h * weights[j]) * pair.c() * start * offsets[j];
      row += m;
    }
    start = start * step;
  }
  return factor;
}

}  // namespace

double final_observability_constant(const ObservedPair& pair, double t0) {
  if (!(t0 > 0.0)) throw InvalidArgument("final_observability_constant: t0 must be positive");
  // With W = L^T L and the Cholesky factor R of G = e^{t0 A^T} e^{t0 A}
  // (the R of a QR of e^{t0 A}), the pencil's eigenvalues are sigma(L R^-1)^2.
  Eigen::HouseholderQR<Matrix> qr(expm(pair.a(), t0));
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  const Matrix reduced =
      r.transpose().triangularView<Eigen::Lower>().solve(observability_factor(pair, t0).transpose());
  Eigen::JacobiSVD<Matrix> svd(reduced.transpose());
  const Vector& sigma = svd.singularValues();
  if (!sigma.allFinite()) throw NumericalError("final_observability_constant: reduction failed");
  return sigma.size() < pair.n() ? 0.0 : sigma[pair.n() - 1] * sigma[pair.n() - 1];
}

bool is_finally_observable(const ObservedPair& pair, double t0, double tol) {
  const Matrix w = observability_gramian(pair, t0);
  return final_observability_constant(pair, t0) > tol * std::max(1.0, w.norm());
}

std::optional<double> improper_quadratic_integral(const Matrix& a, const Matrix& q,
                                                  const Vector& x) {
  const ComplexVector lambda = eigenvalues(a);
  double slowest = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k].real() < 0.0) {
      slowest = slowest == 0.0 ? -lambda[k].real() : std::min(slowest, -lambda[k].real());
    }
  }
  const double horizon = std::min(1e6, std::max(64.0, slowest > 0.0 ? 60.0 / slowest : 64.0));
  double tau = std::min(1.0, 1.0 / std::max(1.0, a.norm()));
  Matrix w = gramian(a, q, tau);
  Matrix e = expm(a, tau);
  double previous = x.dot(w * x);
  double value = previous;
  while (tau < horizon) {
    w = symmetrize(w + e.transpose() * w * e);
    e = e * e;
    tau *= 2.0;
    previous = value;
    value = x.dot(w * x);
    if (!std::isfinite(value) || std::abs(value) > 1e200) return std::nullopt;
  }
  if (std::abs(value - previous) <= 1e-6 * std::max(std::abs(value), 1e-300) || value == 0.0) {
    return value;
  }
  return std::nullopt;
}

PiDetectorResult pi_detector_check(const Matrix& a, const Matrix& q, int samples,
                                   std::uint64_t seed) {
  require_square(a, "pi_detector_check");
  const ObservedPair pair(a, rkhs_factor(q));
  const L2Decision decision = l2_decide(pair);
  PiDetectorResult out;
  out.detector = decision.detectable;
  out.witness = decision.witness;
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);

  if (decision.witness) {
    // The witness lies in an A-invariant subspace of ker C, so C A^k x = 0.
    const Vector& x = *decision.witness;
    Vector v = x;
    double leak = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      leak = std::max(leak, (pair.c() * v).norm() / std::max(1.0, pair.c().norm() * v.norm()));
      v = a * v;
    }
    const bool conclusion_fails = !improper_quadratic_integral(a, id, x).has_value();
    if (leak > 1e-8 || !conclusion_fails) ++out.quadrature_disagreements;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  // Odd samples start in the stable invariant subspace S and are integrated
  // under the restriction S^T A S: rounding in x would otherwise seed the
  // unstable modes and swamp the decaying trajectory.
  const Matrix stable = stable_subspace(a);
  const Matrix a_stable = stable.transpose() * a * stable;
  const Matrix q_stable = symmetrize(stable.transpose() * pair.q() * stable);
  const Matrix id_stable = Matrix::Identity(stable.cols(), stable.cols());
  for (int s = 0; s < samples; ++s) {
    const bool restricted = s % 2 == 1 && stable.cols() > 0;
    Vector x(restricted ? stable.cols() : n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    ++out.samples_checked;
    if (!out.detector) continue;
    const bool premise =
        improper_quadratic_integral(restricted ? a_stable : a, restricted ? q_stable : pair.q(), x)
            .has_value();
    const bool conclusion =
        improper_quadratic_integral(restricted ? a_stable : a, restricted ? id_stable : id, x)
            .has_value();
    if (premise && !conclusion) ++out.quadrature_disagreements;
  }
  return out;
}

ObserverAudit observer_implies_detector_audit(const ObservedPair& pair, double t0, int samples,
                                              std::uint64_t seed) {
  ObserverAudit audit;
  audit.eps_star = final_observability_constant(pair, t0);
  const Matrix w_c = observability_gramian(pair, t0);
  // The factored evaluation resolves eps* down to about (eps |L|)^2.
  if (!(audit.eps_star > 1e-24 * std::max(1.0, w_c.norm()))) {
    std::ostringstream os;
    os << "observer_implies_detector_audit: final observability constant " << audit.eps_star
       << " is not positive at t0 = " << t0;
    throw NotObserverError(os.str());
  }
  const double abscissa = spectral_abscissa(pair.a());
  if (!(abscissa < 0.0)) {
    throw NotStableError("observer_implies_detector_audit: generator must be stable");
  }
  const Eigen::Index n = pair.n();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix head = gramian(pair.a(), id, t0);            // int_0^t0 ||Tx||^2
  const Matrix total = lyap_solve_direct(pair.a(), id).p;     // int_0^inf ||Tx||^2
  const Matrix observed = lyap_solve_direct(pair.a(), pair.q()).p;  // int_0^inf ||CTx||^2
  const Matrix rhs = head + (t0 / audit.eps_star) * observed;
  audit.operator_slack = min_eigenvalue(rhs - total) / std::max(total.norm(), 1e-300);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int s = 0; s <= samples; ++s) {
    Vector x = Vector::Zero(n);
    if (s > 0) {
      for (Eigen::Index i = 0; i < n; ++i) x[i] = gauss(rng);
    }
    const double lhs = x.dot(total * x);
    const double bound = x.dot(rhs * x);
    const double denom = std::max(lhs, 1e-300);
    audit.max_violation = std::max(audit.max_violation, std::max(0.0, lhs - bound) / denom);
    if (lhs > 0.0) audit.min_relative_slack = std::min(audit.min_relative_slack, (bound - lhs) / lhs);
    ++audit.samples;
  }
  return audit;
}

double duhamel_residual(const ObservedPair& pair, const Matrix& f, double t, const Vector& x) {
  const Eigen::Index n = pair.n();
  if (f.rows() != n || f.cols() != pair.m()) throw DimensionError("duhamel_residual: F has the wrong shape");
  if (x.size() != n) throw DimensionError("duhamel_residual: x has the wrong size");
  const Matrix fc = f * pair.c();
  const Matrix closed = pair.a() - fc;
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = closed;
  m.topRightCorner(n, n) = fc;
  m.bottomRightCorner(n, n) = pair.a();
  const Matrix e = expm(m, t);
  // Top-right block is int_0^t e^{(t-s)(A-FC)} FC e^{sA} ds.
  const Vector lhs = expm(pair.a(), t) * x;
  const Vector rhs = e.topLeftCorner(n, n) * x + e.topRightCorner(n, n) * x;
  return (lhs - rhs).norm() / std::max(lhs.norm(), 1e-300);
}

DetectabilityReport detectability_report(const ObservedPair& pair, std::optional<double> t0) {
  DetectabilityReport r;
  r.hautus = hautus_detectable(pair);
  const ExponentialDetectability exp_det = is_exponentially_detectable(pair);
  r.exponential = exp_det.detectable;
  r.injection = exp_det.injection;
  const L2Decision l2 = l2_decide(pair);
  r.l2 = l2.detectable;
  r.unobservable = l2.unobservable;
  r.abscissa_on_unobservable = l2.abscissa_on_unobservable;
  if (t0) {
    r.t0 = t0;
    r.eps_star = final_observability_constant(pair, *t0);
  }
  if (r.hautus != r.exponential || r.hautus != r.l2) {
    std::ostringstream os;
    os << "detectability_report: notions disagree (hautus=" << r.hautus
       << ", exponential=" << r.exponential << ", l2=" << r.l2 << ")";
    throw InternalInconsistencyError(os.str());
  }
  return r;
}

}  // namespace lyacert
