#include "lyacert/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lyacert/errors.hpp"

namespace lyacert {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kInputSymTol = 1e-10;

void require_same_square(const Matrix& a, const Matrix& b, const char* what) {
  require_square(a, what);
  if (b.rows() != a.rows() || b.cols() != a.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw DimensionError(os.str());
  }
}

// ||x||_p for an exponent carried as a double.
double pnorm(const Vector& x, double p) { return SpaceNorm(p)(x); }

// Returns w with ||w||_{p*} = 1 and w . v = ||v||_p.
Vector norming_functional(const Vector& v, double p) {
  Vector w = Vector::Zero(v.size());
  const double nv = pnorm(v, p);
  if (nv == 0.0) return w;
  if (p == 1.0) return v.array().sign().matrix();
  if (p == kInf) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    w[k] = v[k] > 0.0 ? 1.0 : -1.0;
    return w;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    w[i] = std::copysign(std::pow(std::abs(v[i]) / nv, p - 1.0), v[i]);
  }
  return w;
}

}  // namespace

Tensor2::Tensor2(Matrix coeffs, bool symmetric, double p)
    : coeffs_(std::move(coeffs)), symmetric_(symmetric), p_(SpaceNorm(p).p()) {
  require_square(coeffs_, "Tensor2");
  if (symmetric_) {
    const double defect = (coeffs_ - coeffs_.transpose()).norm();
    if (defect > kSymTol * std::max(coeffs_.norm(), 1e-300) && defect > 0.0) {
      throw SymmetryError("Tensor2: symmetric flag set on an asymmetric coefficient grid");
    }
  }
}

Tensor2 Tensor2::monomial(const Vector& x, const Vector& y, double p) {
  if (x.size() != y.size()) throw DimensionError("Tensor2::monomial: factor size mismatch");
  return Tensor2(x * y.transpose(), false, p);
}

LyapunovOperator::LyapunovOperator(Matrix a) : a_(std::move(a)) {
  require_square(a_, "LyapunovOperator");
}

Matrix LyapunovOperator::apply(const Matrix& p) const {
  require_same_square(a_, p, "LyapunovOperator::apply");
  require_symmetric(p, "LyapunovOperator::apply", kSymTol);
  return symmetrize(a_.transpose() * p + p * a_);
}

Matrix LyapunovOperator::sym_lift() const {
  const Eigen::Index n = a_.rows();
  const Eigen::Index d = sym_dim(n);
  Matrix lift(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Matrix basis = smat(Vector::Unit(d, k));
    lift.col(k) = svec(a_.transpose() * basis + basis * a_);
  }
  return lift;
}

Matrix LyapunovOperator::kron_lift() const {
  const Eigen::Index n = a_.rows();
  const Matrix at = a_.transpose();
  Matrix out = Matrix::Zero(n * n, n * n);
  // vec(A^T P) = (I (x) A^T) vec P and vec(P A) = (A^T (x) I) vec P.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.block(i * n, i * n, n, n) += at;
    for (Eigen::Index j = 0; j < n; ++j) {
      out.block(i * n, j * n, n, n) += at(i, j) * Matrix::Identity(n, n);
    }
  }
  return out;
}

Matrix lyap_apply(const Matrix& a, const Matrix& p) { return LyapunovOperator(a).apply(p); }

Matrix implemented_apply(const Matrix& a, const Matrix& v, double t, const Matrix& p) {
  require_same_square(a, v, "implemented_apply");
  require_same_square(a, p, "implemented_apply");
  return expm(v, t).transpose() * p * expm(a, t);
}

Tensor2 tensor_semigroup_apply(const Matrix& a, const Matrix& v, double t, const Tensor2& rho) {
  require_same_square(a, v, "tensor_semigroup_apply");
  require_same_square(a, rho.coeffs(), "tensor_semigroup_apply");
  Matrix out = expm(a, t) * rho.coeffs() * expm(v, t).transpose();
  const bool keep_symmetric = rho.symmetric() && a == v;
  if (keep_symmetric) out = symmetrize(out);
  return Tensor2(std::move(out), keep_symmetric, rho.p());
}

double pairing(const Matrix& p, const Tensor2& rho) {
  require_same_square(p, rho.coeffs(), "pairing");
  return (p.transpose().array() * rho.coeffs().array()).sum();
}

NormBound projective_norm(const Tensor2& rho) {
  const Matrix& c = rho.coeffs();
  const double p = rho.p();
  if (p == 2.0) {
    const double v = nuclear_norm(c);
    return {v, v};
  }
  if (p == 1.0) {
    const double v = c.cwiseAbs().sum();
    return {v, v};
  }
  const Eigen::Index n = c.rows();
  const SpaceNorm pn(p);
  const SpaceNorm qn = pn.dual();

  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();

  // Upper bounds: explicit decompositions sum ||x_k||_p ||y_k||_p.
  double upper = c.cwiseAbs().sum();  // entrywise, ||e_i||_p = 1
  double by_svd = 0.0;
  double by_rows = 0.0;
  double by_cols = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    by_svd += sigma[k] * pn(u.col(k)) * pn(v.col(k));
    by_rows += pn(c.row(k).transpose());
    by_cols += pn(c.col(k));
  }
  upper = std::min({upper, by_svd, by_rows, by_cols});

  // Lower bounds: <<P, rho>> / ||P||_{p -> q} for explicit operators P.
  double lower = 0.0;
  auto consider = [&](const Matrix& op, double op_norm_upper) {
    if (op_norm_upper <= 0.0) return;
    lower = std::max(lower, std::abs((op.transpose().array() * c.array()).sum()) / op_norm_upper);
  };
  const Matrix polar = v * u.transpose();
  consider(polar, induced_norm(polar, pn, qn).upper);
  const Matrix signs = c.transpose().array().sign().matrix();
  consider(signs, induced_norm(signs, pn, qn).upper);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (sigma[k] == 0.0) break;
    // Rank-one a b^T has p -> q norm ||a||_q ||b||_q = 1 exactly.
    const Vector a = norming_functional(v.col(k), p);
    const Vector b = norming_functional(u.col(k), p);
    consider(a * b.transpose(), qn(a) * qn(b));
  }
  return {std::min(lower, upper), upper};
}

Tensor2 symmetric_project(const Tensor2& rho) {
  return Tensor2(symmetrize(rho.coeffs()), true, rho.p());
}

std::vector<RankOneTerm> grothendieck_decompose(const Tensor2& rho) {
  if (!rho.symmetric()) throw SymmetryError("grothendieck_decompose: tensor must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho.coeffs());
  if (eig.info() != Eigen::Success) throw NumericalError("grothendieck_decompose: eigensolver failed");
  std::vector<RankOneTerm> terms;
  // Descending order puts the positive part first.
  for (Eigen::Index k = rho.dim() - 1; k >= 0; --k) {
    terms.push_back({eig.eigenvalues()[k], eig.eigenvectors().col(k)});
  }
  return terms;
}

TensorSplit split_pm(const Tensor2& rho) {
  const Eigen::Index n = rho.dim();
  Matrix plus = Matrix::Zero(n, n);
  Matrix minus = Matrix::Zero(n, n);
  for (const auto& term : grothendieck_decompose(rho)) {
    const Matrix outer = term.direction * term.direction.transpose();
    if (term.weight > 0.0) plus += term.weight * outer;
    if (term.weight < 0.0) minus -= term.weight * outer;
  }
  return {Tensor2(symmetrize(plus), true, rho.p()), Tensor2(symmetrize(minus), true, rho.p())};
}

Matrix rkhs_factor(const Matrix& q, double rank_tol, double psd_tol) {
  require_symmetric(q, "rkhs_factor", kInputSymTol);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(q));
  if (eig.info() != Eigen::Success) throw NumericalError("rkhs_factor: eigensolver failed");
  const Vector& lambda = eig.eigenvalues();
  const Eigen::Index n = q.rows();
  const double top = lambda[n - 1];
  if (lambda[0] < -psd_tol * std::max(q.norm(), 1e-300) && lambda[0] < 0.0) {
    std::ostringstream os;
    os << "rkhs_factor: Q is not positive semidefinite (lambda_min " << lambda[0] << ")";
    throw NotPsdError(os.str());
  }
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (top > 0.0 && lambda[k] >= rank_tol * top && lambda[k] > 0.0) kept.push_back(k);
  }
  if (kept.empty()) return Matrix::Zero(1, n);
  Matrix c(static_cast<Eigen::Index>(kept.size()), n);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Eigen::Index k = kept[r];
    c.row(static_cast<Eigen::Index>(r)) = std::sqrt(lambda[k]) * eig.eigenvectors().col(k).transpose();
  }
  return c;
}

void require_nonresonant(const Matrix& a) {
  const ComplexVector lambda = eigenvalues(a);
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    for (Eigen::Index j = i; j < lambda.size(); ++j) {
      if (std::abs(lambda[i] + lambda[j]) <= 1e-10 * scale) {
        std::ostringstream os;
        os << "Lyapunov operator is singular: eigenvalues " << lambda[i] << " and " << lambda[j]
           << " sum to zero";
        throw SingularSystemError(os.str(), lambda[i], lambda[j]);
      }
    }
  }
}

namespace {

double relative_residual(const Matrix& a, const Matrix& p, const Matrix& q) {
  const double r = (a.transpose() * p + p * a + q).norm();
  const double qn = q.norm();
  if (qn == 0.0) return r == 0.0 ? 0.0 : kInf;
  return r / qn;
}

}  // namespace

LyapunovSolution lyap_solve_direct(const Matrix& a, const Matrix& q) {
  require_same_square(a, q, "lyap_solve_direct");
  require_symmetric(q, "lyap_solve_direct", kInputSymTol);
  require_nonresonant(a);
  const Matrix qs = symmetrize(q);
  const Matrix lift = LyapunovOperator(a).sym_lift();
  Eigen::PartialPivLU<Matrix> lu(lift);
  const Vector rhs = -svec(qs);
  Vector x = lu.solve(rhs);
  // One step of iterative refinement.
  x += lu.solve(rhs - lift * x);
  LyapunovSolution sol{symmetrize(smat(x)), 0.0, "direct"};
  sol.residual = relative_residual(a, sol.p, qs);
  if (!(sol.residual <= 1e-8)) {
    std::ostringstream os;
    os << "lyap_solve_direct: residual " << sol.residual << " exceeds 1e-8 relative";
    throw NumericalError(os.str());
  }
  return sol;
}

Matrix gramian(const Matrix& a, const Matrix& q, double t) {
  require_same_square(a, q, "gramian");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("gramian: time must be finite and >= 0");
  const Eigen::Index n = a.rows();
  // The [[-A^T, Q], [0, A]] exponential carries e^{-tA^T}, which overflows
  // for long horizons; evaluate on a short base interval and double up with
  // W(2s) = W(s) + e^{sA^T} W(s) e^{sA}.
  int doublings = 0;
  double base = t;
  const double na = a.norm();
  while (base * na > 1.0 && doublings < 64) {
    base *= 0.5;
    ++doublings;
  }
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = -a.transpose();
  m.topRightCorner(n, n) = q;
  m.bottomRightCorner(n, n) = a;
  const Matrix e = expm(m, base);
  Matrix w = symmetrize(e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n));
  Matrix step = e.bottomRightCorner(n, n);
  for (int k = 0; k < doublings; ++k) {
    w = symmetrize(w + step.transpose() * w * step);
    step = step * step;
  }
  return w;
}

IntegralSolution lyap_solve_integral(const Matrix& a, const Matrix& q,
                                     const IntegralPolicy& policy) {
  require_same_square(a, q, "lyap_solve_integral");
  require_symmetric(q, "lyap_solve_integral", kInputSymTol);
  const Matrix qs = symmetrize(q);
  const double abscissa = spectral_abscissa(a);
  const bool stable = abscissa < 0.0;

  IntegralSolution out;
  out.step = policy.step > 0.0 ? policy.step : 0.5 / (1.0 + std::abs(abscissa));
  const Matrix w = gramian(a, qs, out.step);
  const Matrix e_step = expm(a, out.step);
  const Eigen::Index n = a.rows();
  Matrix e_k = Matrix::Identity(n, n);
  Matrix p = Matrix::Zero(n, n);
  double previous_increment = -1.0;
  int growth_run = 0;
  for (long k = 0; k < policy.max_steps; ++k) {
    const Matrix increment = symmetrize(e_k.transpose() * w * e_k);
    p += increment;
    ++out.steps;
    const double inc_norm = increment.norm();
    const double p_norm = p.norm();
    if (p_norm > 0.0) {
      const double ratio = min_eigenvalue(increment) / p_norm;
      out.worst_increment = std::min(out.worst_increment, ratio);
      if (ratio < -1e-12) out.monotone = false;
    }
    if (!std::isfinite(p_norm)) {
      throw DivergenceError("lyap_solve_integral: partial sums overflowed");
    }
    if (inc_norm <= policy.relative_stop * p_norm || inc_norm == 0.0) {
      out.solution = LyapunovSolution{symmetrize(p), relative_residual(a, p, qs), "integral"};
      try {
        const LyapunovSolution direct = lyap_solve_direct(a, qs);
        out.direct_agreement =
            (direct.p - out.solution.p).norm() / std::max(direct.p.norm(), 1e-300);
      } catch (const Error&) {
        out.direct_agreement.reset();
      }
      return out;
    }
    if (!stable) {
      // Not decaying: three consecutive intervals without shrinkage.
      growth_run = inc_norm >= previous_increment ? growth_run + 1 : 0;
      if (growth_run >= 3) {
        std::ostringstream os;
        os << "lyap_solve_integral: increments did not decay over 3 consecutive intervals "
           << "(interval " << k << ", spectral abscissa " << abscissa << ")";
        throw DivergenceError(os.str());
      }
    }
    previous_increment = inc_norm;
    e_k = e_k * e_step;
  }
  throw DivergenceError("lyap_solve_integral: step budget exhausted before convergence");
}

SymOperator s_infinity_operator(const Matrix& a) {
  require_square(a, "s_infinity_operator");
  require_nonresonant(a);
  const Eigen::Index n = a.rows();
  const Matrix lift = LyapunovOperator(a).sym_lift();
  SymOperator op;
  op.coords = -lift.fullPivLu().inverse();

  op.positive_on_psd_basis = true;
  for (Eigen::Index i = 0; i < n && op.positive_on_psd_basis; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      Vector e = Vector::Unit(n, i);
      if (j != i) e += Vector::Unit(n, j);
      const Matrix image = op.apply(e * e.transpose());
      if (min_eigenvalue(image) < -1e-9 * std::max(1.0, image.norm())) {
        op.positive_on_psd_basis = false;
        break;
      }
    }
  }
  if (spectral_abscissa(a) < 0.0) {
    const Matrix id = Matrix::Identity(n, n);
    const Matrix direct = lyap_solve_direct(a, id).p;
    const double gap = (op.apply(id) - direct).norm() / std::max(direct.norm(), 1e-300);
    if (gap > 1e-8 || !op.positive_on_psd_basis) {
      throw InternalInconsistencyError(
          "s_infinity_operator: inverse of a stable Lyapunov generator failed its cross-checks");
    }
  }
  return op;
}

}  // namespace lyacert
