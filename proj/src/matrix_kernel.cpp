#include "lyacert/matrix_kernel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lyacert/errors.hpp"

namespace lyacert {

SpaceNorm::SpaceNorm(double p) : p_(p) {
  if (!(p >= 1.0)) {
    throw InvalidArgument("norm exponent must satisfy p >= 1, got " + std::to_string(p));
  }
}

double SpaceNorm::dual_exponent() const {
  if (p_ == 1.0) return kInf;
  if (p_ == kInf) return 1.0;
  return p_ / (p_ - 1.0);
}

double SpaceNorm::operator()(const Eigen::Ref<const Vector>& x) const {
  if (p_ == 1.0) return x.lpNorm<1>();
  if (p_ == 2.0) return x.norm();
  if (p_ == kInf) return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
  const double scale = x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / scale, p_);
  return scale * std::pow(acc, 1.0 / p_);
}

void require_square(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const Matrix& a, std::string_view what) {
  if (!a.allFinite()) throw InvalidArgument(std::string(what) + ": entries must be finite");
}

void require_symmetric(const Matrix& a, std::string_view what, double tol) {
  require_square(a, what);
  const double defect = (a - a.transpose()).norm();
  if (defect > tol * std::max(1.0, a.norm())) {
    std::ostringstream os;
    os << what << ": matrix is not symmetric (defect " << defect << ")";
    throw SymmetryError(os.str());
  }
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix expm(const Matrix& a, double t) {
  require_square(a, "expm");
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("expm: time must be finite and >= 0");
  if (t == 0.0) return Matrix::Identity(a.rows(), a.cols());
  const Matrix scaled = t * a;
  return scaled.exp();
}

Matrix integral_exp(const Matrix& a, double t) {
  require_square(a, "integral_exp");
  const Eigen::Index n = a.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, n).setIdentity();
  return expm(aug, t).topRightCorner(n, n);
}

Matrix cesaro_integral(const Matrix& a, double t) {
  require_square(a, "cesaro_integral");
  const Eigen::Index n = a.rows();
  Matrix aug = Matrix::Zero(3 * n, 3 * n);
  aug.block(0, 0, n, n) = a;
  aug.block(0, n, n, n).setIdentity();
  aug.block(n, 2 * n, n, n).setIdentity();
  return expm(aug, t).topRightCorner(n, n);
}

ComplexVector eigenvalues(const Matrix& a) {
  require_square(a, "eigenvalues");
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigenvalues: real Schur iteration did not converge for a " << a.rows() << "x"
       << a.cols() << " matrix with norm " << a.norm();
    throw NumericalError(os.str());
  }
  return solver.eigenvalues();
}

double spectral_abscissa(const Matrix& a) { return eigenvalues(a).real().maxCoeff(); }

GrowthBound growth_fit(const Matrix& a, double horizon, int steps) {
  require_square(a, "growth_fit");
  if (!(horizon > 0.0) || steps < 1) {
    throw InvalidArgument("growth_fit: horizon must be positive and steps >= 1");
  }
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "growth_fit: generator is not exponentially stable (spectral abscissa " << abscissa
       << ")";
    throw NotStableError(os.str());
  }
  GrowthBound bound;
  bound.eps = -abscissa * (1.0 - kGrowthMargin);
  bound.m = 1.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = horizon * static_cast<double>(k) / steps;
    const double value = spectral_norm(expm(a, t)) * std::exp(bound.eps * t);
    bound.m = std::max(bound.m, value);
  }
  return bound;
}

Vector singular_values(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)[0];
}

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Vector s = singular_values(m);
  if (!s.allFinite()) throw NumericalError("nuclear_norm: SVD produced non-finite values");
  return s.sum();
}

namespace {

double max_column_norm(const Matrix& m, const SpaceNorm& norm) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, norm(m.col(j)));
  return best;
}

double max_row_norm(const Matrix& m, const SpaceNorm& norm) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, norm(m.row(i).transpose()));
  return best;
}

// sup ||x||_to / ||x||_from on R^dim.
double equivalence_constant(double from, double to, Eigen::Index dim) {
  if (to >= from) return 1.0;
  const double inv_to = to == kInf ? 0.0 : 1.0 / to;
  const double inv_from = from == kInf ? 0.0 : 1.0 / from;
  return std::pow(static_cast<double>(dim), inv_to - inv_from);
}

// Upper bound on the p -> p norm by interpolation between p = 1, 2, inf.
double same_exponent_upper(const Matrix& m, double p) {
  const double n1 = m.cwiseAbs().colwise().sum().maxCoeff();
  const double ninf = m.cwiseAbs().rowwise().sum().maxCoeff();
  const double n2 = spectral_norm(m);
  if (p == 1.0) return n1;
  if (p == 2.0) return n2;
  if (p == kInf) return ninf;
  const double inv = 1.0 / p;
  double bound = std::pow(n1, inv) * std::pow(ninf, 1.0 - inv);
  if (p < 2.0) {
    const double theta = 2.0 * inv - 1.0;
    bound = std::min(bound, std::pow(n1, theta) * std::pow(n2, 1.0 - theta));
  } else {
    const double theta = 2.0 * inv;
    bound = std::min(bound, std::pow(n2, theta) * std::pow(ninf, 1.0 - theta));
  }
  return bound;
}

// w with ||w||_{p*} = 1 and w . v = ||v||_p.
Vector dual_vector(const Vector& v, double p) {
  Vector w = Vector::Zero(v.size());
  const double nv = SpaceNorm(p)(v);
  if (nv == 0.0) return w;
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < v.size(); ++i) w[i] = v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0);
    return w;
  }
  if (p == kInf) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    w[k] = v[k] > 0 ? 1.0 : -1.0;
    return w;
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double r = std::abs(v[i]) / nv;
    w[i] = std::copysign(std::pow(r, p - 1.0), v[i]);
  }
  return w;
}

// Boyd's power iteration; every iterate yields a valid lower bound.
double power_lower_bound(const Matrix& m, const SpaceNorm& from, const SpaceNorm& to) {
  const Eigen::Index n = m.cols();
  std::vector<Vector> starts;
  for (Eigen::Index j = 0; j < n; ++j) starts.push_back(Vector::Unit(n, j));
  starts.push_back(Vector::Ones(n));
  {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinV);
    if (svd.matrixV().cols() > 0) starts.push_back(svd.matrixV().col(0));
  }
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 8; ++k) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = gauss(rng);
    starts.push_back(x);
  }
  const double from_dual = from.dual_exponent();
  double best = 0.0;
  for (Vector x : starts) {
    for (int iter = 0; iter < 40; ++iter) {
      const double nx = from(x);
      if (nx == 0.0) break;
      const Vector y = m * x;
      const double ratio = to(y) / nx;
      const bool improved = ratio > best * (1.0 + 1e-14);
      best = std::max(best, ratio);
      if (to(y) == 0.0) break;
      const Vector g = dual_vector(y, to.p());
      const Vector z = m.transpose() * g;
      if (SpaceNorm(from_dual)(z) == 0.0) break;
      x = dual_vector(z, from_dual);
      if (!improved && iter > 2) break;
    }
  }
  return best;
}

}  // namespace

NormBound induced_norm(const Matrix& m, const SpaceNorm& p_from, const SpaceNorm& p_to) {
  if (m.size() == 0) return {0.0, 0.0};
  if (p_from.is_one()) {
    const double v = max_column_norm(m, p_to);
    return {v, v};
  }
  if (p_to.is_inf()) {
    const double v = max_row_norm(m, p_from.dual());
    return {v, v};
  }
  if (p_from.is_two() && p_to.is_two()) {
    const double v = spectral_norm(m);
    return {v, v};
  }
  const double a = p_from.p();
  const double b = p_to.p();
  double upper = same_exponent_upper(m, a) * equivalence_constant(a, b, m.rows());
  upper = std::min(upper, same_exponent_upper(m, b) * equivalence_constant(a, b, m.cols()));
  const double lower = std::min(power_lower_bound(m, p_from, p_to), upper);
  return {lower, upper};
}

Vector svec(const Matrix& sym) {
  require_square(sym, "svec");
  const Eigen::Index n = sym.rows();
  Vector out(sym_dim(n));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) out[k++] = sym(i, i);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) out[k++] = std::sqrt(2.0) * 0.5 * (sym(i, j) + sym(j, i));
  }
  return out;
}

Matrix smat(const Eigen::Ref<const Vector>& coords) {
  const double disc = std::sqrt(1.0 + 8.0 * static_cast<double>(coords.size()));
  const auto n = static_cast<Eigen::Index>(std::llround((disc - 1.0) / 2.0));
  if (sym_dim(n) != coords.size()) {
    throw DimensionError("smat: coordinate count " + std::to_string(coords.size()) +
                         " is not a triangular number");
  }
  Matrix out(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) = coords[k++];
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      out(i, j) = out(j, i) = coords[k++] / std::sqrt(2.0);
    }
  }
  return out;
}

double min_eigenvalue(const Matrix& sym) {
  require_square(sym, "min_eigenvalue");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(sym), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("min_eigenvalue: eigensolver failed");
  return solver.eigenvalues()[0];
}

}  // namespace lyacert
