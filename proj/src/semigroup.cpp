#include "lyacert/semigroup.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "lyacert/errors.hpp"

namespace lyacert {

bool is_metzler(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) < 0.0) return false;
    }
  }
  return true;
}

SemigroupProbe::SemigroupProbe(Matrix a, std::optional<ConeSpec> cone, SpaceNorm norm)
    : a_(std::move(a)), cone_(std::move(cone)), norm_(norm) {
  require_square(a_, "SemigroupProbe");
  require_finite(a_, "SemigroupProbe");
  if (!cone_) return;
  if (!cone_->is_vector_cone()) {
    throw UnsupportedError("SemigroupProbe: state-space cones must be orthant or polyhedral");
  }
  if (cone_->dim() != a_.rows()) throw DimensionError("SemigroupProbe: cone dimension mismatch");
  if (cone_->kind() == ConeKind::orthant && !is_metzler(a_)) {
    throw NotMetzlerError("SemigroupProbe: orthant-positive semigroups need a Metzler generator");
  }
}

std::vector<TrajectorySample> trajectory(const SemigroupProbe& probe, const Vector& x,
                                         std::span<const double> grid) {
  if (x.size() != probe.dim()) throw DimensionError("trajectory: state dimension mismatch");
  std::vector<TrajectorySample> out;
  out.reserve(grid.size());
  double previous = 0.0;
  for (double t : grid) {
    if (!(t >= previous) || !std::isfinite(t)) {
      throw InvalidArgument("trajectory: grid must be finite, nonnegative and ascending");
    }
    previous = t;
    TrajectorySample s;
    s.t = t;
    s.state = expm(probe.generator(), t) * x;
    s.norm = probe.norm()(s.state);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples) {
  out << "t,norm\n";
  for (const auto& s : samples) out << shortest(s.t) << ',' << shortest(s.norm) << '\n';
}

bool is_exponentially_stable(const SemigroupProbe& probe, double tol_abscissa) {
  return spectral_abscissa(probe.generator()) < -tol_abscissa;
}

namespace {

struct EigenStructure {
  ComplexVector lambda;
  ComplexMatrix v;
  ComplexMatrix v_inv;
  double condition = kInf;
};

EigenStructure eigen_structure(const Matrix& a) {
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  EigenStructure es;
  es.lambda = solver.eigenvalues();
  es.v = solver.eigenvectors();
  Eigen::JacobiSVD<ComplexMatrix> svd(es.v);
  const Vector sv = svd.singularValues();
  const double smin = sv[sv.size() - 1];
  es.condition = smin > 0.0 ? sv[0] / smin : kInf;
  if (std::isfinite(es.condition)) es.v_inv = es.v.inverse();
  return es;
}

bool diagonalizable(const EigenStructure& es, const WeakL1Options& options) {
  return std::isfinite(es.condition) && es.condition <= options.max_eigvec_condition;
}

// Decides int_0^inf <phi, e^{tA} x> dt < inf from the modal expansion
// sum_k (phi . v_k)(w_k . x) e^{lambda_k t}: finite iff every group of equal
// eigenvalues with Re >= -abscissa_tol has a vanishing total coefficient.
bool pairing_integrable(const EigenStructure& es, const Vector& phi, const Vector& x,
                        const WeakL1Options& options) {
  const Eigen::Index n = es.lambda.size();
  const ComplexVector left = es.v.transpose() * phi.cast<std::complex<double>>();
  const ComplexVector right = es.v_inv * x.cast<std::complex<double>>();
  double scale = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    scale = std::max(scale, es.v.col(k).norm() * es.v_inv.row(k).norm());
  }
  scale *= phi.norm() * x.norm();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (seen[static_cast<std::size_t>(k)] || es.lambda[k].real() < -options.abscissa_tol) continue;
    std::complex<double> total = 0.0;
    for (Eigen::Index j = k; j < n; ++j) {
      const double gap = std::abs(es.lambda[j] - es.lambda[k]);
      if (gap <= 1e-8 * std::max(1.0, std::abs(es.lambda[k]))) {
        seen[static_cast<std::size_t>(j)] = true;
        total += left[j] * right[j];
      }
    }
    if (std::abs(total) > options.residue_tol * std::max(scale, 1e-300)) return false;
  }
  return true;
}

// Heuristic for defective generators: watch <phi, S(t) x> over doubling
// horizons and call it divergent unless the increments keep shrinking.
bool pairing_integrable_fallback(const Matrix& a, const Vector& phi, const Vector& x) {
  std::vector<double> values;
  for (int k = 0; k <= 12; ++k) {
    const double t = std::ldexp(1.0, k);
    const double v = phi.dot(integral_exp(a, t) * x);
    if (!std::isfinite(v) || std::abs(v) > 1e150) return false;
    values.push_back(v);
  }
  const std::size_t m = values.size();
  const double ref = std::max(1.0, std::abs(values.back()));
  int shrinking = 0;
  for (std::size_t k = m - 3; k < m; ++k) {
    const double d_now = std::abs(values[k] - values[k - 1]);
    const double d_before = std::abs(values[k - 1] - values[k - 2]);
    if (d_now <= 1e-9 * ref || d_now < 0.5 * d_before) ++shrinking;
  }
  return shrinking == 3;
}

}  // namespace

WeakL1Result weak_L1_stable_on_cone(const SemigroupProbe& probe, const WeakL1Options& options) {
  if (!probe.cone()) throw InvalidArgument("weak_L1_stable_on_cone: probe has no cone");
  const Matrix& a = probe.generator();
  const Matrix xs = probe.cone()->generators();
  const Matrix phis = dual_generators(*probe.cone());
  const EigenStructure es = eigen_structure(a);
  const bool exact = diagonalizable(es, options);
  if (!exact && !options.allow_fallback) {
    std::ostringstream os;
    os << "weak_L1_stable_on_cone: generator is numerically defective (eigenvector condition "
       << es.condition << ") and the fallback is disabled";
    throw NeedsFallbackError(os.str());
  }
  WeakL1Result result;
  result.exact = exact;
  for (Eigen::Index i = 0; i < phis.cols(); ++i) {
    for (Eigen::Index j = 0; j < xs.cols(); ++j) {
      const Vector phi = phis.col(i);
      const Vector x = xs.col(j);
      const bool ok = exact ? pairing_integrable(es, phi, x, options)
                            : pairing_integrable_fallback(a, phi, x);
      if (!ok) {
        result.stable = false;
        result.witness = WeakL1Witness{phi, x};
        return result;
      }
    }
  }
  return result;
}

DetectorCheck weak_detector_check(const SemigroupProbe& probe, const Vector& z,
                                  const WeakL1Options& options) {
  if (!probe.cone() || probe.cone()->kind() != ConeKind::orthant) {
    throw UnsupportedError("weak_detector_check: requires an orthant cone");
  }
  if (z.size() != probe.dim()) throw DimensionError("weak_detector_check: z has the wrong size");
  if (!cone_contains(*probe.cone(), z)) throw InvalidArgument("weak_detector_check: z must be positive");
  const EigenStructure es = eigen_structure(probe.generator());
  if (!diagonalizable(es, options)) {
    throw UnsupportedError("weak_detector_check: generator is not diagonalizable");
  }
  // For positive phi and z, <phi, T z> is a nonnegative combination of the
  // coordinate integrands, so unit functionals decide the quantifier over phi.
  const Eigen::Index n = probe.dim();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector phi = Vector::Unit(n, i);
    if (!pairing_integrable(es, phi, z, options)) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!pairing_integrable(es, phi, Vector::Unit(n, j), options)) {
        return {false, phi};
      }
    }
  }
  return {true, std::nullopt};
}

Matrix s_infinity(const SemigroupProbe& probe) {
  const Matrix& a = probe.generator();
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "s_infinity: generator is not exponentially stable (spectral abscissa " << abscissa << ")";
    throw NotStableError(os.str());
  }
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericalError("s_infinity: generator is singular");
  const Matrix s_inf = -lu.inverse();

  const double eps = -abscissa * (1.0 - kGrowthMargin);
  const Matrix long_run = integral_exp(a, 40.0 / eps);
  const double rel = (long_run - s_inf).norm() / std::max(s_inf.norm(), 1e-300);
  if (rel > 1e-6) {
    std::ostringstream os;
    os << "s_infinity: direct inverse and long-horizon integral disagree (relative " << rel << ")";
    throw NumericalError(os.str());
  }
  if (probe.cone()) {
    const auto check = map_preserves_cone(*probe.cone(), CoordinateMap{s_inf}, CheckMode::exact);
    if (!check.preserves) {
      throw InternalInconsistencyError("s_infinity: -A^{-1} of a stable positive semigroup is not positive");
    }
  }
  return s_inf;
}

double LemmaReport::max_algebraic() const {
  return std::max({as_identity, commutation, cesaro_identity, inner_commutation});
}

LemmaReport lemma_AS_suite(const Matrix& a, double t, double h) {
  require_square(a, "lemma_AS_suite");
  if (!(t > 0.0) || !(h > 0.0) || !(h < t)) {
    throw InvalidArgument("lemma_AS_suite: need t > 0 and 0 < h < t");
  }
  const Eigen::Index n = a.rows();
  const double root_n = std::sqrt(static_cast<double>(n));
  const Matrix id = Matrix::Identity(n, n);
  const Matrix tt = expm(a, t);
  const Matrix s = integral_exp(a, t);
  const Matrix c = cesaro_integral(a, t);
  const double na = a.norm();
  constexpr double tiny = 1e-300;

  LemmaReport r;
  const Matrix fd = (integral_exp(a, t + h) - integral_exp(a, t - h)) / (2.0 * h);
  // Floored at |I|: once T(t) has decayed, differencing S(t +- h) can only
  // resolve it down to eps |S(t)| / h.
  r.derivative = (fd - tt).norm() / std::max(tt.norm(), root_n);
  r.as_identity = (a * s - (tt - id)).norm() / (na * s.norm() + tt.norm() + root_n);
  r.commutation = (a * s - s * a).norm() / std::max(2.0 * na * s.norm(), tiny);
  r.cesaro_identity =
      (a * c - (s - t * id)).norm() / (na * c.norm() + s.norm() + t * root_n);
  r.inner_commutation = (a * c - c * a).norm() / std::max(2.0 * na * c.norm(), tiny);
  if (spectral_abscissa(a) < 0.0) {
    const Matrix s_inf = -a.fullPivLu().inverse();
    r.cesaro_limit = (c / t - s_inf).norm() / std::max(s_inf.norm(), tiny);
  }
  return r;
}

StabilityReport analyze_stability(const SemigroupProbe& probe, double horizon, int steps) {
  StabilityReport report;
  report.abscissa = spectral_abscissa(probe.generator());
  report.exponential = is_exponentially_stable(probe);
  report.l1_pi = report.exponential;
  if (report.exponential) {
    const double eps = -report.abscissa * (1.0 - kGrowthMargin);
    const double h = horizon > 0.0 ? horizon : std::min(20.0 / eps, 1e6);
    report.growth = growth_fit(probe.generator(), h, steps);
  }
  if (probe.cone()) {
    report.weak_l1 = weak_L1_stable_on_cone(probe);
    if (report.exponential && !report.weak_l1->stable) {
      throw InternalInconsistencyError(
          "analyze_stability: exponentially stable semigroup reported weakly L1 unstable");
    }
  }
  return report;
}

}  // namespace lyacert
