#pragma once

// Independent reference computations and seeded instance generators for the
// test suites. Nothing here calls into the library's numerics.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

namespace lyacert::testing {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return gauss_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Mat gaussian(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal();
    return m;
  }
  Vec gaussian(Eigen::Index n) { return gaussian(n, 1).col(0); }

  Mat orthogonal(Eigen::Index n) {
    Eigen::HouseholderQR<Mat> qr(gaussian(n, n));
    return qr.householderQ() * Mat::Identity(n, n);
  }

  Mat symmetric(Eigen::Index n) {
    const Mat g = gaussian(n, n);
    return 0.5 * (g + g.transpose());
  }

  Mat psd(Eigen::Index n, Eigen::Index rank = -1) {
    const Mat g = gaussian(n, rank < 0 ? n : rank);
    const Mat p = g * g.transpose();
    return 0.5 * (p + p.transpose());
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_;
};

/// Real block-diagonal matrix whose eigenvalues have the given real parts,
/// in random orthogonal coordinates. Pairs of slots become 2x2 rotation
/// blocks with probability 1/2.
inline Mat with_real_parts(Rng& rng, const Vec& re, bool allow_complex = true) {
  const Eigen::Index n = re.size();
  Mat d = Mat::Zero(n, n);
  Eigen::Index k = 0;
  while (k < n) {
    if (allow_complex && k + 1 < n && rng.uniform(0, 1) < 0.5) {
      const double w = rng.uniform(0.2, 2.0);
      d(k, k) = re[k];
      d(k + 1, k + 1) = re[k];
      d(k, k + 1) = w;
      d(k + 1, k) = -w;
      k += 2;
    } else {
      d(k, k) = re[k];
      ++k;
    }
  }
  // Mild non-normality.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (d(i, j) == 0.0 && !(j == i + 1 && d(j, i) != 0.0)) d(i, j) = 0.3 * rng.normal();
    }
  }
  const Mat u = rng.orthogonal(n);
  return u * d * u.transpose();
}

/// Stable A with spectral abscissa in [-2, -0.1].
inline Mat random_stable(Rng& rng, Eigen::Index n) {
  Vec re(n);
  for (Eigen::Index i = 0; i < n; ++i) re[i] = -rng.uniform(0.1, 2.0);
  return with_real_parts(rng, re);
}

/// A with at least one eigenvalue of real part >= min_unstable.
inline Mat random_unstable(Rng& rng, Eigen::Index n, double min_unstable = 0.05) {
  Vec re(n);
  for (Eigen::Index i = 0; i < n; ++i) re[i] = rng.uniform(-2.0, 2.0);
  re[0] = rng.uniform(min_unstable, 2.0);
  if (n > 1) re[1] = re[0];  // a possible complex pair keeps the same real part
  return with_real_parts(rng, re);
}

struct Pair {
  Mat a;
  Mat c;
};

/// Generic C: observable almost surely, hence detectable.
inline Pair random_observed(Rng& rng, const Mat& a, Eigen::Index m) {
  return {a, rng.gaussian(m, a.rows())};
}

/// Block-triangular construction x = (observed, hidden) with the hidden block
/// stable or not, then an orthogonal change of coordinates.
inline Pair constructed_pair(Rng& rng, Eigen::Index n, Eigen::Index hidden, Eigen::Index m,
                             bool hidden_stable) {
  const Eigen::Index seen = n - hidden;
  Mat a = Mat::Zero(n, n);
  Vec re_seen(seen);
  for (Eigen::Index i = 0; i < seen; ++i) re_seen[i] = rng.uniform(-2.0, 2.0);
  Vec re_hidden(hidden);
  for (Eigen::Index i = 0; i < hidden; ++i) {
    re_hidden[i] = hidden_stable ? -rng.uniform(0.2, 2.0) : rng.uniform(-2.0, 2.0);
  }
  if (!hidden_stable && hidden > 0) re_hidden[0] = rng.uniform(0.1, 2.0);
  if (seen > 0) a.topLeftCorner(seen, seen) = with_real_parts(rng, re_seen);
  a.bottomRightCorner(hidden, hidden) = with_real_parts(rng, re_hidden);
  // Hidden states may feed nothing observed; observed states may drive hidden ones.
  a.bottomLeftCorner(hidden, seen) = 0.5 * rng.gaussian(hidden, seen);
  Mat c = Mat::Zero(m, n);
  if (seen > 0) c.leftCols(seen) = rng.gaussian(m, seen);
  const Mat u = rng.orthogonal(n);
  return {u * a * u.transpose(), c * u.transpose()};
}

/// Stable Metzler matrix: nonnegative off-diagonal, diagonally dominant.
inline Mat random_stable_metzler(Rng& rng, Eigen::Index n) {
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      a(i, j) = rng.uniform(0.0, 1.0);
      row += a(i, j);
    }
    a(i, i) = -row - rng.uniform(0.1, 1.0);
  }
  return a;
}

/// e^{tA} by Taylor series with scaling and squaring.
inline Mat taylor_expm(const Mat& a, double t = 1.0) {
  const Mat at = a * t;
  const double norm = at.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  const Mat x = at * scale;
  Mat term = Mat::Identity(a.rows(), a.cols());
  Mat sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Composite Simpson rule for a matrix-valued integrand on [lo, hi].
inline Mat simpson(const std::function<Mat(double)>& f, double lo, double hi, int panels) {
  if (panels % 2) ++panels;
  const double h = (hi - lo) / panels;
  Mat sum = f(lo) + f(hi);
  for (int k = 1; k < panels; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
  return sum * (h / 3.0);
}

/// int_0^t e^{sA} ds by Simpson on Taylor exponentials.
inline Mat quadrature_integral_exp(const Mat& a, double t, int panels = 400) {
  return simpson([&](double s) { return taylor_expm(a, s); }, 0.0, t, panels);
}

/// Lyapunov solution by Kronecker vectorization: (I (x) A^T + A^T (x) I) vec P = -vec Q.
inline Mat kronecker_lyapunov(const Mat& a, const Mat& q) {
  const Eigen::Index n = a.rows();
  Mat k = Mat::Zero(n * n, n * n);
  const Mat at = a.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // vec index of P(r, c) is c * n + r.
      for (Eigen::Index r = 0; r < n; ++r) {
        k(i * n + r, i * n + j) += at(r, j);  // (A^T P)(r, i) block
        k(i * n + r, j * n + r) += a(j, i);   // (P A)(r, i)
      }
    }
  }
  const Eigen::Map<const Vec> qv(q.data(), n * n);
  const Vec pv = k.fullPivLu().solve(-qv);
  Mat p = Eigen::Map<const Mat>(pv.data(), n, n);
  return 0.5 * (p + p.transpose());
}

/// Max over sign matrices S of <S, rho>: the dual side of the l1 projective
/// norm, enumerated outright (n <= 3).
inline double sign_enumeration_l1(const Mat& rho) {
  const int cells = static_cast<int>(rho.size());
  double best = -1.0;
  for (long mask = 0; mask < (1L << cells); ++mask) {
    double v = 0.0;
    for (int k = 0; k < cells; ++k) v += ((mask >> k) & 1 ? 1.0 : -1.0) * rho.data()[k];
    best = std::max(best, v);
  }
  return best;
}

/// sum_ij |rho_ij| ||e_i||_1 ||e_j||_1 from the elementary decomposition.
inline double elementary_decomposition_l1(const Mat& rho) { return rho.cwiseAbs().sum(); }

/// Largest absolute eigenvalue of a symmetric matrix via its characteristic
/// spectrum from a Jacobi sweep, independent of the library's eigensolvers.
inline double jacobi_spectral_radius(Mat s) {
  const Eigen::Index n = s.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
    }
  }
  return s.diagonal().cwiseAbs().maxCoeff();
}

inline double rel(const Mat& x, const Mat& y) {
  return (x - y).norm() / std::max({1.0, x.norm(), y.norm()});
}

}  // namespace lyacert::testing
