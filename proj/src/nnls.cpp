#include "nnls.hpp"

#include <algorithm>
#include <vector>

namespace lyacert::detail {

namespace {

Vector solve_passive(const Matrix& g, const Vector& b, const std::vector<bool>& passive) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
  }
  Vector s = Vector::Zero(g.cols());
  if (idx.empty()) return s;
  Matrix sub(g.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = g.col(idx[k]);
  const Vector z = sub.completeOrthogonalDecomposition().solve(b);
  for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = z[static_cast<Eigen::Index>(k)];
  return s;
}

}  // namespace

NnlsResult nnls(const Matrix& g, const Vector& b) {
  const Eigen::Index n = g.cols();
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Vector x = Vector::Zero(n);
  const double tol = 10.0 * Eigen::NumTraits<double>::epsilon() *
                     std::max(1.0, g.norm()) * std::max(1.0, b.norm()) *
                     static_cast<double>(std::max<Eigen::Index>(n, 1));
  const int max_outer = static_cast<int>(3 * n + 10);
  for (int outer = 0; outer < max_outer; ++outer) {
    const Vector w = g.transpose() * (b - g * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_outer; ++inner) {
      const Vector s = solve_passive(g, b, passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) feasible = false;
      }
      if (feasible) {
        x = s;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
          alpha = std::min(alpha, x[j] / (x[j] - s[j]));
        }
      }
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return {x, (g * x - b).norm()};
}

}  // namespace lyacert::detail
