#include "lyacert/order_structures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "lyacert/errors.hpp"
#include "nnls.hpp"

namespace lyacert {

namespace {

constexpr double kAbsoluteFloor = 1e-12;

double threshold(double tol, const Matrix& x) {
  return std::max(tol, kAbsoluteFloor) * std::max(1.0, x.norm());
}

void check_element(const ConeSpec& cone, const Matrix& x, const char* what) {
  if (cone.is_vector_cone()) {
    if (x.cols() != 1 || x.rows() != cone.dim()) {
      std::ostringstream os;
      os << what << ": expected a vector of length " << cone.dim() << ", got " << x.rows() << "x"
         << x.cols();
      throw DimensionError(os.str());
    }
  } else {
    if (x.rows() != cone.dim() || x.cols() != cone.dim()) {
      std::ostringstream os;
      os << what << ": expected a symmetric " << cone.dim() << "x" << cone.dim()
         << " matrix, got " << x.rows() << "x" << x.cols();
      throw DimensionError(os.str());
    }
    require_symmetric(x, what);
  }
}

double distance_to_generated_cone(const Matrix& generators, const Vector& x) {
  return detail::nnls(generators, x).residual;
}

Eigen::SelfAdjointEigenSolver<Matrix> sym_eig(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(x));
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  return solver;
}

bool polyhedral_contains(const ConeSpec& cone, const Vector& x, double tol) {
  return distance_to_generated_cone(cone.generators(), x) <= threshold(tol, x);
}

}  // namespace

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::orthant:
      return "orthant";
    case ConeKind::psd:
      return "psd";
    case ConeKind::polyhedral:
      return "polyhedral";
  }
  return "unknown";
}

ConeSpec ConeSpec::orthant(Eigen::Index dim) {
  if (dim < 1) throw DimensionError("orthant: dimension must be >= 1");
  return ConeSpec(ConeKind::orthant, dim, Matrix::Identity(dim, dim));
}

ConeSpec ConeSpec::psd(Eigen::Index dim) {
  if (dim < 1) throw DimensionError("psd: dimension must be >= 1");
  return ConeSpec(ConeKind::psd, dim, Matrix());
}

ConeSpec ConeSpec::polyhedral(Matrix generators) {
  if (generators.rows() < 1 || generators.cols() < 1) {
    throw DimensionError("polyhedral: at least one generator is required");
  }
  require_finite(generators, "polyhedral generators");
  for (Eigen::Index j = 0; j < generators.cols(); ++j) {
    const Vector g = generators.col(j);
    if (g.norm() == 0.0) throw InvalidArgument("polyhedral: zero generator");
    if (distance_to_generated_cone(generators, -g) <= 1e-10 * g.norm()) {
      std::ostringstream os;
      os << "polyhedral: generators span a line (generator " << j << " and its negation)";
      throw InvalidArgument(os.str());
    }
  }
  const Eigen::Index dim = generators.rows();
  return ConeSpec(ConeKind::polyhedral, dim, std::move(generators));
}

const Matrix& ConeSpec::generators() const {
  if (kind_ == ConeKind::psd) throw UnsupportedError("the PSD cone has no finite generator set");
  return generators_;
}

bool cone_contains(const ConeSpec& cone, const Matrix& x, double tol) {
  check_element(cone, x, "cone_contains");
  switch (cone.kind()) {
    case ConeKind::orthant:
      return x.minCoeff() >= -threshold(tol, x);
    case ConeKind::psd:
      return min_eigenvalue(x) >= -threshold(tol, x);
    case ConeKind::polyhedral:
      return polyhedral_contains(cone, x.col(0), tol);
  }
  return false;
}

bool dual_cone_contains(const ConeSpec& cone, const Matrix& phi, double tol) {
  check_element(cone, phi, "dual_cone_contains");
  if (cone.kind() != ConeKind::polyhedral) return cone_contains(cone, phi, tol);
  const Matrix& g = cone.generators();
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    if (phi.col(0).dot(g.col(j)) < -threshold(tol, phi) * g.col(j).norm()) return false;
  }
  return true;
}

Matrix dual_generators(const ConeSpec& cone) {
  if (cone.kind() == ConeKind::orthant) return Matrix::Identity(cone.dim(), cone.dim());
  if (cone.kind() == ConeKind::psd) throw UnsupportedError("dual_generators: PSD cone");
  const Matrix& g = cone.generators();
  const Eigen::Index n = g.rows();
  Eigen::FullPivLU<Matrix> lu(g);
  if (lu.rank() < n) {
    throw UnsupportedError("dual_generators: cone is not full-dimensional");
  }
  if (n == 1) return Matrix::Constant(1, 1, g(0, 0) > 0 ? 1.0 : -1.0);

  // Facet normals: each (n-1)-subset of generators of rank n-1 defines a
  // hyperplane; it is a facet when every generator lies on one side.
  std::vector<Vector> normals;
  const Eigen::Index m = g.cols();
  std::vector<bool> pick(static_cast<std::size_t>(m), false);
  std::fill(pick.begin(), pick.begin() + (n - 1), true);
  const double tol = 1e-10;
  do {
    Matrix sub(n, n - 1);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (pick[static_cast<std::size_t>(j)]) sub.col(k++) = g.col(j).normalized();
    }
    Eigen::JacobiSVD<Matrix> svd(sub.transpose(), Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    if (sv[n - 2] <= tol * sv[0]) continue;
    Vector h = svd.matrixV().col(n - 1);
    Vector side = g.transpose() * h;
    for (Eigen::Index j = 0; j < m; ++j) side[j] /= g.col(j).norm();
    if (side.minCoeff() < -tol) {
      if (side.maxCoeff() > tol) continue;
      h = -h;
    }
    bool duplicate = false;
    for (const Vector& prior : normals) duplicate = duplicate || (prior - h).norm() < 1e-9;
    if (!duplicate) normals.push_back(h);
  } while (std::prev_permutation(pick.begin(), pick.end()));

  Matrix out(n, static_cast<Eigen::Index>(normals.size()));
  for (std::size_t k = 0; k < normals.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = normals[k];
  return out;
}

PmDecomposition decompose_pm(const ConeSpec& cone, const Matrix& phi) {
  check_element(cone, phi, "decompose_pm");
  switch (cone.kind()) {
    case ConeKind::orthant:
      return {phi.cwiseMax(0.0), (-phi).cwiseMax(0.0)};
    case ConeKind::psd: {
      const auto eig = sym_eig(phi);
      const Vector lambda = eig.eigenvalues();
      const Matrix& u = eig.eigenvectors();
      const Matrix plus = u * lambda.cwiseMax(0.0).asDiagonal() * u.transpose();
      const Matrix minus = u * (-lambda).cwiseMax(0.0).asDiagonal() * u.transpose();
      return {symmetrize(plus), symmetrize(minus)};
    }
    case ConeKind::polyhedral:
      throw UnsupportedError("decompose_pm: polyhedral cones are not decomposed");
  }
  throw UnsupportedError("decompose_pm: unknown cone");
}

bool is_order_unit(const ConeSpec& cone, const Matrix& e, double tol) {
  if (!cone_contains(cone, e, tol)) return false;
  const double floor = std::max(tol, kAbsoluteFloor);
  switch (cone.kind()) {
    case ConeKind::orthant:
      return e.minCoeff() >= floor;
    case ConeKind::psd:
      return min_eigenvalue(e) >= floor;
    case ConeKind::polyhedral: {
      // e is interior iff the generators span R^n and e - delta * s stays in
      // the cone for s the normalized generator sum.
      const Matrix& g = cone.generators();
      if (Eigen::FullPivLU<Matrix>(g).rank() < g.rows()) return false;
      Vector s = g.rowwise().sum();
      if (s.norm() == 0.0) return false;
      s.normalize();
      const double delta = floor * std::max(1.0, e.norm());
      return distance_to_generated_cone(g, e.col(0) - delta * s) <=
             kAbsoluteFloor * std::max(1.0, e.norm());
    }
  }
  return false;
}

OrderUnit OrderUnit::make(const ConeSpec& cone, Matrix e, double tol) {
  if (!is_order_unit(cone, e, tol)) {
    throw InvalidOrderUnitError("order unit must lie in the interior of the " +
                                to_string(cone.kind()) + " cone");
  }
  return OrderUnit(std::move(e));
}

double order_unit_norm(const ConeSpec& cone, const OrderUnit& unit, const Matrix& x) {
  check_element(cone, x, "order_unit_norm");
  const Matrix& e = unit.element();
  check_element(cone, e, "order_unit_norm");
  switch (cone.kind()) {
    case ConeKind::orthant:
      return x.cwiseAbs().cwiseQuotient(e).maxCoeff();
    case ConeKind::psd: {
      if (e.isIdentity(0.0)) return sym_eig(x).eigenvalues().cwiseAbs().maxCoeff();
      Eigen::LLT<Matrix> llt(symmetrize(e));
      if (llt.info() != Eigen::Success) throw InvalidOrderUnitError("order unit is not positive definite");
      const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(e.rows(), e.cols()));
      return sym_eig(l_inv * x * l_inv.transpose()).eigenvalues().cwiseAbs().maxCoeff();
    }
    case ConeKind::polyhedral: {
      const Vector ev = e.col(0);
      const Vector xv = x.col(0);
      if (xv.norm() == 0.0) return 0.0;
      auto feasible = [&](double lambda) {
        const Matrix& g = cone.generators();
        const double tol = kAbsoluteFloor * std::max(1.0, lambda * ev.norm() + xv.norm());
        return distance_to_generated_cone(g, lambda * ev - xv) <= tol &&
               distance_to_generated_cone(g, lambda * ev + xv) <= tol;
      };
      double hi = xv.norm() / ev.norm();
      int doublings = 0;
      while (!feasible(hi)) {
        hi *= 2.0;
        if (++doublings > 200) throw NumericalError("order_unit_norm: bracket search failed");
      }
      double lo = 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
      }
      return hi;
    }
  }
  return 0.0;
}

namespace {

Matrix random_cone_element(const ConeSpec& cone, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  const Eigen::Index n = cone.dim();
  switch (cone.kind()) {
    case ConeKind::orthant: {
      Vector x(n);
      // Mix interior points with sparse boundary points.
      const bool sparse = unit(rng) < 0.5;
      for (Eigen::Index i = 0; i < n; ++i) x[i] = (sparse && unit(rng) < 0.5) ? 0.0 : unit(rng);
      return x;
    }
    case ConeKind::psd: {
      const Eigen::Index rank = 1 + static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n));
      Matrix f(n, std::min(rank, n));
      for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = gauss(rng);
      return f * f.transpose();
    }
    case ConeKind::polyhedral: {
      const Matrix& g = cone.generators();
      Vector w(g.cols());
      for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = unit(rng) < 0.3 ? 0.0 : unit(rng);
      return g * w;
    }
  }
  return {};
}

Matrix apply_map(const ConeSpec& cone, const LinearMap& map, const Matrix& x) {
  if (const auto* cg = std::get_if<Congruence>(&map)) return cg->m.transpose() * x * cg->m;
  const Matrix& m = std::get<CoordinateMap>(map).m;
  if (cone.is_vector_cone()) return m * x;
  return smat(m * svec(x));
}

void check_map_shape(const ConeSpec& cone, const LinearMap& map) {
  if (const auto* cg = std::get_if<Congruence>(&map)) {
    if (cone.kind() != ConeKind::psd) {
      throw InvalidArgument("map_preserves_cone: congruence maps act on the PSD cone only");
    }
    if (cg->m.rows() != cone.dim() || cg->m.cols() != cone.dim()) {
      throw DimensionError("map_preserves_cone: congruence factor has the wrong shape");
    }
    return;
  }
  const Matrix& m = std::get<CoordinateMap>(map).m;
  const Eigen::Index d = cone.is_vector_cone() ? cone.dim() : sym_dim(cone.dim());
  if (m.rows() != d || m.cols() != d) {
    throw DimensionError("map_preserves_cone: map must be square on the cone's coordinates");
  }
}

}  // namespace

PositivityCheck map_preserves_cone(const ConeSpec& cone, const LinearMap& map, CheckMode mode,
                                   int samples, std::uint64_t seed, double tol) {
  check_map_shape(cone, map);
  if (std::holds_alternative<Congruence>(map)) return {true, true, std::nullopt};

  const Matrix& m = std::get<CoordinateMap>(map).m;
  if (mode == CheckMode::exact && cone.kind() == ConeKind::orthant) {
    const double floor = std::max(tol, kAbsoluteFloor) * std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, j) < -floor) {
          return {false, true, Matrix(Vector::Unit(m.cols(), j))};
        }
      }
    }
    return {true, true, std::nullopt};
  }
  if (mode == CheckMode::exact && cone.kind() == ConeKind::polyhedral) {
    const Matrix& g = cone.generators();
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (!polyhedral_contains(cone, m * g.col(j), tol)) return {false, true, Matrix(g.col(j))};
    }
    return {true, true, std::nullopt};
  }

  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Matrix x = random_cone_element(cone, rng);
    const Matrix y = apply_map(cone, map, x);
    if (!cone_contains(cone, y, tol)) return {false, false, x};
  }
  return {true, false, std::nullopt};
}

}  // namespace lyacert
