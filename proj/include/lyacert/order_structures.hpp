#pragma once

// Closed proper cones, their duals, order units and positivity of linear maps.
//
// Cone elements are carried as matrices: vector cones (orthant, polyhedral)
// take dim x 1 columns, the PSD cone takes symmetric dim x dim matrices.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "lyacert/matrix_kernel.hpp"

namespace lyacert {

enum class ConeKind { orthant, psd, polyhedral };

std::string to_string(ConeKind kind);

class ConeSpec {
 public:
  static ConeSpec orthant(Eigen::Index dim);
  static ConeSpec psd(Eigen::Index dim);
  /// Cone generated by the columns of `generators`. Throws InvalidArgument
  /// unless the cone is pointed (contains no line).
  static ConeSpec polyhedral(Matrix generators);

  ConeKind kind() const { return kind_; }
  /// n for orthant/polyhedral on R^n, and for PSD on Sym(n).
  Eigen::Index dim() const { return dim_; }
  bool is_vector_cone() const { return kind_ != ConeKind::psd; }
  /// Extreme rays as columns. Identity for the orthant; undefined for PSD.
  const Matrix& generators() const;

  friend bool operator==(const ConeSpec& a, const ConeSpec& b) {
    return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.generators_ == b.generators_;
  }

 private:
  ConeSpec(ConeKind kind, Eigen::Index dim, Matrix generators)
      : kind_(kind), dim_(dim), generators_(std::move(generators)) {}

  ConeKind kind_;
  Eigen::Index dim_;
  Matrix generators_;
};

/// Membership with relative tolerance tol * max(1, ||x||) (floor 1e-12).
bool cone_contains(const ConeSpec& cone, const Matrix& x, double tol = 1e-9);

/// Membership of phi in the dual cone under the standard pairing.
bool dual_cone_contains(const ConeSpec& cone, const Matrix& phi, double tol = 1e-9);

/// Extreme rays of the dual of a full-dimensional vector cone, as columns.
Matrix dual_generators(const ConeSpec& cone);

struct PmDecomposition {
  Matrix plus;
  Matrix minus;
};

/// phi = plus - minus with both parts in the dual cone. Orthant and PSD only.
PmDecomposition decompose_pm(const ConeSpec& cone, const Matrix& phi);

bool is_order_unit(const ConeSpec& cone, const Matrix& e, double tol = 1e-9);

/// An interior point of a cone, validated on construction.
class OrderUnit {
 public:
  /// Throws InvalidOrderUnitError when e is not interior to the cone.
  static OrderUnit make(const ConeSpec& cone, Matrix e, double tol = 1e-9);

  const Matrix& element() const { return e_; }

 private:
  explicit OrderUnit(Matrix e) : e_(std::move(e)) {}
  Matrix e_;
};

/// inf { lambda > 0 : -lambda e <= x <= lambda e }.
double order_unit_norm(const ConeSpec& cone, const OrderUnit& unit, const Matrix& x);

/// x -> m x on vector cones, svec(P) -> m svec(P) on the PSD cone.
struct CoordinateMap {
  Matrix m;
};

/// P -> m^T P m on symmetric matrices.
struct Congruence {
  Matrix m;
};

using LinearMap = std::variant<CoordinateMap, Congruence>;

enum class CheckMode { exact, randomized };

struct PositivityCheck {
  bool preserves = true;
  /// False when the verdict only means "no counterexample found".
  bool exact = true;
  std::optional<Matrix> witness;
};

PositivityCheck map_preserves_cone(const ConeSpec& cone, const LinearMap& map, CheckMode mode,
                                   int samples = 256, std::uint64_t seed = 0,
                                   double tol = 1e-9);

}  // namespace lyacert
