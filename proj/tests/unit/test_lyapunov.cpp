#include <doctest.h>

#include <cmath>

#include "lyacert/errors.hpp"
#include "lyacert/lyapunov.hpp"
#include "support/oracles.hpp"

using namespace lyacert;
namespace lt = lyacert::testing;

namespace {
Matrix m22(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}
}  // namespace

TEST_CASE("lyap_apply") {
  CHECK(lt::rel(lyap_apply(-0.5 * Matrix::Identity(3, 3), Matrix::Identity(3, 3)), -Matrix::Identity(3, 3)) ==
        0.0);
  CHECK(lt::rel(lyap_apply(m22(0, 1, 0, 0), Matrix::Identity(2, 2)), m22(0, 1, 1, 0)) == 0.0);
  CHECK_THROWS_AS(lyap_apply(Matrix::Identity(2, 2), m22(0, 1, 0, 0)), SymmetryError);
}

TEST_CASE("lifts agree with the direct action") {
  lt::Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.integer(1, 6);
    const Matrix a = rng.gaussian(n, n);
    const Matrix p = rng.symmetric(n);
    const LyapunovOperator op(a);
    const Matrix direct = a.transpose() * p + p * a;
    const double scale = std::max(1.0, a.norm() * p.norm());
    CHECK((op.apply(p) - direct).norm() <= 1e-12 * scale);
    CHECK((smat(op.sym_lift() * svec(p)) - direct).norm() <= 1e-12 * scale);
    const Eigen::Map<const Vector> vp(p.data(), n * n);
    const Vector kv = op.kron_lift() * vp;
    CHECK((Eigen::Map<const Matrix>(kv.data(), n, n) - direct).norm() <= 1e-12 * scale);
  }
}

TEST_CASE("implemented and tensor semigroups") {
  lt::Rng rng(22);
  const Matrix a = rng.gaussian(3, 3), v = rng.gaussian(3, 3);
  const Matrix p = rng.symmetric(3);
  CHECK(lt::rel(implemented_apply(a, v, 0.0, p), p) == 0.0);
  CHECK(lt::rel(implemented_apply(-Matrix::Identity(2, 2), -Matrix::Identity(2, 2), 1.0, Matrix::Identity(2, 2)),
                std::exp(-2.0) * Matrix::Identity(2, 2)) < 1e-15);
  const Matrix psd = rng.psd(3);
  CHECK(min_eigenvalue(implemented_apply(a, a, 0.7, psd)) >= -1e-12 * psd.norm());

  const Vector x = rng.gaussian(3), y = rng.gaussian(3);
  const Tensor2 mono = Tensor2::monomial(x, y);
  const Tensor2 moved = tensor_semigroup_apply(a, v, 0.8, mono);
  CHECK(lt::rel(moved.coeffs(), (expm(a, 0.8) * x) * (expm(v, 0.8) * y).transpose()) < 1e-14);
  CHECK(lt::rel(tensor_semigroup_apply(a, v, 0.0, mono).coeffs(), mono.coeffs()) == 0.0);
  const Tensor2 sym(rng.symmetric(3), true);
  CHECK(tensor_semigroup_apply(a, a, 1.0, sym).symmetric());
}

TEST_CASE("pairing") {
  lt::Rng rng(23);
  const Vector x = rng.gaussian(3), y = rng.gaussian(3);
  CHECK(pairing(Matrix::Identity(3, 3), Tensor2::monomial(x, y)) == doctest::Approx(x.dot(y)));
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 1, 2;
  CHECK(pairing(d, Tensor2::monomial(Vector::Unit(2, 1), Vector::Unit(2, 1))) == doctest::Approx(2.0));
  const Matrix p = rng.gaussian(3, 3);
  CHECK(pairing(p, Tensor2::monomial(x, y)) == doctest::Approx(y.dot(p * x)).epsilon(1e-13));
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix r1 = rng.gaussian(3, 3), r2 = rng.gaussian(3, 3);
    const double s = rng.normal();
    const double lhs = pairing(p, Tensor2(r1 + s * r2));
    const double rhs = pairing(p, Tensor2(r1)) + s * pairing(p, Tensor2(r2));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("projective_norm") {
  lt::Rng rng(24);
  const Vector x = rng.gaussian(4), y = rng.gaussian(4);
  const NormBound r1 = projective_norm(Tensor2::monomial(x, y));
  CHECK(r1.exact());
  CHECK(r1.upper == doctest::Approx(x.norm() * y.norm()).epsilon(1e-14));
  const NormBound e1 = projective_norm(Tensor2(m22(1, -2, 0, 3), false, 1.0));
  CHECK(e1.exact());
  CHECK(e1.upper == 6.0);
  CHECK(projective_norm(Tensor2(Matrix::Identity(3, 3), true)).upper == doctest::Approx(3.0));

  for (int trial = 0; trial < 30; ++trial) {
    const Matrix c = rng.gaussian(3, 3);
    const NormBound b = projective_norm(Tensor2(c, false, 3.0));
    CHECK(b.lower <= b.upper * (1 + 1e-12));
    // pi-norm dominance against the induced norm for p = 2.
    const Matrix p = rng.gaussian(3, 3);
    const double bound = induced_norm(p, SpaceNorm(2), SpaceNorm(2)).upper * projective_norm(Tensor2(c)).upper;
    CHECK(std::abs(pairing(p, Tensor2(c))) <= bound + 1e-10);
  }
  // Rank-one tensors are exact for every p.
  const NormBound mono3 = projective_norm(Tensor2::monomial(x, y, 3.0));
  CHECK(mono3.upper == doctest::Approx(SpaceNorm(3)(x) * SpaceNorm(3)(y)).epsilon(1e-12));
}

TEST_CASE("symmetric_project and grothendieck_decompose") {
  const Tensor2 s(m22(1, 2, 2, 3), true);
  CHECK(lt::rel(symmetric_project(s).coeffs(), s.coeffs()) == 0.0);
  const Tensor2 e12 = Tensor2::monomial(Vector::Unit(2, 0), Vector::Unit(2, 1));
  const Tensor2 pe = symmetric_project(e12);
  CHECK(pe.symmetric());
  CHECK(lt::rel(pe.coeffs(), m22(0, 0.5, 0.5, 0)) == 0.0);
  CHECK(lt::rel(symmetric_project(pe).coeffs(), pe.coeffs()) <= 1e-15);

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2, -1;
  const auto terms = grothendieck_decompose(Tensor2(d, true));
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].weight == doctest::Approx(2.0));
  CHECK(std::abs(std::abs(terms[0].direction[0]) - 1.0) < 1e-15);
  CHECK(terms[1].weight == doctest::Approx(-1.0));
  CHECK(std::abs(std::abs(terms[1].direction[1]) - 1.0) < 1e-15);

  lt::Rng rng(25);
  const TensorSplit psd = split_pm(Tensor2(rng.psd(4), true));
  CHECK(psd.minus.coeffs().norm() <= 1e-12 * psd.plus.coeffs().norm());
  CHECK_THROWS_AS(grothendieck_decompose(Tensor2(m22(0, 1, 0, 0))), SymmetryError);
}

TEST_CASE("rkhs_factor") {
  const Matrix ci = rkhs_factor(Matrix::Identity(3, 3));
  CHECK(lt::rel(ci.transpose() * ci, Matrix::Identity(3, 3)) < 1e-15);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4;
  const Matrix cd = rkhs_factor(d);
  REQUIRE(cd.rows() == 1);
  CHECK(std::abs(cd(0, 0)) == doctest::Approx(2.0));
  CHECK(std::abs(cd(0, 1)) < 1e-15);

  lt::Rng rng(26);
  const Vector x = rng.gaussian(4);
  const Matrix cx = rkhs_factor(x * x.transpose());
  REQUIRE(cx.rows() == 1);
  CHECK(lt::rel(cx.transpose() * cx, x * x.transpose()) < 1e-14);

  const Matrix q = rng.psd(5, 3);
  const Matrix c = rkhs_factor(q);
  CHECK(c.rows() == 3);
  CHECK((c.transpose() * c - q).norm() <= 5 * 1e-12 * q.norm() + 1e-13);

  CHECK(rkhs_factor(Matrix::Zero(3, 3)).rows() == 1);
  CHECK_THROWS_AS(rkhs_factor(m22(1, 0, 0, -1)), NotPsdError);
}

TEST_CASE("lyap_solve_direct") {
  const LyapunovSolution s = lyap_solve_direct(-0.5 * Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  CHECK(lt::rel(s.p, Matrix::Identity(3, 3)) < 1e-15);

  const Matrix a = m22(0, 1, -2, -3);
  const LyapunovSolution c = lyap_solve_direct(a, Matrix::Identity(2, 2));
  CHECK(lt::rel(c.p, m22(1.25, 0.25, 0.25, 0.25)) < 1e-14);
  CHECK(lt::rel(c.p, lt::kronecker_lyapunov(a, Matrix::Identity(2, 2))) < 1e-13);

  const LyapunovSolution scalar = lyap_solve_direct(Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1));
  CHECK(scalar.p(0, 0) == 0.0);

  try {
    lyap_solve_direct(m22(0, 1, -1, 0), Matrix::Identity(2, 2));
    FAIL("resonant spectrum accepted");
  } catch (const SingularSystemError& e) {
    CHECK(std::abs(e.first() + e.second()) < 1e-12);
  }

  lt::Rng rng(27);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.integer(1, 7);
    const Matrix ar = lt::random_stable(rng, n);
    const Matrix q = rng.psd(n);
    const LyapunovSolution r = lyap_solve_direct(ar, q);
    CHECK((ar.transpose() * r.p + r.p * ar + q).norm() <= 1e-8 * q.norm());
    CHECK(lt::rel(r.p, lt::kronecker_lyapunov(ar, q)) < 1e-9);
  }
}

TEST_CASE("lyap_solve_integral") {
  const IntegralSolution s = lyap_solve_integral(-0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(lt::rel(s.solution.p, Matrix::Identity(2, 2)) < 1e-11);
  CHECK(s.monotone);
  CHECK(s.step == doctest::Approx(0.5 / 1.5));

  lt::Rng rng(28);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = rng.integer(1, 6);
    const Matrix a = lt::random_stable(rng, n);
    const IntegralSolution r = lyap_solve_integral(a, rng.psd(n));
    REQUIRE(r.direct_agreement.has_value());
    CHECK(*r.direct_agreement <= 1e-6);
    CHECK(r.worst_increment >= -1e-12);
  }
  CHECK_THROWS_AS(lyap_solve_integral(Matrix::Constant(1, 1, 1.0), Matrix::Identity(1, 1)), DivergenceError);
}

TEST_CASE("gramian") {
  CHECK(lt::rel(gramian(Matrix::Zero(2, 2), Matrix::Identity(2, 2), 2.0), 2.0 * Matrix::Identity(2, 2)) < 1e-15);
  lt::Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.integer(1, 5);
    const Matrix a = rng.gaussian(n, n) / std::sqrt(n);
    const Matrix q = rng.psd(n);
    const double s = rng.uniform(0.1, 2), t = rng.uniform(0.1, 2);
    const Matrix ws = gramian(a, q, s), wt = gramian(a, q, t), wst = gramian(a, q, s + t);
    const Matrix es = expm(a, s);
    CHECK((wst - (ws + es.transpose() * wt * es)).norm() <= 1e-9 * wst.norm());
    const Matrix oracle = lt::simpson(
        [&](double u) {
          const Matrix e = lt::taylor_expm(a, u);
          return Matrix(e.transpose() * q * e);
        },
        0.0, t, 400);
    CHECK(lt::rel(wt, oracle) < 1e-8);
  }
}

TEST_CASE("s_infinity_operator") {
  const SymOperator id = s_infinity_operator(-0.5 * Matrix::Identity(3, 3));
  CHECK(lt::rel(id.coords, Matrix::Identity(6, 6)) < 1e-15);
  CHECK(id.positive_on_psd_basis);

  const Matrix a = m22(0, 1, -2, -3);
  CHECK(lt::rel(s_infinity_operator(a).apply(Matrix::Identity(2, 2)), m22(1.25, 0.25, 0.25, 0.25)) < 1e-14);

  const SymOperator scalar = s_infinity_operator(Matrix::Constant(1, 1, 1.0));
  CHECK(scalar.coords(0, 0) == doctest::Approx(-0.5));
  CHECK_FALSE(scalar.positive_on_psd_basis);
  CHECK_THROWS_AS(s_infinity_operator(m22(0, 1, -1, 0)), SingularSystemError);
}
