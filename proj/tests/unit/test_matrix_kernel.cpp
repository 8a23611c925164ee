#include <doctest.h>

#include <cmath>

#include "lyacert/errors.hpp"
#include "lyacert/matrix_kernel.hpp"
#include "support/oracles.hpp"

using namespace lyacert;
namespace lt = lyacert::testing;

TEST_CASE("expm closed forms") {
  Matrix a(2, 2);
  a << 0.3, -1.2, 2.0, 0.7;
  CHECK(expm(a, 0.0).isApprox(Matrix::Identity(2, 2), 0.0));

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << -1, -2;
  const Matrix ed = expm(d, 1.0);
  CHECK(ed(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(ed(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(std::abs(ed(0, 1)) < 1e-300);

  Matrix nil(2, 2);
  nil << 0, 1, 0, 0;
  for (double t : {0.5, 2.0, 7.0}) {
    Matrix expected(2, 2);
    expected << 1, t, 0, 1;
    CHECK(lt::rel(expm(nil, t), expected) < 1e-15);
  }
}

TEST_CASE("expm rejects bad input") {
  CHECK_THROWS_AS(expm(Matrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(expm(Matrix::Identity(2, 2), -1.0), InvalidArgument);
}

TEST_CASE("expm agrees with a Taylor oracle and obeys the semigroup law") {
  lt::Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.integer(1, 8);
    const Matrix a = rng.gaussian(n, n) / std::sqrt(n);
    const double s = rng.uniform(0, 5), t = rng.uniform(0, 5);
    const Matrix e = expm(a, s + t);
    CHECK((e - expm(a, s) * expm(a, t)).norm() <= 1e-9 * e.norm());
    CHECK(lt::rel(expm(a, t), lt::taylor_expm(a, t)) < 1e-11);
  }
}

TEST_CASE("integral_exp examples") {
  CHECK(lt::rel(integral_exp(Matrix::Zero(3, 3), 3.0), 3.0 * Matrix::Identity(3, 3)) < 1e-15);
  const Matrix minus = -Matrix::Identity(2, 2);
  CHECK(lt::rel(integral_exp(minus, 1.0), (1 - std::exp(-1.0)) * Matrix::Identity(2, 2)) < 1e-14);

  lt::Rng rng(3);
  const Matrix a = rng.gaussian(4, 4);
  const Matrix s = integral_exp(a, 1.3);
  CHECK((a * s - (expm(a, 1.3) - Matrix::Identity(4, 4))).norm() <= 1e-10 * expm(a, 1.3).norm());
}

TEST_CASE("integral_exp matches Simpson quadrature") {
  lt::Rng rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = rng.integer(1, 6);
    const Matrix a = rng.gaussian(n, n) / std::sqrt(n);
    const double t = rng.uniform(0.2, 3.0);
    CHECK(lt::rel(integral_exp(a, t), lt::quadrature_integral_exp(a, t, 600)) < 1e-8);
  }
}

TEST_CASE("integral_exp difference quotient approaches the exponential at first order") {
  lt::Rng rng(8);
  const Matrix a = rng.gaussian(4, 4);
  const double t = 0.7;
  const Matrix target = expm(a, t);
  double previous = kInf;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    const Matrix fd = (integral_exp(a, t + h) - integral_exp(a, t)) / h;
    const double err = (fd - target).norm();
    CHECK(err <= 10.0 * h * std::max(1.0, (a * target).norm()));
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("cesaro_integral examples and quadrature oracle") {
  CHECK(lt::rel(cesaro_integral(Matrix::Zero(2, 2), 2.0), 2.0 * Matrix::Identity(2, 2)) < 1e-15);
  CHECK(lt::rel(cesaro_integral(-Matrix::Identity(2, 2), 1.0), std::exp(-1.0) * Matrix::Identity(2, 2)) <
        1e-14);

  lt::Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.integer(1, 6);
    const Matrix a = rng.gaussian(n, n) / std::sqrt(n);
    const double t = rng.uniform(0.5, 2.0);
    const Matrix id = Matrix::Identity(n, n);
    const Matrix ainv = a.inverse();
    // S(tau) = A^{-1}(e^{tau A} - I), integrated by Simpson.
    const Matrix oracle = lt::simpson(
        [&](double tau) { return Matrix(ainv * (lt::taylor_expm(a, tau) - id)); }, 0.0, t, 2000);
    const Matrix c = cesaro_integral(a, t);
    CHECK(lt::rel(c, oracle) < 1e-8);
    CHECK((a * c - (integral_exp(a, t) - t * id)).norm() <= 1e-8 * std::max(1.0, c.norm()));
  }
}

TEST_CASE("spectral_abscissa examples") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << -1, -2;
  CHECK(spectral_abscissa(d) == doctest::Approx(-1.0));
  Matrix rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK(std::abs(spectral_abscissa(rot)) < 1e-14);
  Matrix companion(2, 2);
  companion << 0, 1, -2, -3;
  CHECK(spectral_abscissa(companion) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK_THROWS_AS(spectral_abscissa(Matrix::Zero(2, 1)), DimensionError);
}

TEST_CASE("growth_fit") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << -1, -2;
  const GrowthBound g = growth_fit(d, 20.0, 200);
  CHECK(g.eps == doctest::Approx(0.95));
  CHECK(g.m == doctest::Approx(1.0).epsilon(1e-12));

  Matrix jordan(2, 2);
  jordan << -1, 10, 0, -1;
  const GrowthBound gj = growth_fit(jordan, 40.0, 400);
  CHECK(gj.m > 1.0);
  // e^{tA} = e^{-t} [[1, 10t], [0, 1]], so the grid quantity is
  // sigma_max([[1, 10t], [0, 1]]) e^{-0.05 t}.
  double oracle = 1.0;
  for (int k = 0; k <= 400; ++k) {
    const double t = 40.0 * k / 400;
    const double b = 10.0 * t;
    const double smax = 0.5 * (std::sqrt(b * b + 4.0) + b);
    oracle = std::max(oracle, smax * std::exp(-0.05 * t));
  }
  CHECK(gj.m == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(gj.m == doctest::Approx(73.6).epsilon(2e-3));

  CHECK_THROWS_AS(growth_fit(Matrix::Zero(2, 2), 10.0, 10), NotStableError);
}

TEST_CASE("induced_norm exact cases") {
  const SpaceNorm one(1), two(2), inf(kInf);
  CHECK(induced_norm(Matrix::Identity(3, 3), two, two).upper == doctest::Approx(1.0));
  Matrix ones(2, 2);
  ones << 1, 1, 0, 0;
  const NormBound b = induced_norm(ones, one, one);
  CHECK(b.exact());
  CHECK(b.upper == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 3, 4;
  CHECK(induced_norm(d, two, two).upper == doctest::Approx(4.0));
  Matrix r(2, 3);
  r << 1, -2, 3, 0, 1, -1;
  CHECK(induced_norm(r, inf, inf).upper == doctest::Approx(6.0));
  CHECK(induced_norm(r, inf, inf).exact());
  CHECK(induced_norm(r, one, inf).upper == doctest::Approx(3.0));
  CHECK_THROWS_AS(SpaceNorm(0.5), InvalidArgument);
}

TEST_CASE("induced_norm 2->2 is the largest singular value; other p give intervals") {
  lt::Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix m = rng.gaussian(rng.integer(1, 6), rng.integer(1, 6));
    const double smax = Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
    CHECK(std::abs(induced_norm(m, SpaceNorm(2), SpaceNorm(2)).upper - smax) <= 1e-12 * smax);
    const NormBound b = induced_norm(m, SpaceNorm(3), SpaceNorm(1.5));
    CHECK(b.lower <= b.upper * (1 + 1e-12));
    CHECK(b.lower > 0.0);
  }
}

TEST_CASE("nuclear_norm examples and norm axioms") {
  Vector x(2), y(2);
  x << 3, 4;
  y << 1, 0;
  CHECK(nuclear_norm(x * y.transpose()) == doctest::Approx(5.0));
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2, 3;
  CHECK(nuclear_norm(d) == doctest::Approx(5.0));
  CHECK(nuclear_norm(Matrix::Identity(4, 4)) == doctest::Approx(4.0));

  lt::Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = rng.integer(1, 5), c = rng.integer(1, 5);
    const Matrix a = rng.gaussian(r, c), b = rng.gaussian(r, c);
    const double s = rng.normal();
    CHECK(nuclear_norm(a + b) <= nuclear_norm(a) + nuclear_norm(b) + 1e-10);
    CHECK(std::abs(nuclear_norm(s * a) - std::abs(s) * nuclear_norm(a)) <= 1e-10 * nuclear_norm(a));
  }
}

TEST_CASE("svec is an isometry onto symmetric coordinates") {
  lt::Rng rng(6);
  for (int n = 1; n <= 5; ++n) {
    const Matrix a = rng.symmetric(n), b = rng.symmetric(n);
    CHECK(svec(a).size() == sym_dim(n));
    CHECK(svec(a).dot(svec(b)) == doctest::Approx((a * b).trace()).epsilon(1e-13));
    CHECK(lt::rel(smat(svec(a)), a) < 1e-15);
  }
  CHECK_THROWS_AS(svec(Matrix::Zero(2, 3)), DimensionError);
}
