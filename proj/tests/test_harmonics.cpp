#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "needlets/error.hpp"
#include "needlets/harmonics.hpp"
#include "needlets/rng.hpp"

using namespace needlets;
constexpr double pi = std::numbers::pi;

TEST_CASE("legendre polynomials") {
  for (double t : {-1.0, -0.3, 0.0, 0.8}) CHECK(legendre_p(0, t) == 1.0);
  for (int l = 0; l <= 64; ++l) CHECK(legendre_p(l, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(legendre_p(2, 0.0) == doctest::Approx(-0.5));
  for (int l : {1, 5, 17, 60})
    for (double t : {-0.99, -0.2, 0.35, 0.97})
      CHECK(legendre_p(l, t) == doctest::Approx(boost::math::legendre_p(l, t)).epsilon(1e-12).scale(1.0));
  CHECK_THROWS_AS(legendre_p(3, 1.01), ValidationError);
  CHECK_THROWS_AS(legendre_p(-1, 0.5), ValidationError);
}

TEST_CASE("reproducing kernel") {
  CHECK(kernel_L(0, 0.3) == doctest::Approx(1.0 / (4 * pi)));
  for (int l : {1, 4, 9}) CHECK(kernel_L(l, 1.0) == doctest::Approx((2 * l + 1) / (4 * pi)));
  SplitMix64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto x = random_unit_point(rng), y = random_unit_point(rng);
    std::complex<double> s = 0;
    for (int m = -3; m <= 3; ++m) s += eval_ylm(3, m, x) * std::conj(eval_ylm(3, m, y));
    CHECK(s.real() == doctest::Approx(kernel_L(3, x.dot(y))).epsilon(1e-12).scale(1.0));
    CHECK(std::abs(s.imag()) < 1e-13);
  }
}

TEST_CASE("spherical harmonics against closed forms and an independent implementation") {
  SplitMix64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_unit_point(rng);
    CHECK(eval_ylm(0, 0, p).real() == doctest::Approx(1.0 / std::sqrt(4 * pi)));
    CHECK(eval_ylm(1, 0, p).real() == doctest::Approx(std::sqrt(3 / (4 * pi)) * p.z).scale(1.0));
  }
  for (int i = 0; i < 30; ++i) {
    const auto p = random_unit_point(rng);
    for (int l : {2, 7, 20, 40}) {
      for (int m = -l; m <= l; m += std::max(1, l / 5)) {
        const auto ref = boost::math::spherical_harmonic(l, m, p.colatitude(), p.longitude());
        const auto got = eval_ylm(l, m, p);
        CHECK(std::abs(got - ref) < 1e-11);
      }
    }
  }
  // Near the pole only m = 0 survives at leading order.
  const auto pole = UnitPoint::from_angles(1e-8, 0.4);
  CHECK(eval_ylm(30, 0, pole).real() == doctest::Approx(std::sqrt(61 / (4 * pi))).epsilon(1e-10));
  CHECK(std::abs(eval_ylm(30, 5, pole)) < 1e-30);
  // High degree stays finite and normalised: sum_m |Y_lm|^2 = (2l+1)/(4 pi).
  const auto q = UnitPoint::from_angles(0.013, 2.0);
  double s = 0.0;
  for (int m = -400; m <= 400; ++m) s += std::norm(eval_ylm(400, m, q));
  CHECK(s == doctest::Approx(801 / (4 * pi)).epsilon(1e-10));
}

TEST_CASE("real harmonics packing") {
  const auto p = UnitPoint::from_angles(1.1, -2.3);
  std::vector<double> out(36);
  real_harmonics(5, p, out);
  for (int l = 0; l <= 5; ++l) {
    CHECK(out[l * l + l] == doctest::Approx(eval_ylm(l, 0, p).real()));
    for (int m = 1; m <= l; ++m) {
      CHECK(out[l * l + l + m] == doctest::Approx(std::sqrt(2.0) * eval_ylm(l, m, p).real()));
      CHECK(out[l * l + l - m] == doctest::Approx(std::sqrt(2.0) * eval_ylm(l, m, p).imag()));
    }
  }
}

TEST_CASE("orthonormality through an exact product grid") {
  const auto grid = product_grid_for_degree(16);
  const int L = 8;
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m)
      for (int l2 = 0; l2 <= L; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2) {
          std::complex<double> s = 0;
          for (std::size_t k = 0; k < grid.points.size(); ++k)
            s += grid.weights[k] * eval_ylm(l, m, grid.points[k]) * std::conj(eval_ylm(l2, m2, grid.points[k]));
          const double expect = (l == l2 && m == m2) ? 1.0 : 0.0;
          CHECK(std::abs(s - expect) < 1e-12);
        }
}

TEST_CASE("gauss-legendre and split grid") {
  const auto gl = gauss_legendre(6);
  double s = 0.0, s10 = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    s += gl.weights[i];
    s10 += gl.weights[i] * std::pow(gl.nodes[i], 10);
  }
  CHECK(s == doctest::Approx(2.0));
  CHECK(s10 == doctest::Approx(2.0 / 11.0));
  // sign(z) z^2 Y_00 integrates to zero; |z| integrates to 2 pi.
  const auto grid = split_product_grid_for_degree(10);
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < grid.points.size(); ++k) {
    const double z = grid.points[k].z;
    a += grid.weights[k] * std::abs(z);
    b += grid.weights[k] * (z > 0 ? 1.0 : -1.0) * z * z;
  }
  CHECK(a == doctest::Approx(2 * pi));
  CHECK(std::abs(b) < 1e-13);
}
