#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "needlets/harmonics.hpp"
#include "needlets/kernels.hpp"
#include "needlets/rng.hpp"

using namespace needlets;
using namespace needlets::kernels;

namespace {

std::vector<UnitPoint> test_points(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<UnitPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_unit_point(rng));
  // poles and near-pole points exercise the flushed seeds
  pts.push_back(kNorthPole);
  pts.push_back(kSouthPole);
  pts.push_back(UnitPoint::from_angles(1e-7, 0.3));
  pts.push_back(UnitPoint::from_angles(3.14159, -1.0));
  return pts;
}

struct Coeffs {
  std::vector<double> re, im;
};

Coeffs random_coeffs(const LegendreTable& tab, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Coeffs c{std::vector<double>(tab.size()), std::vector<double>(tab.size())};
  for (int m = 0; m <= tab.lmax(); ++m)
    for (int l = m; l <= tab.lmax(); ++l) {
      c.re[tab.index(l, m)] = rng.normal();
      c.im[tab.index(l, m)] = m == 0 ? 0.0 : rng.normal();
    }
  return c;
}

// Direct sum over eval_ylm: the independent oracle.
double direct_synthesis(const LegendreTable& tab, const Coeffs& c, const UnitPoint& p) {
  double s = 0.0;
  for (int m = 0; m <= tab.lmax(); ++m)
    for (int l = m; l <= tab.lmax(); ++l) {
      const std::complex<double> a(c.re[tab.index(l, m)], c.im[tab.index(l, m)]);
      s += (m == 0 ? 1.0 : 2.0) * (a * eval_ylm(l, m, p)).real();
    }
  return s;
}

std::vector<const KernelSet*> variants() {
  std::vector<const KernelSet*> v{&scalar_kernels()};
  if (const auto* a = avx2_kernels()) v.push_back(a);
  return v;
}

}  // namespace

TEST_CASE("synthesis matches the direct harmonic sum") {
  const LegendreTable tab(24);
  const auto pts = test_points(37, 1);
  const PointSet soa(pts);
  const auto c = random_coeffs(tab, 2);
  for (const auto* k : variants()) {
    CAPTURE(k->name);
    std::vector<double> out(pts.size());
    k->synthesize(tab, c.re.data(), c.im.data(), soa, out.data());
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(out[i] == doctest::Approx(direct_synthesis(tab, c, pts[i])).epsilon(1e-11).scale(10.0));
  }
}

TEST_CASE("adjoint matches the direct projection") {
  const LegendreTable tab(20);
  const auto pts = test_points(29, 3);
  const PointSet soa(pts);
  SplitMix64 rng(4);
  std::vector<double> v(pts.size());
  for (auto& x : v) x = rng.normal();
  for (const auto* k : variants()) {
    CAPTURE(k->name);
    std::vector<double> re(tab.size(), 0.0), im(tab.size(), 0.0);
    k->adjoint(tab, soa, v.data(), re.data(), im.data());
    for (int m = 0; m <= tab.lmax(); ++m)
      for (int l = m; l <= tab.lmax(); ++l) {
        std::complex<double> s = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) s += v[i] * std::conj(eval_ylm(l, m, pts[i]));
        CHECK(re[tab.index(l, m)] == doctest::Approx(s.real()).epsilon(1e-11).scale(10.0));
        CHECK(im[tab.index(l, m)] == doctest::Approx(s.imag()).epsilon(1e-11).scale(10.0));
      }
  }
}

TEST_CASE("legendre series matches term-by-term evaluation") {
  const int L = 90;
  SplitMix64 rng(8);
  std::vector<double> w(L + 1), t(53);
  for (auto& x : w) x = rng.normal();
  for (auto& x : t) x = 2.0 * rng.uniform() - 1.0;
  t[0] = 1.0;
  t[1] = -1.0;
  for (const auto* k : variants()) {
    CAPTURE(k->name);
    std::vector<double> out(t.size());
    k->legendre_series(w.data(), L, t.data(), t.size(), out.data());
    for (std::size_t i = 0; i < t.size(); ++i) {
      double s = 0.0;
      for (int l = 0; l <= L; ++l) s += w[l] * legendre_p(l, t[i]);
      CHECK(out[i] == doctest::Approx(s).epsilon(1e-11).scale(10.0));
    }
  }
}

TEST_CASE("vector and scalar variants agree at high degree") {
  const auto* fast = avx2_kernels();
  if (fast == nullptr) return;
  const LegendreTable tab(255);
  const auto pts = test_points(203, 9);
  const PointSet soa(pts);
  const auto c = random_coeffs(tab, 10);
  std::vector<double> a(pts.size()), b(pts.size());
  scalar_kernels().synthesize(tab, c.re.data(), c.im.data(), soa, a.data());
  fast->synthesize(tab, c.re.data(), c.im.data(), soa, b.data());
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(a[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  CHECK(diff <= 1e-12 * scale);

  std::vector<double> re1(tab.size(), 0.0), im1(tab.size(), 0.0), re2(tab.size(), 0.0), im2(tab.size(), 0.0);
  scalar_kernels().adjoint(tab, soa, a.data(), re1.data(), im1.data());
  fast->adjoint(tab, soa, a.data(), re2.data(), im2.data());
  scale = diff = 0.0;
  for (std::size_t i = 0; i < re1.size(); ++i) {
    scale = std::max({scale, std::abs(re1[i]), std::abs(im1[i])});
    diff = std::max({diff, std::abs(re1[i] - re2[i]), std::abs(im1[i] - im2[i])});
  }
  CHECK(diff <= 1e-12 * scale);
}
