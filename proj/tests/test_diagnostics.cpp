#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "needlets/diagnostics.hpp"
#include "needlets/error.hpp"
#include "needlets/field.hpp"
#include "needlets/frame.hpp"
#include "needlets/rng.hpp"

using namespace needlets;
constexpr double pi = std::numbers::pi;

namespace {

const NeedletFrame& frame() {
  static const NeedletFrame f([] {
    FrameConfig c;
    c.jmin = 3;
    c.jmax = 4;
    c.seed = 8;
    return c;
  }());
  return f;
}

}  // namespace

TEST_CASE("fourth cumulant") {
  CHECK_THROWS_AS(cum4(std::vector<double>(99, 1.0)), ValidationError);
  const auto c = cum4(std::vector<double>(200, 3.0));
  CHECK(c.value == 0.0);

  SplitMix64 rng(1);
  std::vector<double> z(10000), chi(10000);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = rng.normal();
    const double g = rng.normal();
    chi[i] = g * g - 1.0;
  }
  const auto cz = cum4(z);
  CHECK(std::abs(cz.value) <= 3.0 * cz.standard_error);
  // cum4(Z^2 - 1) = 48
  const auto cc = cum4(chi);
  CHECK(std::abs(cc.value - 48.0) <= 3.0 * cc.standard_error);
  CHECK(cc.standard_error > 0.0);

  // k-statistic against the closed form on a small hand-checkable sample
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(i % 4 == 0 ? 3.0 : -1.0);
  double m2 = 0, m4 = 0, mu = 0;
  for (double x : s) mu += x;
  mu /= 100;
  for (double x : s) {
    m2 += std::pow(x - mu, 2);
    m4 += std::pow(x - mu, 4);
  }
  m2 /= 100;
  m4 /= 100;
  const double n = 100;
  const double k4 = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3));
  CHECK(cum4(s).value == doctest::Approx(k4).epsilon(1e-12));
}

TEST_CASE("exact hermite moments against pairwise coefficient correlations") {
  const auto spec = make_power_law(3.0, 1.0, frame().max_degree());
  const int j = 3;
  const auto& lvl = frame().level(j);
  const auto w = correlation_weights(frame().window(), spec, j);
  std::vector<std::uint32_t> a, b;
  for (std::uint32_t k = 0; k < 20; ++k) a.push_back(k);
  for (std::uint32_t k = 10; k < 45; ++k) b.push_back(k);
  for (int q : {2, 3}) {
    double brute = 0.0;
    for (auto k : a)
      for (auto k2 : b) brute += std::pow(coeff_covariance(frame(), spec, j, k, k2).correlation, q);
    double fact = q == 2 ? 2.0 : 6.0;
    brute *= fact / std::sqrt(20.0 * 35.0);
    CHECK(hermite_cross_moment(w, lvl.points(), a, b, q) == doctest::Approx(brute).epsilon(1e-10));
  }
  // whole-sphere variance: full double sum
  double brute = 0.0;
  for (std::size_t k = 0; k < lvl.size(); ++k)
    for (std::size_t k2 = 0; k2 < lvl.size(); ++k2) brute += std::pow(coeff_covariance(frame(), spec, j, k, k2).correlation, 2);
  brute *= 2.0 / static_cast<double>(lvl.size());
  CHECK(whole_sphere_variance(w, lvl.points(), 2) == doctest::Approx(brute).epsilon(1e-10));
  CHECK(max_abs_correlation_beyond(w, lvl.points(), 4.0) == 0.0);
  CHECK(max_abs_correlation_beyond(w, lvl.points(), 0.3) < 1.0);
}

TEST_CASE("correlation sums") {
  const auto design = make_subsample_design(frame().level(4), 2.0, 1, NetStrategy::greedy_random, 2);
  REQUIRE(design.A_r() >= 2);
  CHECK_THROWS_AS(correlation_sum(design, 3, 0, 0), ValidationError);
  for (int M : {3, 4}) {
    const double wab = correlation_sum(design, M, 0, 1);
    CHECK(wab == doctest::Approx(correlation_sum(design, M, 1, 0)).epsilon(1e-13));
    CHECK(wab >= 0.0);
    CHECK(wab <= std::sqrt(static_cast<double>(design.cells.counts[0] * design.cells.counts[1])));
  }
  const int Ms[] = {3, 4};
  const auto rows = correlation_sum_table(design, Ms);
  CHECK(rows.size() == 2 * design.A_r() * (design.A_r() - 1) / 2);
  for (const auto& r : rows) {
    if (r.separated()) CHECK(r.W <= r.separated_bound);
    CHECK(r.ratio == doctest::Approx(r.W / r.bound));
  }
  const SubsampleDesign single[] = {design};
  const auto rep = m3_log_factor_check(single);
  CHECK(rep.m4_bounded);
  CHECK(rep.m3_log_bounded);
  CHECK(rep.points.size() == 1);
}
