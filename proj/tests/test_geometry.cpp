#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "needlets/error.hpp"
#include "needlets/geometry.hpp"
#include "needlets/rng.hpp"

using namespace needlets;
constexpr double pi = std::numbers::pi;

namespace {

// Exhaustive nearest-center scan with the lowest-index tie rule.
std::size_t brute_nearest(const MaximalNet& net, const UnitPoint& x) {
  std::size_t best = 0;
  double best_d = 10.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double d = std::acos(std::clamp(net[i].dot(x), -1.0, 1.0));
    if (d < best_d - 1e-12) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("geodesic distance") {
  const UnitPoint p = UnitPoint::from_angles(0.7, 1.9);
  CHECK(geodesic_distance(p, p) == doctest::Approx(0.0));
  CHECK(geodesic_distance(kNorthPole, kSouthPole) == doctest::Approx(pi));
  CHECK(geodesic_distance({1, 0, 0}, {0, 1, 0}) == doctest::Approx(pi / 2));
  CHECK_THROWS_AS(geodesic_distance({1.0 + 1e-6, 0, 0}, {0, 1, 0}), ValidationError);
  // tiny angles resolve far below acos precision
  const UnitPoint q = UnitPoint::from_angles(0.7 + 1e-9, 1.9);
  CHECK(geodesic_distance(p, q) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("cap and annulus areas") {
  CHECK(cap_area(pi) == doctest::Approx(4 * pi));
  CHECK(cap_area(pi / 2) == doctest::Approx(2 * pi));
  CHECK(cap_area(0.01) == doctest::Approx(pi * 1e-4).epsilon(1e-4));
  CHECK(annulus_area(0.0, 0.8) == doctest::Approx(cap_area(0.8)));
  CHECK(annulus_area(pi / 2, pi) == doctest::Approx(2 * pi));
  const double a = annulus_area(0.1, 0.2);
  CHECK(a == doctest::Approx(2 * pi * (std::cos(0.1) - std::cos(0.2))));
  CHECK_THROWS_AS(cap_area(0.0), ValidationError);
  CHECK_THROWS_AS(annulus_area(0.3, 0.2), ValidationError);
}

TEST_CASE("net construction") {
  CHECK(build_maximal_net(pi, NetStrategy::greedy_random, 1).size() == 1);
  CHECK(build_maximal_net(pi / 2, NetStrategy::greedy_random, 1).size() >= 2);
  for (auto strategy : {NetStrategy::greedy_random, NetStrategy::spiral_thinned}) {
    const auto net = build_maximal_net(pi / 8, strategy, 7);
    CHECK(net_size_bounds(pi / 8).contains(static_cast<double>(net.size())));
    CHECK(net.size() >= 26);
    CHECK(net.size() <= 256);
    CHECK(min_separation(net) > pi / 8);
    CHECK(covering_violations(net, 20000, 3) == 0);
  }
  // Exact covering: the farthest point from a net is a circumcenter of three
  // centers, so every circumcenter of every triple must be within eps.
  for (auto strategy : {NetStrategy::greedy_random, NetStrategy::spiral_thinned}) {
    const double eps = pi / 7;
    const auto net = build_maximal_net(eps, strategy, 2);
    const auto c = net.centers();
    std::size_t uncovered = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j)
        for (std::size_t k = j + 1; k < c.size(); ++k) {
          const double ux = c[j].x - c[i].x, uy = c[j].y - c[i].y, uz = c[j].z - c[i].z;
          const double vx = c[k].x - c[i].x, vy = c[k].y - c[i].y, vz = c[k].z - c[i].z;
          const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
          if (std::sqrt(nx * nx + ny * ny + nz * nz) < 1e-12) continue;
          for (double sgn : {1.0, -1.0}) {
            const auto w = UnitPoint::normalized(sgn * nx, sgn * ny, sgn * nz);
            double best = 4.0;
            for (const auto& p : c) best = std::min(best, geodesic_distance(p, w));
            uncovered += best > eps + 1e-9;
          }
        }
    CHECK(uncovered == 0);
  }
  const auto a = build_maximal_net(pi / 10, NetStrategy::greedy_random, 5);
  const auto b = build_maximal_net(pi / 10, NetStrategy::greedy_random, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK_THROWS_AS(build_maximal_net(0.0, NetStrategy::greedy_random, 1), ValidationError);
  CHECK_THROWS_AS(build_maximal_net(4.0, NetStrategy::greedy_random, 1), ValidationError);
}

TEST_CASE("voronoi assignment") {
  const auto net = build_maximal_net(pi / 6, NetStrategy::greedy_random, 11);
  for (std::size_t k = 0; k < net.size(); ++k) CHECK(voronoi_assign(net, net[k]) == k);
  SplitMix64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    const auto x = random_unit_point(rng);
    CHECK(voronoi_assign(net, x) == brute_nearest(net, x));
  }
  // Point equidistant from centers 2 and 5 goes to 2.
  std::vector<UnitPoint> c = {kNorthPole, kSouthPole, {1, 0, 0}, {-1, 0, 0}, {0, -1, 0}, {0, 1, 0}};
  const MaximalNet oct(pi / 2 - 1e-3, c, 0, NetStrategy::greedy_random);
  const auto mid = UnitPoint::normalized(1, 1, 0);
  CHECK(voronoi_assign(oct, mid) == 2);
}

TEST_CASE("cell counts") {
  const auto fine = build_maximal_net(pi / 64, NetStrategy::greedy_random, 21);
  const auto single = build_maximal_net(pi, NetStrategy::greedy_random, 1);
  const auto t1 = cell_counts(single, fine);
  REQUIRE(t1.cells() == 1);
  CHECK(t1.counts[0] == fine.size());

  const auto coarse = build_maximal_net(pi / 4, NetStrategy::greedy_random, 22);
  const auto t = cell_counts(coarse, fine);
  std::size_t total = 0;
  for (auto n : t.counts) total += n;
  CHECK(total == fine.size());
  const auto range = cell_count_bounds(pi / 4, pi / 64);
  CHECK(range.lower == doctest::Approx(256.0 / (4 * pi * pi)));
  CHECK(range.upper == doctest::Approx(2 * pi * pi * 256.0));
  CHECK(t.out_of_bound_cells().empty());
  for (std::size_t a = 0; a < t.cells(); ++a) CHECK(t.members[a].size() == t.counts[a]);
}

TEST_CASE("adjacency") {
  CHECK(adjacency(build_maximal_net(pi, NetStrategy::greedy_random, 1)).empty());
  const MaximalNet poles(2.0, {kNorthPole, kSouthPole}, 0, NetStrategy::greedy_random);
  const auto pairs = adjacency(poles);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});

  const auto net = build_maximal_net(pi / 16, NetStrategy::greedy_random, 4);
  std::vector<std::size_t> degree(net.size(), 0);
  for (auto [i, j] : adjacency(net)) {
    ++degree[i];
    ++degree[j];
    CHECK(geodesic_distance(net[i], net[j]) <= 2 * net.epsilon() + 1e-12);
  }
  CHECK(*std::max_element(degree.begin(), degree.end()) <= 59);
  // brute-force pair count
  std::size_t brute = 0;
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = i + 1; j < net.size(); ++j)
      if (geodesic_distance(net[i], net[j]) <= 2 * net.epsilon()) ++brute;
  CHECK(adjacency(net).size() == brute);
}
