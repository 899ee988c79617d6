#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "needlets/rng.hpp"

namespace needlets {

/// Tolerance used for every inner-product (angle) comparison.
inline constexpr double kInnerProductTol = 1e-12;

/// A point on S^2 stored as a unit 3-vector.
struct UnitPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  /// Scale (x, y, z) onto the sphere.  Throws ValidationError for the zero vector.
  static UnitPoint normalized(double x, double y, double z);
  static UnitPoint from_angles(double colatitude, double longitude);

  double dot(const UnitPoint& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm_deviation() const;
  double colatitude() const;
  double longitude() const;
  UnitPoint antipode() const { return {-x, -y, -z}; }

  friend bool operator==(const UnitPoint&, const UnitPoint&) = default;
};

inline constexpr UnitPoint kNorthPole{0.0, 0.0, 1.0};
inline constexpr UnitPoint kSouthPole{0.0, 0.0, -1.0};

/// Uniformly distributed point on the sphere.
UnitPoint random_unit_point(SplitMix64& rng);

/// Great-circle distance in [0, pi].  Inputs must be unit-norm within 1e-9.
double geodesic_distance(const UnitPoint& a, const UnitPoint& b);

/// Chord length of an arc of the given angle (clamped to [0, pi]).
double chord_length(double angle);

/// |B(a, eta)| = 2 pi (1 - cos eta), eta in (0, pi].
double cap_area(double eta);

/// |B(a, eta) \ B(a, mu)| = 2 pi (cos mu - cos eta), 0 <= mu < eta <= pi.
double annulus_area(double mu, double eta);

/// Static uniform grid over [-1, 1]^3 used for radius queries on the sphere.
class PointIndex {
 public:
  PointIndex() = default;
  PointIndex(std::span<const UnitPoint> points, double cell_size);

  /// Calls visit(index, dot) for every point whose chord distance to x may be
  /// <= chord_radius (a superset; callers filter on dot).  Stops early if
  /// visit returns false.
  template <class Visit>
  void for_each_near(const UnitPoint& x, double chord_radius, Visit&& visit) const {
    if (dims_ == 0) return;
    const auto lo = [&](double c) { return clamp_cell((c - chord_radius + 1.0) / cell_); };
    const auto hi = [&](double c) { return clamp_cell((c + chord_radius + 1.0) / cell_); };
    const int x0 = lo(x.x), x1 = hi(x.x), y0 = lo(x.y), y1 = hi(x.y), z0 = lo(x.z), z1 = hi(x.z);
    for (int i = x0; i <= x1; ++i) {
      for (int j = y0; j <= y1; ++j) {
        for (int k = z0; k <= z1; ++k) {
          const std::size_t c = (static_cast<std::size_t>(i) * dims_ + j) * dims_ + k;
          for (std::uint32_t p = offsets_[c]; p < offsets_[c + 1]; ++p) {
            const std::uint32_t idx = items_[p];
            if (!visit(idx, points_[idx].dot(x))) return;
          }
        }
      }
    }
  }

 private:
  int clamp_cell(double v) const;

  std::vector<UnitPoint> points_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> items_;
  double cell_ = 2.0;
  int dims_ = 0;
};

enum class NetStrategy { greedy_random, spiral_thinned };

std::string_view to_string(NetStrategy s);
NetStrategy parse_net_strategy(std::string_view name);

/// A maximal epsilon-net: pairwise distances > epsilon, every point of the
/// sphere within epsilon of some center.  Immutable once built.
class MaximalNet {
 public:
  MaximalNet(double epsilon, std::vector<UnitPoint> centers, std::uint64_t seed, NetStrategy strategy);

  double epsilon() const { return epsilon_; }
  std::size_t size() const { return centers_.size(); }
  std::span<const UnitPoint> centers() const { return centers_; }
  const UnitPoint& operator[](std::size_t i) const { return centers_[i]; }
  std::uint64_t seed() const { return seed_; }
  NetStrategy strategy() const { return strategy_; }

  /// Index of the nearest center; ties within kInnerProductTol go to the
  /// lowest index.
  std::size_t nearest(const UnitPoint& x) const;

  /// Visit every center within geodesic distance `angle` of x.
  template <class Visit>
  void for_each_within(const UnitPoint& x, double angle, Visit&& visit) const {
    const double threshold = angle >= 3.141592653589793 ? -2.0 : std::cos(angle) - kInnerProductTol;
    index_.for_each_near(x, chord_length(angle) * (1.0 + 1e-9) + 1e-12, [&](std::uint32_t i, double d) {
      if (d >= threshold) visit(static_cast<std::size_t>(i), d);
      return true;
    });
  }

 private:
  double epsilon_;
  std::vector<UnitPoint> centers_;
  std::uint64_t seed_;
  NetStrategy strategy_;
  PointIndex index_;
};

/// Greedy construction (see README for the algorithm); deterministic given
/// (epsilon, strategy, seed).
MaximalNet build_maximal_net(double epsilon, NetStrategy strategy, std::uint64_t seed);

/// Nearest-center (Voronoi cell) index of x; ties to the lowest index.
std::size_t voronoi_assign(const MaximalNet& net, const UnitPoint& x);

struct CountRange {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double n) const { return lower <= n && n <= upper; }
};

/// 4/eps^2 <= N <= 4 pi^2 / eps^2.
CountRange net_size_bounds(double epsilon);
/// 1/sin^2(eps/2) <= N <= 1/sin^2(eps/4).
CountRange net_size_bounds_sharp(double epsilon);
/// (delta/eps)^2 / (4 pi^2) <= N_a <= 2 pi^2 (delta/eps)^2, valid for eps <= delta/4.
CountRange cell_count_bounds(double delta, double epsilon);
/// 6 pi^2: bound on the number of centers within 2 eps of a given center.
inline constexpr double kMaxNeighbours = 6.0 * 3.141592653589793 * 3.141592653589793;

/// Smallest pairwise geodesic distance (pi for a single point).  O(N^2).
double min_separation(const MaximalNet& net);

/// Number of uniform probe points farther than epsilon from every center.
std::size_t covering_violations(const MaximalNet& net, std::size_t probes, std::uint64_t seed);

/// Voronoi cells of a coarse net (parameter delta) populated by fine points.
struct VoronoiTessellation {
  double delta = 0.0;
  double epsilon = 0.0;
  std::vector<std::uint32_t> assignment;              // fine point -> coarse cell
  std::vector<std::size_t> counts;                    // N_a
  std::vector<std::vector<std::uint32_t>> members;    // fine indices per cell, ascending

  std::size_t cells() const { return counts.size(); }
  bool lemma14_applies() const { return epsilon <= delta / 4.0; }
  /// Cells whose count falls outside cell_count_bounds; empty when the bound
  /// does not apply.
  std::vector<std::size_t> out_of_bound_cells() const;
};

VoronoiTessellation cell_counts(const MaximalNet& coarse, const MaximalNet& fine);
VoronoiTessellation cell_counts(const MaximalNet& coarse, std::span<const UnitPoint> fine, double fine_epsilon);

/// Pairs (i, j), i < j, with d(x_i, x_j) <= 2 eps, sorted.
std::vector<std::pair<std::size_t, std::size_t>> adjacency(const MaximalNet& net);

}  // namespace needlets
