#include "needlets/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "needlets/error.hpp"

namespace needlets {

namespace {

constexpr double kPi = std::numbers::pi;

// Finest grid resolution; caps memory at ~2M cells.
constexpr int kMaxGridDims = 128;

double grid_cell_size(double chord) { return std::max(chord, 2.0 / kMaxGridDims); }

void require_unit(const UnitPoint& p, const char* what) {
  if (!(p.norm_deviation() <= 1e-9)) {
    throw ValidationError(std::string(what) + ": point is not unit-norm");
  }
}

// Incrementally filled uniform grid, used while a net is being built.
class GrowingGrid {
 public:
  explicit GrowingGrid(double cell) : cell_(cell) {
    dims_ = std::max(1, static_cast<int>(std::ceil(2.0 / cell_ - 1e-12)));
    cells_.resize(static_cast<std::size_t>(dims_) * dims_ * dims_);
  }

  void insert(const UnitPoint& p, std::uint32_t idx) { cells_[cell_of(p)].push_back(idx); }

  template <class Visit>
  void for_each_near(const UnitPoint& x, double chord_radius, Visit&& visit) const {
    const auto lo = [&](double c) { return clamp((c - chord_radius + 1.0) / cell_); };
    const auto hi = [&](double c) { return clamp((c + chord_radius + 1.0) / cell_); };
    for (int i = lo(x.x); i <= hi(x.x); ++i)
      for (int j = lo(x.y); j <= hi(x.y); ++j)
        for (int k = lo(x.z); k <= hi(x.z); ++k)
          for (auto idx : cells_[(static_cast<std::size_t>(i) * dims_ + j) * dims_ + k]) visit(idx);
  }

  // True when no stored point has dot >= threshold with x.
  bool clear_of(const UnitPoint& x, double chord_radius, double threshold, std::span<const UnitPoint> pts) const {
    const auto lo = [&](double c) { return clamp((c - chord_radius + 1.0) / cell_); };
    const auto hi = [&](double c) { return clamp((c + chord_radius + 1.0) / cell_); };
    for (int i = lo(x.x); i <= hi(x.x); ++i)
      for (int j = lo(x.y); j <= hi(x.y); ++j)
        for (int k = lo(x.z); k <= hi(x.z); ++k)
          for (auto idx : cells_[(static_cast<std::size_t>(i) * dims_ + j) * dims_ + k])
            if (pts[idx].dot(x) >= threshold) return false;
    return true;
  }

 private:
  int clamp(double v) const { return std::clamp(static_cast<int>(std::floor(v)), 0, dims_ - 1); }
  std::size_t cell_of(const UnitPoint& p) const {
    return (static_cast<std::size_t>(clamp((p.x + 1.0) / cell_)) * dims_ + clamp((p.y + 1.0) / cell_)) * dims_ +
           clamp((p.z + 1.0) / cell_);
  }

  double cell_;
  int dims_;
  std::vector<std::vector<std::uint32_t>> cells_;
};

class NetBuilder {
 public:
  NetBuilder(double epsilon, SplitMix64& rng)
      : eps_(epsilon),
        threshold_(epsilon >= kPi ? -1.0 - 2.0 * kInnerProductTol : std::cos(epsilon) - kInnerProductTol),
        chord_(chord_length(epsilon) * (1.0 + 1e-9) + 1e-12),
        grid_(grid_cell_size(chord_)),
        rng_(rng) {}

  bool try_add(const UnitPoint& p) {
    if (!grid_.clear_of(p, chord_, threshold_, centers_)) return false;
    grid_.insert(p, static_cast<std::uint32_t>(centers_.size()));
    centers_.push_back(p);
    return true;
  }

  // Rejection sampling until K consecutive candidates fail, then probe the
  // covering with fresh uniform points; any uncovered probe joins the net and
  // sampling resumes.
  void saturate() {
    constexpr std::size_t kProbes = 100000;
    for (;;) {
      std::size_t streak = 0;
      while (streak < std::max<std::size_t>(10000, 100 * centers_.size())) {
        if (try_add(random_unit_point(rng_))) {
          streak = 0;
        } else {
          ++streak;
        }
      }
      std::size_t added = 0;
      for (std::size_t i = 0; i < kProbes; ++i) {
        if (try_add(random_unit_point(rng_))) ++added;
      }
      if (added == 0) return;
    }
  }

  // Deterministic completion.  A Fibonacci sweep at spacing ~eps/4 leaves
  // every point within 1.5 eps of a center; the farthest point from the net
  // is then a Voronoi vertex whose three nearest centers lie within 3 eps of
  // each other, so inserting every uncovered circumcenter of such triples
  // until none is left makes the covering exact.
  void close_holes() {
    const auto n = static_cast<std::size_t>(std::ceil(64.0 * kPi / (eps_ * eps_)));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(i);
      try_add({r * std::cos(phi), r * std::sin(phi), z});
    }
    if (centers_.size() < 3) return;
    const double reach = chord_length(3.0 * eps_) * (1.0 + 1e-9) + 1e-12;
    const double near = std::cos(std::min(kPi, 3.0 * eps_)) - kInnerProductTol;
    std::vector<std::uint32_t> nb;
    for (bool added = true; added;) {
      added = false;
      for (std::size_t a = 0; a < centers_.size(); ++a) {
        const UnitPoint pa = centers_[a];
        nb.clear();
        grid_.for_each_near(pa, reach, [&](std::uint32_t i) {
          if (i > a && centers_[i].dot(pa) >= near) nb.push_back(i);
        });
        for (std::size_t u = 0; u < nb.size(); ++u)
          for (std::size_t v = u + 1; v < nb.size(); ++v) {
            const UnitPoint b = centers_[nb[u]], c = centers_[nb[v]];
            if (b.dot(c) < near) continue;
            const double ux = b.x - pa.x, uy = b.y - pa.y, uz = b.z - pa.z;
            const double vx = c.x - pa.x, vy = c.y - pa.y, vz = c.z - pa.z;
            const double nx = uy * vz - uz * vy, ny = uz * vx - ux * vz, nz = ux * vy - uy * vx;
            const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
            if (!(len > 1e-300)) continue;
            UnitPoint w{nx / len, ny / len, nz / len};
            if (w.dot(pa) < 0.0) w = w.antipode();
            if (try_add(w)) added = true;
          }
      }
    }
  }

  std::vector<UnitPoint> take() { return std::move(centers_); }

 private:
  double eps_;
  double threshold_;
  double chord_;
  GrowingGrid grid_;
  SplitMix64& rng_;
  std::vector<UnitPoint> centers_;
};

}  // namespace

UnitPoint UnitPoint::normalized(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("UnitPoint: cannot normalize a zero or non-finite vector");
  return {x / n, y / n, z / n};
}

UnitPoint UnitPoint::from_angles(double colatitude, double longitude) {
  const double s = std::sin(colatitude);
  return {s * std::cos(longitude), s * std::sin(longitude), std::cos(colatitude)};
}

double UnitPoint::norm_deviation() const { return std::abs(std::sqrt(x * x + y * y + z * z) - 1.0); }

double UnitPoint::colatitude() const { return std::atan2(std::hypot(x, y), z); }

double UnitPoint::longitude() const {
  const double phi = std::atan2(y, x);
  return phi < 0.0 ? phi + 2.0 * kPi : phi;
}

UnitPoint random_unit_point(SplitMix64& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * kPi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {s * std::cos(phi), s * std::sin(phi), z};
}

double geodesic_distance(const UnitPoint& a, const UnitPoint& b) {
  require_unit(a, "geodesic_distance");
  require_unit(b, "geodesic_distance");
  // atan2(|a x b|, a.b) stays accurate near 0 and pi, where acos loses digits.
  const double cx = a.y * b.z - a.z * b.y;
  const double cy = a.z * b.x - a.x * b.z;
  const double cz = a.x * b.y - a.y * b.x;
  const double d = std::clamp(a.dot(b), -1.0, 1.0);
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), d);
}

double chord_length(double angle) { return 2.0 * std::sin(std::clamp(angle, 0.0, kPi) / 2.0); }

double cap_area(double eta) {
  if (!(eta > 0.0 && eta <= kPi)) throw ValidationError("cap_area: eta must lie in (0, pi]");
  const double s = std::sin(eta / 2.0);
  return 4.0 * kPi * s * s;
}

double annulus_area(double mu, double eta) {
  if (!(mu >= 0.0 && mu < eta && eta <= kPi)) {
    throw ValidationError("annulus_area: need 0 <= mu < eta <= pi");
  }
  return 4.0 * kPi * std::sin((eta - mu) / 2.0) * std::sin((eta + mu) / 2.0);
}

PointIndex::PointIndex(std::span<const UnitPoint> points, double cell_size)
    : points_(points.begin(), points.end()), cell_(grid_cell_size(cell_size)) {
  dims_ = std::max(1, static_cast<int>(std::ceil(2.0 / cell_ - 1e-12)));
  const std::size_t ncell = static_cast<std::size_t>(dims_) * dims_ * dims_;
  std::vector<std::size_t> cell_of(points_.size());
  offsets_.assign(ncell + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    cell_of[i] = (static_cast<std::size_t>(clamp_cell((p.x + 1.0) / cell_)) * dims_ + clamp_cell((p.y + 1.0) / cell_)) *
                     dims_ +
                 clamp_cell((p.z + 1.0) / cell_);
    ++offsets_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) offsets_[c + 1] += offsets_[c];
  items_.resize(points_.size());
  std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) items_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
}

int PointIndex::clamp_cell(double v) const { return std::clamp(static_cast<int>(std::floor(v)), 0, dims_ - 1); }

std::string_view to_string(NetStrategy s) {
  switch (s) {
    case NetStrategy::greedy_random:
      return "greedy_random";
    case NetStrategy::spiral_thinned:
      return "spiral_thinned";
  }
  return "unknown";
}

NetStrategy parse_net_strategy(std::string_view name) {
  if (name == "greedy_random") return NetStrategy::greedy_random;
  if (name == "spiral_thinned") return NetStrategy::spiral_thinned;
  throw ValidationError("unknown net strategy: " + std::string(name));
}

MaximalNet::MaximalNet(double epsilon, std::vector<UnitPoint> centers, std::uint64_t seed, NetStrategy strategy)
    : epsilon_(epsilon), centers_(std::move(centers)), seed_(seed), strategy_(strategy) {
  if (!(epsilon > 0.0 && epsilon <= kPi)) throw ValidationError("MaximalNet: epsilon must lie in (0, pi]");
  if (centers_.empty()) throw ValidationError("MaximalNet: a net needs at least one center");
  for (const auto& c : centers_) require_unit(c, "MaximalNet");
  index_ = PointIndex(centers_, chord_length(epsilon_));
}

std::size_t MaximalNet::nearest(const UnitPoint& x) const {
  std::size_t best = centers_.size();
  double best_dot = -2.0;
  auto consider = [&](std::uint32_t i, double d) {
    if (best == centers_.size() || d > best_dot + kInnerProductTol ||
        (d >= best_dot - kInnerProductTol && i < best)) {
      best = i;
      best_dot = d;
    }
    return true;
  };
  // With the covering property the nearest center lies within epsilon; the
  // full scan only runs for nets that do not cover x.
  const double reach = chord_length(epsilon_) * (1.0 + 1e-9) + 1e-12;
  const double threshold = std::cos(epsilon_) - kInnerProductTol;
  index_.for_each_near(x, reach, [&](std::uint32_t i, double d) { return d >= threshold ? consider(i, d) : true; });
  if (best == centers_.size()) {
    for (std::size_t i = 0; i < centers_.size(); ++i) consider(static_cast<std::uint32_t>(i), centers_[i].dot(x));
  }
  return best;
}

MaximalNet build_maximal_net(double epsilon, NetStrategy strategy, std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon <= kPi)) throw ValidationError("build_maximal_net: epsilon must lie in (0, pi]");
  SplitMix64 rng(derive_seed(seed, {0x6e6574ULL, static_cast<std::uint64_t>(strategy)}));
  NetBuilder builder(epsilon, rng);
  if (strategy == NetStrategy::spiral_thinned) {
    // Fibonacci spiral at a spacing slightly above epsilon, thinned in order.
    const double spacing = 1.05 * epsilon;
    const auto n = static_cast<std::size_t>(std::ceil(4.0 * kPi / (0.5 * std::sqrt(3.0) * spacing * spacing)));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(i);
      builder.try_add({r * std::cos(phi), r * std::sin(phi), z});
    }
  }
  builder.saturate();
  builder.close_holes();
  return MaximalNet(epsilon, builder.take(), seed, strategy);
}

std::size_t voronoi_assign(const MaximalNet& net, const UnitPoint& x) { return net.nearest(x); }

CountRange net_size_bounds(double epsilon) {
  return {4.0 / (epsilon * epsilon), 4.0 * kPi * kPi / (epsilon * epsilon)};
}

CountRange net_size_bounds_sharp(double epsilon) {
  const double a = std::sin(epsilon / 2.0);
  const double b = std::sin(epsilon / 4.0);
  return {1.0 / (a * a), 1.0 / (b * b)};
}

CountRange cell_count_bounds(double delta, double epsilon) {
  const double r = delta / epsilon;
  return {r * r / (4.0 * kPi * kPi), 2.0 * kPi * kPi * r * r};
}

double min_separation(const MaximalNet& net) {
  double best = kPi;
  const auto c = net.centers();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) best = std::min(best, geodesic_distance(c[i], c[j]));
  return best;
}

std::size_t covering_violations(const MaximalNet& net, std::size_t probes, std::uint64_t seed) {
  SplitMix64 rng(derive_seed(seed, {0x70726f6265ULL}));
  const double threshold = std::cos(net.epsilon()) - kInnerProductTol;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < probes; ++i) {
    const auto x = random_unit_point(rng);
    if (net[net.nearest(x)].dot(x) < threshold) ++bad;
  }
  return bad;
}

std::vector<std::size_t> VoronoiTessellation::out_of_bound_cells() const {
  std::vector<std::size_t> bad;
  if (!lemma14_applies()) return bad;
  const auto range = cell_count_bounds(delta, epsilon);
  for (std::size_t a = 0; a < counts.size(); ++a)
    if (!range.contains(static_cast<double>(counts[a]))) bad.push_back(a);
  return bad;
}

VoronoiTessellation cell_counts(const MaximalNet& coarse, std::span<const UnitPoint> fine, double fine_epsilon) {
  VoronoiTessellation t;
  t.delta = coarse.epsilon();
  t.epsilon = fine_epsilon;
  t.assignment.resize(fine.size());
  t.counts.assign(coarse.size(), 0);
  t.members.assign(coarse.size(), {});
  for (std::size_t k = 0; k < fine.size(); ++k) {
    const auto a = coarse.nearest(fine[k]);
    t.assignment[k] = static_cast<std::uint32_t>(a);
    ++t.counts[a];
    t.members[a].push_back(static_cast<std::uint32_t>(k));
  }
  return t;
}

VoronoiTessellation cell_counts(const MaximalNet& coarse, const MaximalNet& fine) {
  return cell_counts(coarse, fine.centers(), fine.epsilon());
}

std::vector<std::pair<std::size_t, std::size_t>> adjacency(const MaximalNet& net) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const double reach = std::min(2.0 * net.epsilon(), kPi);
  for (std::size_t i = 0; i < net.size(); ++i) {
    net.for_each_within(net[i], reach, [&](std::size_t j, double) {
      if (j > i) pairs.emplace_back(i, j);
    });
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace needlets
