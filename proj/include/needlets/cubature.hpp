#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "needlets/geometry.hpp"

namespace needlets {

/// automatic: moment_fit when the target degree is within kMomentFitCap,
/// voronoi_area otherwise.
enum class CubatureMode { automatic, voronoi_area, moment_fit };

std::string_view to_string(CubatureMode m);
CubatureMode parse_cubature_mode(std::string_view name);

/// Largest degree the automatic policy solves a moment system for.
inline constexpr int kMomentFitCap = 64;

/// Positive weights on the points of a net.  exact_degree is the largest L
/// for which every moment of degree <= L was verified to 1e-8 (0 for
/// area-only weights).
struct CubatureRule {
  std::shared_ptr<const MaximalNet> net;
  std::vector<double> weights;
  int exact_degree = 0;
  int target_degree = 0;
  CubatureMode mode = CubatureMode::voronoi_area;

  std::size_t size() const { return weights.size(); }
  std::span<const UnitPoint> points() const { return net->centers(); }
};

/// Monte Carlo Voronoi-cell areas with 1e6 * max(1, 4 pi / eps^2 * 1e-3)
/// uniform samples, rescaled to sum to exactly 4 pi.
std::vector<double> voronoi_area_weights(const MaximalNet& net);

/// Weights closest (in Euclidean norm) to the area weights that integrate all
/// harmonics of degree <= target_degree.  If that produces a nonpositive
/// weight the degree is lowered until all weights are positive.  Throws
/// ValidationError if (target_degree + 1)^2 > Card(net) and naming the
/// failing degree when the moment system is rank-deficient.
CubatureRule cubature_weights(std::shared_ptr<const MaximalNet> net, int target_degree, CubatureMode mode);

/// max_{l <= lmax, m} |sum_k w_k Y_lm(x_k) - sqrt(4 pi) delta_l0| over real
/// orthonormal harmonics, per degree.
std::vector<double> moment_residuals(std::span<const UnitPoint> points, std::span<const double> weights, int lmax);

}  // namespace needlets
