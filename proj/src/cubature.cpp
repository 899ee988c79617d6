#include "needlets/cubature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "needlets/error.hpp"
#include "needlets/harmonics.hpp"

namespace needlets {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMomentTol = 1e-8;

Eigen::MatrixXd harmonic_matrix(std::span<const UnitPoint> points, int lmax) {
  const Eigen::Index rows = static_cast<Eigen::Index>(lmax + 1) * (lmax + 1);
  Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    real_harmonics(lmax, points[k], std::span<double>(a.col(static_cast<Eigen::Index>(k)).data(), rows));
  }
  return a;
}

Eigen::VectorXd moment_targets(Eigen::Index rows) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  b(0) = std::sqrt(4.0 * kPi);
  return b;
}

// Largest degree D <= lmax such that every row of degree <= D has residual
// below kMomentTol.
int verified_degree(const Eigen::VectorXd& residual, int lmax) {
  int degree = -1;
  for (int l = 0; l <= lmax; ++l) {
    const Eigen::Index lo = static_cast<Eigen::Index>(l) * l, n = 2 * l + 1;
    if (residual.segment(lo, n).cwiseAbs().maxCoeff() >= kMomentTol) break;
    degree = l;
  }
  return std::max(degree, 0);
}

struct FitResult {
  Eigen::VectorXd weights;
  Eigen::VectorXd residual;
};

FitResult fit_moments(const Eigen::MatrixXd& a_full, const Eigen::MatrixXd& gram_full, const Eigen::VectorXd& area,
                      int lmax) {
  const Eigen::Index n = static_cast<Eigen::Index>(lmax + 1) * (lmax + 1);
  const auto a = a_full.topRows(n);
  const Eigen::MatrixXd g = gram_full.topLeftCorner(n, n).selfadjointView<Eigen::Lower>();
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  const Eigen::MatrixXd l = llt.matrixL();
  // Unpivoted Cholesky: row i of the Gram matrix belongs to degree floor(sqrt(i)).
  Eigen::Index bad = llt.info() == Eigen::Success ? n : n - 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(l(i, i) * l(i, i) > 1e-12 * g(i, i))) {
      bad = i;
      break;
    }
  }
  if (bad < n) {
    const int degree = static_cast<int>(std::sqrt(static_cast<double>(bad)));
    throw ValidationError("moment_fit: moment system is rank-deficient at degree " + std::to_string(degree));
  }
  const Eigen::VectorXd b = moment_targets(n);
  Eigen::VectorXd w = area;
  // One solve plus one refinement step.
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd r = b - a * w;
    w += a.transpose() * llt.solve(r);
  }
  return {w, a * w - b};
}

}  // namespace

std::string_view to_string(CubatureMode m) {
  switch (m) {
    case CubatureMode::automatic: return "automatic";
    case CubatureMode::voronoi_area: return "voronoi_area";
    case CubatureMode::moment_fit: return "moment_fit";
  }
  return "unknown";
}

CubatureMode parse_cubature_mode(std::string_view name) {
  if (name == "automatic" || name == "auto") return CubatureMode::automatic;
  if (name == "voronoi_area") return CubatureMode::voronoi_area;
  if (name == "moment_fit") return CubatureMode::moment_fit;
  throw ValidationError("unknown cubature mode '" + std::string(name) + "'");
}

std::vector<double> voronoi_area_weights(const MaximalNet& net) {
  const double eps = net.epsilon();
  const double scale = std::max(1.0, 4.0 * kPi / (eps * eps) * 1e-3);
  const auto samples = static_cast<std::uint64_t>(std::llround(1e6 * scale));
  SplitMix64 rng(derive_seed(net.seed(), {0x61726561, static_cast<std::uint64_t>(net.size())}));
  std::vector<std::uint64_t> hits(net.size(), 0);
  for (std::uint64_t s = 0; s < samples; ++s) ++hits[net.nearest(random_unit_point(rng))];
  std::vector<double> w(net.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (hits[i] == 0) {
      throw NumericIntegrityError("voronoi_area: cell " + std::to_string(i) + " received no Monte Carlo samples");
    }
    w[i] = 4.0 * kPi * static_cast<double>(hits[i]) / static_cast<double>(samples);
  }
  return w;
}

std::vector<double> moment_residuals(std::span<const UnitPoint> points, std::span<const double> weights, int lmax) {
  const Eigen::MatrixXd a = harmonic_matrix(points, lmax);
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const Eigen::VectorXd r = a * w - moment_targets(a.rows());
  std::vector<double> per_degree(static_cast<std::size_t>(lmax) + 1, 0.0);
  for (int l = 0; l <= lmax; ++l) {
    per_degree[l] = r.segment(static_cast<Eigen::Index>(l) * l, 2 * l + 1).cwiseAbs().maxCoeff();
  }
  return per_degree;
}

CubatureRule cubature_weights(std::shared_ptr<const MaximalNet> net, int target_degree, CubatureMode mode) {
  if (!net) throw ValidationError("cubature_weights: null net");
  if (target_degree < 0) throw ValidationError("cubature_weights: negative target degree");
  CubatureRule rule;
  rule.net = net;
  rule.target_degree = target_degree;
  const std::size_t n_points = net->size();
  int degree = target_degree;
  if (mode == CubatureMode::automatic) {
    if (target_degree > kMomentFitCap) {
      mode = CubatureMode::voronoi_area;
    } else {
      mode = CubatureMode::moment_fit;
      const int feasible = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_points)))) - 1;
      degree = std::min(degree, std::max(feasible, 0));
    }
  } else if (mode == CubatureMode::moment_fit) {
    const auto unknowns = static_cast<std::size_t>(target_degree + 1) * (target_degree + 1);
    if (unknowns > n_points) {
      throw ValidationError("moment_fit: degree " + std::to_string(target_degree) + " needs " +
                            std::to_string(unknowns) + " points, net has " + std::to_string(n_points));
    }
  }
  rule.mode = mode;

  const std::vector<double> area = voronoi_area_weights(*net);
  rule.weights = area;
  rule.exact_degree = 0;
  if (mode == CubatureMode::voronoi_area || degree == 0) return rule;

  const Eigen::MatrixXd a = harmonic_matrix(net->centers(), degree);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(a.rows(), a.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
  const Eigen::Map<const Eigen::VectorXd> area_vec(area.data(), static_cast<Eigen::Index>(area.size()));
  for (int l = degree; l >= 1; --l) {
    const FitResult fit = fit_moments(a, gram, area_vec, l);
    if (fit.weights.minCoeff() <= 0.0) continue;
    rule.weights.assign(fit.weights.data(), fit.weights.data() + fit.weights.size());
    rule.exact_degree = verified_degree(fit.residual, l);
    return rule;
  }
  return rule;
}

}  // namespace needlets
