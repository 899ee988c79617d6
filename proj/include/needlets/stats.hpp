#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "needlets/frame.hpp"
#include "needlets/geometry.hpp"

namespace needlets {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);
double mean(std::span<const double> xs);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);
/// Pearson correlation of two equally long samples.
double correlation(std::span<const double> xs, std::span<const double> ys);

/// Probabilists' Hermite polynomial: H_0 = 1, H_1 = u, H_{q+1} = u H_q - q H_{q-1}.
double hermite(int q, double u);

double normal_cdf(double x);
/// Upper tail of chi-square with `dof` degrees of freedom.
double chi2_sf(double x, double dof);
/// (Phi(x) - Phi(-x))^cells: limiting CDF of the maximum of |N(0,1)| over cells.
double sup_limit_cdf(double x, std::size_t cells);

/// beta_hat_jk = beta_jk / sqrt(lambda_jk gamma_j).  Fills coeffs.beta_hat.
void normalize(NeedletCoefficients& coeffs, std::span<const double> weights, double gamma);
/// Same with gamma_j replaced by its estimate mean_k(beta_jk^2 / lambda_jk)
/// (the q = 1 variance estimator).  Returns the estimate.
double normalize_estimated(NeedletCoefficients& coeffs, std::span<const double> weights);

/// (1 / A_j) sum_k H_q(beta_hat_jk).
double whole_sphere_stat(std::span<const double> beta_hat, int q);

/// Voronoi cells of the coarse net Xi_{pi B^-r} populated by the level-j
/// cubature points.  Requires B^-j < B^-r / 4.
struct SubsampleDesign {
  int j = 0;
  int r = 0;
  double B = 2.0;
  std::shared_ptr<const MaximalNet> coarse;
  VoronoiTessellation cells;
  std::vector<UnitPoint> fine_points;

  std::size_t A_r() const { return cells.cells(); }
  std::size_t A_j() const { return cells.assignment.size(); }
};

SubsampleDesign make_subsample_design(const FrameLevel& fine, double B, int r, NetStrategy strategy,
                                      std::uint64_t seed);

/// Gamma_{a;rj} = (1 / sqrt(N_a)) sum_{k in cell a} H_q(beta_hat_jk), one per cell.
std::vector<double> subsample_stats(std::span<const double> beta_hat, const VoronoiTessellation& cells, int q);

/// (1 / A_j) sum_k H_q(beta_hat_jk)^2.
double sigma_hat_sq(std::span<const double> beta_hat, int q);

/// (1 / A_r) sum_a Gamma_a^2.
double big_sigma_hat(std::span<const double> gamma_stats);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// S = max_a |Gamma_a| / sqrt(Sigma_hat), p = 1 - (2 Phi(S) - 1)^{A_r}.
TestResult sup_test(std::span<const double> gamma_stats, double Sigma_hat);

/// Cells of the two-point net {north, south} over the level points; a point
/// on the dividing great circle goes to `north`.
VoronoiTessellation hemisphere_cells(std::span<const UnitPoint> points, double fine_epsilon, const UnitPoint& north,
                                     const UnitPoint& south);

/// T = (Gamma_1 - Gamma_2)^2 / (2 Sigma_hat) from q = 2 hemisphere statistics,
/// p-value from the chi-square(1) tail.
TestResult north_south_test(std::span<const double> beta_hat, const VoronoiTessellation& hemispheres,
                            double Sigma_hat);
TestResult north_south_test(std::span<const double> beta_hat, std::span<const UnitPoint> points,
                            double fine_epsilon, const UnitPoint& north, const UnitPoint& south, double Sigma_hat);

/// sqrt(2 log A_j).
double universal_threshold(std::size_t A_j);

/// Indices k with |beta_hat_jk| > tau.
std::vector<std::size_t> threshold_indices(std::span<const double> beta_hat, double tau);
std::vector<UnitPoint> threshold_directions(std::span<const double> beta_hat, std::span<const UnitPoint> points,
                                            double tau);

/// Chi-square goodness of fit of the cells hit by thresholded points against
/// counts proportional to N_a (uniform directions).
struct UniformityCheck {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t selected = 0;
};
UniformityCheck uniformity_check(std::span<const std::size_t> selected, const VoronoiTessellation& cells);

/// One-sample Kolmogorov-Smirnov test against U(0, 1).
TestResult ks_uniform(std::span<const double> samples);

}  // namespace needlets
