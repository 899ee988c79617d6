#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "needlets/geometry.hpp"
#include "needlets/stats.hpp"

namespace needlets {

/// Unbiased fourth-cumulant estimate (k-statistic k4) with its
/// leave-one-out jackknife standard error.  Needs >= 100 samples.
struct Cum4Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};
Cum4Estimate cum4(std::span<const double> samples);

/// Exact Hermite-chaos moments of normalised needlet coefficients: with
/// rho(t) = sum_l w_l P_l(t) (see correlation_weights) and
/// E H_q(X) H_q(Y) = q! rho^q,
///   q! / sqrt(|a| |b|) sum_{k in a} sum_{k' in b} rho(<x_k, x_k'>)^q.
/// a == b gives the variance of the cell statistic Gamma_a.
double hermite_cross_moment(std::span<const double> corr_weights, std::span<const UnitPoint> points,
                            std::span<const std::uint32_t> a, std::span<const std::uint32_t> b, int q);

/// Variance of the whole-sphere statistic (1 / sqrt(A_j)) sum_k H_q(beta_hat_jk).
double whole_sphere_variance(std::span<const double> corr_weights, std::span<const UnitPoint> points, int q);

/// max |rho| over pairs at geodesic distance >= theta0 (0 if there are none).
double max_abs_correlation_beyond(std::span<const double> corr_weights, std::span<const UnitPoint> points,
                                  double theta0);

/// Double sum over the fine points of cells a != b of 1 / (1 + s d(u, v))^M,
/// divided by sqrt(N_a N_b), with s = pi / epsilon_fine.
double correlation_sum(const SubsampleDesign& design, int M, std::size_t a, std::size_t b);

struct CorrelationSumRow {
  int j = 0;
  int r = 0;
  int M = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double W = 0.0;
  /// (eps/delta)(1 + [M = 3] log(delta/eps)).
  double bound = 0.0;
  double ratio = 0.0;
  /// Lower bound on d(S_a, S_b): min member distance minus 2 eps.
  double cell_distance = 0.0;
  /// 2 pi^2 (eps/delta)^{M-2}, asserted when cell_distance >= delta.
  double separated_bound = 0.0;
  bool separated() const { return cell_distance >= delta; }
};

/// Every unordered pair of distinct cells, for each M.
std::vector<CorrelationSumRow> correlation_sum_table(const SubsampleDesign& design, std::span<const int> Ms);

/// Fitted constants along a list of designs with growing j - r.
struct ScalingPoint {
  int j = 0;
  int r = 0;
  double delta_over_eps = 0.0;
  double max_W_M3 = 0.0;
  double max_W_M4 = 0.0;
  double m3_plain = 0.0;     // max W (delta/eps)
  double m3_log = 0.0;       // max W (delta/eps) / (1 + log(delta/eps))
  double m4 = 0.0;           // max W (delta/eps)
  double m4_ineq18 = 0.0;    // max W (delta/eps) / log(delta/eps)
};

struct LogFactorReport {
  std::vector<ScalingPoint> points;
  bool m4_bounded = true;        // m4 non-increasing
  bool m4_ineq18_bounded = true; // m4_ineq18 non-increasing
  bool m3_plain_grows = true;    // m3_plain strictly increasing
  bool m3_log_bounded = true;    // m3_log non-increasing
};

/// "Bounded" is read in its assertable form: non-increasing along the grid.
LogFactorReport m3_log_factor_check(std::span<const SubsampleDesign> designs);

}  // namespace needlets
