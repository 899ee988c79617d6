#include "needlets/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "needlets/error.hpp"

namespace needlets {

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("mean of an empty sample");
  return compensated_sum(xs) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw ValidationError("sample variance needs at least two values");
  const double m = mean(xs);
  CompensatedSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(xs.size() - 1);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ValidationError("correlation needs two equal samples, n >= 2");
  const double mx = mean(xs), my = mean(ys);
  CompensatedSum sxy, sxx, syy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy.add((xs[i] - mx) * (ys[i] - my));
    sxx.add((xs[i] - mx) * (xs[i] - mx));
    syy.add((ys[i] - my) * (ys[i] - my));
  }
  const double d = std::sqrt(sxx.value() * syy.value());
  return d > 0.0 ? sxy.value() / d : 0.0;
}

double hermite(int q, double u) {
  if (q < 0) throw ValidationError("hermite: negative order");
  if (q == 0) return 1.0;
  double h0 = 1.0, h1 = u;
  for (int n = 1; n < q; ++n) {
    const double h2 = u * h1 - n * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) throw ValidationError("chi2_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

double sup_limit_cdf(double x, std::size_t cells) {
  if (x <= 0.0) return 0.0;
  // 2 Phi(x) - 1 = 1 - erfc(x / sqrt 2); powers via log1p keep the far tail.
  const double tail = std::erfc(x / std::numbers::sqrt2);
  return std::exp(static_cast<double>(cells) * std::log1p(-tail));
}

void normalize(NeedletCoefficients& coeffs, std::span<const double> weights, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("normalize: gamma_j must be positive");
  if (weights.size() != coeffs.beta.size()) throw ValidationError("normalize: weight count mismatch");
  coeffs.beta_hat.resize(coeffs.beta.size());
  for (std::size_t k = 0; k < coeffs.beta.size(); ++k) coeffs.beta_hat[k] = coeffs.beta[k] / std::sqrt(weights[k] * gamma);
}

double normalize_estimated(NeedletCoefficients& coeffs, std::span<const double> weights) {
  if (weights.size() != coeffs.beta.size() || weights.empty()) {
    throw ValidationError("normalize_estimated: weight count mismatch");
  }
  CompensatedSum s;
  for (std::size_t k = 0; k < coeffs.beta.size(); ++k) s.add(coeffs.beta[k] * coeffs.beta[k] / weights[k]);
  const double gamma_hat = s.value() / static_cast<double>(weights.size());
  normalize(coeffs, weights, gamma_hat);
  return gamma_hat;
}

double whole_sphere_stat(std::span<const double> beta_hat, int q) {
  if (beta_hat.empty()) throw ValidationError("whole_sphere_stat: no coefficients");
  CompensatedSum s;
  for (double b : beta_hat) s.add(hermite(q, b));
  return s.value() / static_cast<double>(beta_hat.size());
}

SubsampleDesign make_subsample_design(const FrameLevel& fine, double B, int r, NetStrategy strategy,
                                      std::uint64_t seed) {
  if (r < 0) throw ValidationError("subsample design: r must be >= 0");
  if (!(std::pow(B, -fine.j) < std::pow(B, -r) / 4.0)) {
    throw ValidationError("subsample design (j=" + std::to_string(fine.j) + ", r=" + std::to_string(r) +
                          ") violates B^-j < B^-r / 4");
  }
  SubsampleDesign d;
  d.j = fine.j;
  d.r = r;
  d.B = B;
  const double delta = std::min(std::numbers::pi, std::numbers::pi * std::pow(B, -r));
  d.coarse = std::make_shared<const MaximalNet>(
      build_maximal_net(delta, strategy, derive_seed(seed, {0x636f61727365, static_cast<std::uint64_t>(r)})));
  d.cells = cell_counts(*d.coarse, fine.points(), fine.epsilon);
  d.fine_points.assign(fine.points().begin(), fine.points().end());
  return d;
}

std::vector<double> subsample_stats(std::span<const double> beta_hat, const VoronoiTessellation& cells, int q) {
  if (beta_hat.size() != cells.assignment.size()) {
    throw ValidationError("subsample_stats: " + std::to_string(beta_hat.size()) + " coefficients for a design over " +
                          std::to_string(cells.assignment.size()) + " points");
  }
  std::vector<double> out(cells.cells());
  for (std::size_t a = 0; a < cells.cells(); ++a) {
    if (cells.members[a].empty()) throw ValidationError("subsample_stats: cell " + std::to_string(a) + " is empty");
    CompensatedSum s;
    for (auto k : cells.members[a]) s.add(hermite(q, beta_hat[k]));
    out[a] = s.value() / std::sqrt(static_cast<double>(cells.members[a].size()));
  }
  return out;
}

double sigma_hat_sq(std::span<const double> beta_hat, int q) {
  if (beta_hat.empty()) throw ValidationError("sigma_hat_sq: no coefficients");
  CompensatedSum s;
  for (double b : beta_hat) {
    const double h = hermite(q, b);
    s.add(h * h);
  }
  return s.value() / static_cast<double>(beta_hat.size());
}

double big_sigma_hat(std::span<const double> gamma_stats) {
  if (gamma_stats.empty()) throw ValidationError("big_sigma_hat: need at least one cell");
  CompensatedSum s;
  for (double g : gamma_stats) s.add(g * g);
  return s.value() / static_cast<double>(gamma_stats.size());
}

TestResult sup_test(std::span<const double> gamma_stats, double Sigma_hat) {
  if (!(Sigma_hat > 0.0)) throw ValidationError("sup_test: Sigma_hat must be positive");
  if (gamma_stats.empty()) throw ValidationError("sup_test: no cells");
  double m = 0.0;
  for (double g : gamma_stats) m = std::max(m, std::abs(g));
  TestResult t;
  t.statistic = m / std::sqrt(Sigma_hat);
  const double tail = std::erfc(t.statistic / std::numbers::sqrt2);
  t.p_value = t.statistic == 0.0 ? 1.0 : -std::expm1(static_cast<double>(gamma_stats.size()) * std::log1p(-tail));
  return t;
}

VoronoiTessellation hemisphere_cells(std::span<const UnitPoint> points, double fine_epsilon, const UnitPoint& north,
                                     const UnitPoint& south) {
  const double gap = std::sqrt((north.x + south.x) * (north.x + south.x) + (north.y + south.y) * (north.y + south.y) +
                               (north.z + south.z) * (north.z + south.z));
  if (gap > 1e-9) throw ValidationError("north_south_test: poles are not antipodal");
  const MaximalNet poles(std::numbers::pi / 2.0, {north, south}, 0, NetStrategy::greedy_random);
  return cell_counts(poles, points, fine_epsilon);
}

TestResult north_south_test(std::span<const double> beta_hat, const VoronoiTessellation& hemispheres,
                            double Sigma_hat) {
  if (!(Sigma_hat > 0.0)) throw ValidationError("north_south_test: Sigma_hat must be positive");
  if (hemispheres.cells() != 2) throw ValidationError("north_south_test: need exactly two hemispheres");
  const auto g = subsample_stats(beta_hat, hemispheres, 2);
  TestResult t;
  t.statistic = (g[0] - g[1]) * (g[0] - g[1]) / (2.0 * Sigma_hat);
  t.p_value = chi2_sf(t.statistic, 1.0);
  return t;
}

TestResult north_south_test(std::span<const double> beta_hat, std::span<const UnitPoint> points,
                            double fine_epsilon, const UnitPoint& north, const UnitPoint& south, double Sigma_hat) {
  return north_south_test(beta_hat, hemisphere_cells(points, fine_epsilon, north, south), Sigma_hat);
}

double universal_threshold(std::size_t A_j) {
  if (A_j < 1) throw ValidationError("universal_threshold: need A_j >= 1");
  return std::sqrt(2.0 * std::log(static_cast<double>(A_j)));
}

std::vector<std::size_t> threshold_indices(std::span<const double> beta_hat, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("threshold: tau must be >= 0");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < beta_hat.size(); ++k)
    if (std::abs(beta_hat[k]) > tau) out.push_back(k);
  return out;
}

std::vector<UnitPoint> threshold_directions(std::span<const double> beta_hat, std::span<const UnitPoint> points,
                                            double tau) {
  if (beta_hat.size() != points.size()) throw ValidationError("threshold_directions: size mismatch");
  std::vector<UnitPoint> out;
  for (auto k : threshold_indices(beta_hat, tau)) out.push_back(points[k]);
  return out;
}

UniformityCheck uniformity_check(std::span<const std::size_t> selected, const VoronoiTessellation& cells) {
  UniformityCheck u;
  u.selected = selected.size();
  if (selected.empty() || cells.cells() < 2) return u;
  std::vector<double> observed(cells.cells(), 0.0);
  for (auto k : selected) {
    if (k >= cells.assignment.size()) throw ValidationError("uniformity_check: index out of range");
    observed[cells.assignment[k]] += 1.0;
  }
  const double total = static_cast<double>(cells.assignment.size());
  CompensatedSum chi2;
  for (std::size_t a = 0; a < cells.cells(); ++a) {
    const double expected = static_cast<double>(u.selected) * static_cast<double>(cells.counts[a]) / total;
    if (expected > 0.0) chi2.add((observed[a] - expected) * (observed[a] - expected) / expected);
  }
  u.chi2 = chi2.value();
  u.dof = cells.cells() - 1;
  u.p_value = chi2_sf(u.chi2, static_cast<double>(u.dof));
  return u;
}

TestResult ks_uniform(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("ks_uniform: empty sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  // Kolmogorov limit law with the usual finite-n correction of the argument.
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double q = 0.0;
  if (lambda < 0.2) {
    q = 1.0;
  } else {
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
      q += term;
      if (std::abs(term) < 1e-16) break;
      sign = -sign;
    }
    q = std::clamp(2.0 * q, 0.0, 1.0);
  }
  return {d, q};
}

}  // namespace needlets
