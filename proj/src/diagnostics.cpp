#include "needlets/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "needlets/error.hpp"
#include "needlets/kernels.hpp"

namespace needlets {

namespace {

double factorial(int q) {
  double f = 1.0;
  for (int i = 2; i <= q; ++i) f *= i;
  return f;
}

double int_pow(double x, int q) {
  double r = 1.0;
  for (int i = 0; i < q; ++i) r *= x;
  return r;
}

// k4 from centred power sums of n values.
double k_statistic4(double n, double s2, double s4) {
  const double m2 = s2 / n, m4 = s4 / n;
  return n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
}

// Centred second and fourth power sums of n values from raw sums about 0.
void central_sums(double n, double p1, double p2, double p3, double p4, double& s2, double& s4) {
  const double mu = p1 / n;
  s2 = p2 - n * mu * mu;
  s4 = p4 - 4.0 * mu * p3 + 6.0 * mu * mu * p2 - 3.0 * n * mu * mu * mu * mu;
}

}  // namespace

Cum4Estimate cum4(std::span<const double> samples) {
  if (samples.size() < 100) {
    throw ValidationError("cum4 needs at least 100 samples, got " + std::to_string(samples.size()));
  }
  // Centre once for conditioning; cumulants of order >= 2 are shift-invariant.
  const double centre = mean(samples);
  CompensatedSum c1, c2, c3, c4;
  for (double x : samples) {
    const double y = x - centre;
    c1.add(y);
    c2.add(y * y);
    c3.add(y * y * y);
    c4.add(y * y * y * y);
  }
  const double n = static_cast<double>(samples.size());
  const double p1 = c1.value(), p2 = c2.value(), p3 = c3.value(), p4 = c4.value();
  Cum4Estimate est;
  est.n = samples.size();
  double s2 = 0.0, s4 = 0.0;
  central_sums(n, p1, p2, p3, p4, s2, s4);
  est.value = s2 > 0.0 ? k_statistic4(n, s2, s4) : 0.0;

  std::vector<double> loo(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double y = samples[i] - centre;
    double t2 = 0.0, t4 = 0.0;
    central_sums(n - 1.0, p1 - y, p2 - y * y, p3 - y * y * y, p4 - y * y * y * y, t2, t4);
    loo[i] = t2 > 0.0 ? k_statistic4(n - 1.0, t2, t4) : 0.0;
  }
  const double loo_mean = mean(loo);
  CompensatedSum dev;
  for (double v : loo) dev.add((v - loo_mean) * (v - loo_mean));
  est.standard_error = std::sqrt((n - 1.0) / n * dev.value());
  return est;
}

double hermite_cross_moment(std::span<const double> corr_weights, std::span<const UnitPoint> points,
                            std::span<const std::uint32_t> a, std::span<const std::uint32_t> b, int q) {
  if (a.empty() || b.empty()) throw ValidationError("hermite_cross_moment: empty cell");
  const int lmax = static_cast<int>(corr_weights.size()) - 1;
  const auto& kern = kernels::active_kernels();
  std::vector<double> t(b.size()), rho(b.size());
  CompensatedSum total;
  for (auto k : a) {
    for (std::size_t i = 0; i < b.size(); ++i) t[i] = std::clamp(points[k].dot(points[b[i]]), -1.0, 1.0);
    kern.legendre_series(corr_weights.data(), lmax, t.data(), t.size(), rho.data());
    double row = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) row += b[i] == k ? 1.0 : int_pow(rho[i], q);
    total.add(row);
  }
  return factorial(q) * total.value() / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double whole_sphere_variance(std::span<const double> corr_weights, std::span<const UnitPoint> points, int q) {
  const std::size_t n = points.size();
  if (n == 0) throw ValidationError("whole_sphere_variance: no points");
  const int lmax = static_cast<int>(corr_weights.size()) - 1;
  const auto& kern = kernels::active_kernels();
  std::vector<double> t(n), rho(n);
  CompensatedSum off;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t m = n - k - 1;
    for (std::size_t i = 0; i < m; ++i) t[i] = std::clamp(points[k].dot(points[k + 1 + i]), -1.0, 1.0);
    kern.legendre_series(corr_weights.data(), lmax, t.data(), m, rho.data());
    double row = 0.0;
    for (std::size_t i = 0; i < m; ++i) row += int_pow(rho[i], q);
    off.add(row);
  }
  return factorial(q) * (static_cast<double>(n) + 2.0 * off.value()) / static_cast<double>(n);
}

double max_abs_correlation_beyond(std::span<const double> corr_weights, std::span<const UnitPoint> points,
                                  double theta0) {
  const std::size_t n = points.size();
  const int lmax = static_cast<int>(corr_weights.size()) - 1;
  if (theta0 > std::numbers::pi) return 0.0;
  const double cos0 = std::cos(theta0);
  const auto& kern = kernels::active_kernels();
  std::vector<double> t(n), rho(n);
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::size_t m = 0;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double d = points[k].dot(points[i]);
      if (d <= cos0) t[m++] = std::clamp(d, -1.0, 1.0);
    }
    if (m == 0) continue;
    kern.legendre_series(corr_weights.data(), lmax, t.data(), m, rho.data());
    for (std::size_t i = 0; i < m; ++i) best = std::max(best, std::abs(rho[i]));
  }
  return best;
}

double correlation_sum(const SubsampleDesign& design, int M, std::size_t a, std::size_t b) {
  if (a == b) throw ValidationError("correlation_sum: cells must be distinct");
  if (a >= design.A_r() || b >= design.A_r()) throw ValidationError("correlation_sum: cell index out of range");
  if (!design.cells.lemma14_applies()) throw ValidationError("correlation_sum: needs epsilon <= delta / 4");
  const double s = std::numbers::pi / design.cells.epsilon;
  const auto& pa = design.cells.members[a];
  const auto& pb = design.cells.members[b];
  CompensatedSum total;
  for (auto u : pa) {
    double row = 0.0;
    for (auto v : pb) {
      const double d = std::acos(std::clamp(design.fine_points[u].dot(design.fine_points[v]), -1.0, 1.0));
      row += 1.0 / int_pow(1.0 + s * d, M);
    }
    total.add(row);
  }
  return total.value() / std::sqrt(static_cast<double>(pa.size()) * static_cast<double>(pb.size()));
}

std::vector<CorrelationSumRow> correlation_sum_table(const SubsampleDesign& design, std::span<const int> Ms) {
  if (!design.cells.lemma14_applies()) throw ValidationError("correlation_sum_table: needs epsilon <= delta / 4");
  const double eps = design.cells.epsilon, delta = design.cells.delta;
  const double s = std::numbers::pi / eps;
  std::vector<CorrelationSumRow> rows;
  for (std::size_t a = 0; a < design.A_r(); ++a) {
    for (std::size_t b = a + 1; b < design.A_r(); ++b) {
      const auto& pa = design.cells.members[a];
      const auto& pb = design.cells.members[b];
      std::vector<CompensatedSum> sums(Ms.size());
      double min_d = std::numbers::pi;
      std::vector<double> row(Ms.size());
      for (auto u : pa) {
        std::fill(row.begin(), row.end(), 0.0);
        for (auto v : pb) {
          const double d = std::acos(std::clamp(design.fine_points[u].dot(design.fine_points[v]), -1.0, 1.0));
          min_d = std::min(min_d, d);
          const double base = 1.0 + s * d;
          for (std::size_t i = 0; i < Ms.size(); ++i) row[i] += 1.0 / int_pow(base, Ms[i]);
        }
        for (std::size_t i = 0; i < Ms.size(); ++i) sums[i].add(row[i]);
      }
      const double norm = std::sqrt(static_cast<double>(pa.size()) * static_cast<double>(pb.size()));
      for (std::size_t i = 0; i < Ms.size(); ++i) {
        CorrelationSumRow r;
        r.j = design.j;
        r.r = design.r;
        r.M = Ms[i];
        r.a = a;
        r.b = b;
        r.delta = delta;
        r.epsilon = eps;
        r.W = sums[i].value() / norm;
        r.bound = (eps / delta) * (1.0 + (Ms[i] == 3 ? std::log(delta / eps) : 0.0));
        r.ratio = r.W / r.bound;
        r.cell_distance = min_d - 2.0 * eps;
        r.separated_bound = 2.0 * std::numbers::pi * std::numbers::pi * std::pow(eps / delta, Ms[i] - 2);
        rows.push_back(r);
      }
    }
  }
  return rows;
}

LogFactorReport m3_log_factor_check(std::span<const SubsampleDesign> designs) {
  LogFactorReport rep;
  const int Ms[] = {3, 4};
  for (const auto& d : designs) {
    ScalingPoint p;
    p.j = d.j;
    p.r = d.r;
    p.delta_over_eps = d.cells.delta / d.cells.epsilon;
    for (const auto& row : correlation_sum_table(d, Ms)) {
      if (row.M == 3) p.max_W_M3 = std::max(p.max_W_M3, row.W);
      if (row.M == 4) p.max_W_M4 = std::max(p.max_W_M4, row.W);
    }
    const double x = p.delta_over_eps;
    p.m3_plain = p.max_W_M3 * x;
    p.m3_log = p.max_W_M3 * x / (1.0 + std::log(x));
    p.m4 = p.max_W_M4 * x;
    p.m4_ineq18 = p.max_W_M4 * x / std::log(x);
    rep.points.push_back(p);
  }
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    const auto& a = rep.points[i - 1];
    const auto& b = rep.points[i];
    rep.m4_bounded = rep.m4_bounded && b.m4 <= a.m4;
    rep.m4_ineq18_bounded = rep.m4_ineq18_bounded && b.m4_ineq18 <= a.m4_ineq18;
    rep.m3_plain_grows = rep.m3_plain_grows && b.m3_plain > a.m3_plain;
    rep.m3_log_bounded = rep.m3_log_bounded && b.m3_log <= a.m3_log;
  }
  return rep;
}

}  // namespace needlets
