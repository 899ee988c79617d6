#include "needlets/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "needlets/error.hpp"
#include "needlets/harmonics.hpp"
#include "needlets/kernels.hpp"

namespace needlets {

namespace {

constexpr double kPi = std::numbers::pi;

// Rotation taking the north pole to `axis` (Rodrigues).
UnitPoint rotate_from_north(const UnitPoint& p, const UnitPoint& axis) {
  const double c = axis.z;
  if (c > 1.0 - 1e-15) return p;
  if (c < -1.0 + 1e-15) return {p.x, -p.y, -p.z};
  // k = north x axis normalised, angle = acos(c).
  const double kx = -axis.y, ky = axis.x;
  const double s = std::hypot(kx, ky);
  const double ux = kx / s, uy = ky / s;
  const double dot = ux * p.x + uy * p.y;
  const double cx = uy * p.z, cy = -ux * p.z, cz = ux * p.y - uy * p.x;  // u x p
  return {p.x * c + cx * s + ux * dot * (1.0 - c), p.y * c + cy * s + uy * dot * (1.0 - c), p.z * c + cz * s};
}

}  // namespace

PowerSpectrum make_power_law(double alpha, double G0, int lmax) {
  if (!(alpha > 2.0)) {
    throw ValidationError("power law spectrum needs alpha > 2 (regular-variation condition), got " +
                          std::to_string(alpha));
  }
  if (!(G0 > 0.0)) throw ValidationError("power law spectrum needs G0 > 0");
  if (lmax < 0) throw ValidationError("power law spectrum needs lmax >= 0");
  PowerSpectrum s;
  s.model = "power_law";
  s.alpha = alpha;
  s.G0 = G0;
  s.cl.assign(static_cast<std::size_t>(lmax) + 1, 0.0);
  for (int l = 1; l <= lmax; ++l) s.cl[l] = G0 * std::pow(static_cast<double>(l), -alpha);
  return s;
}

PowerSpectrum make_tabulated(std::vector<double> cl) {
  if (cl.empty()) throw ValidationError("tabulated spectrum is empty");
  for (std::size_t l = 0; l < cl.size(); ++l) {
    if (!(cl[l] >= 0.0)) throw ValidationError("tabulated spectrum: C_" + std::to_string(l) + " is negative");
  }
  PowerSpectrum s;
  s.model = "tabulated";
  s.cl = std::move(cl);
  s.cl[0] = 0.0;
  return s;
}

HarmonicCoefficients::HarmonicCoefficients(int lmax) : lmax_(lmax) {
  if (lmax < 0) throw ValidationError("HarmonicCoefficients: lmax must be >= 0");
  const std::size_t n = static_cast<std::size_t>(lmax + 1) * (lmax + 2) / 2;
  re_.assign(n, 0.0);
  im_.assign(n, 0.0);
}

std::complex<double> HarmonicCoefficients::at(int l, int m) const {
  if (l < 0 || l > lmax_ || std::abs(m) > l) {
    throw ValidationError("HarmonicCoefficients: (l, m) = (" + std::to_string(l) + ", " + std::to_string(m) +
                          ") out of range");
  }
  const std::size_t i = index(l, std::abs(m));
  std::complex<double> v(re_[i], im_[i]);
  if (m < 0) {
    v = std::conj(v);
    if (m % 2 != 0) v = -v;
  }
  return v;
}

void HarmonicCoefficients::set(int l, int m, std::complex<double> v) {
  if (l < 0 || l > lmax_ || m < 0 || m > l) {
    throw ValidationError("HarmonicCoefficients::set: need 0 <= m <= l <= lmax");
  }
  const std::size_t i = index(l, m);
  re_[i] = v.real();
  im_[i] = v.imag();
}

double HarmonicCoefficients::squared_norm() const {
  double total = 0.0;
  for (int m = 0; m <= lmax_; ++m) {
    const double w = m == 0 ? 1.0 : 2.0;
    for (int l = m; l <= lmax_; ++l) {
      const std::size_t i = index(l, m);
      total += w * (re_[i] * re_[i] + im_[i] * im_[i]);
    }
  }
  return total;
}

HarmonicCoefficients& HarmonicCoefficients::operator+=(const HarmonicCoefficients& o) {
  if (o.lmax_ != lmax_) throw ValidationError("HarmonicCoefficients: lmax mismatch in +=");
  for (std::size_t i = 0; i < re_.size(); ++i) {
    re_[i] += o.re_[i];
    im_[i] += o.im_[i];
  }
  return *this;
}

HarmonicCoefficients sample_alm(const PowerSpectrum& spectrum, std::uint64_t seed) {
  const int L = spectrum.lmax();
  HarmonicCoefficients alm(L);
  for (int l = 0; l <= L; ++l) {
    const double cl = spectrum.cl[l];
    if (cl == 0.0) continue;
    for (int m = 0; m <= l; ++m) {
      const auto [g1, g2] = counter_normal_pair(seed, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(m));
      if (m == 0) {
        alm.set(l, 0, std::sqrt(cl) * g1);
      } else {
        const double s = std::sqrt(cl / 2.0);
        alm.set(l, m, {s * g1, s * g2});
      }
    }
  }
  return alm;
}

std::vector<double> evaluate_field(const HarmonicCoefficients& alm, std::span<const UnitPoint> points) {
  std::vector<double> out(points.size(), 0.0);
  if (alm.lmax() < 0 || points.empty()) return out;
  double scale = 0.0;
  for (std::size_t i = 0; i < alm.size(); ++i) scale = std::max({scale, std::abs(alm.re()[i]), std::abs(alm.im()[i])});
  for (int l = 0; l <= alm.lmax(); ++l) {
    const double residue = std::abs(alm.im()[alm.index(l, 0)]);
    if (residue > 1e-10 * std::max(scale, 1e-300)) {
      throw NumericIntegrityError("evaluate_field: a_" + std::to_string(l) + ",0 has imaginary part " +
                                  std::to_string(residue));
    }
  }
  const kernels::LegendreTable table(alm.lmax());
  const kernels::PointSet set(points);
  kernels::active_kernels().synthesize(table, alm.re().data(), alm.im().data(), set, out.data());
  return out;
}

double Modulation::operator()(const UnitPoint& x) const {
  const double d = x.dot(axis);
  const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  return 1.0 + amplitude * sign;
}

std::vector<double> sample_anisotropic(const PowerSpectrum& spectrum, const Modulation& modulation,
                                       std::uint64_t seed, std::span<const UnitPoint> points) {
  if (!(std::abs(modulation.amplitude) < 1.0)) {
    throw ValidationError("sample_anisotropic: modulation factor 1 +- A must stay positive (|A| < 1)");
  }
  std::vector<double> values = evaluate_field(sample_alm(spectrum, seed), points);
  for (std::size_t k = 0; k < points.size(); ++k) values[k] *= modulation(points[k]);
  return values;
}

HarmonicCoefficients project_to_alm(std::span<const UnitPoint> points, std::span<const double> weights,
                                    std::span<const double> values, int lmax) {
  if (points.size() != weights.size() || points.size() != values.size()) {
    throw ValidationError("project_to_alm: points, weights and values differ in length");
  }
  HarmonicCoefficients alm(lmax);
  std::vector<double> wv(values.size());
  for (std::size_t k = 0; k < wv.size(); ++k) wv[k] = weights[k] * values[k];
  const kernels::LegendreTable table(lmax);
  const kernels::PointSet set(points);
  kernels::active_kernels().adjoint(table, set, wv.data(), alm.re().data(), alm.im().data());
  return alm;
}

HarmonicCoefficients anisotropic_alm(const PowerSpectrum& spectrum, const Modulation& modulation,
                                     std::uint64_t seed, int lmax_out) {
  QuadratureGrid grid = split_product_grid_for_degree(spectrum.lmax() + lmax_out);
  const UnitPoint axis = UnitPoint::normalized(modulation.axis.x, modulation.axis.y, modulation.axis.z);
  for (auto& p : grid.points) p = rotate_from_north(p, axis);
  const std::vector<double> values = sample_anisotropic(spectrum, modulation, seed, grid.points);
  return project_to_alm(grid.points, grid.weights, values, lmax_out);
}

double field_covariance(const PowerSpectrum& spectrum, const UnitPoint& x, const UnitPoint& y) {
  const double t = std::clamp(x.dot(y), -1.0, 1.0);
  double total = 0.0;
  for (int l = 0; l <= spectrum.lmax(); ++l) total += spectrum.cl[l] * kernel_L(l, t);
  return total;
}

}  // namespace needlets
