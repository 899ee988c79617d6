#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "needlets/geometry.hpp"

namespace needlets {

/// Angular power spectrum C_0..C_lmax.  C_0 is always 0 (no monopole).
struct PowerSpectrum {
  std::string model;  // "power_law" or "tabulated"
  double alpha = 0.0;
  double G0 = 0.0;
  std::vector<double> cl;

  int lmax() const { return static_cast<int>(cl.size()) - 1; }
  double operator[](int l) const { return l >= 0 && l <= lmax() ? cl[l] : 0.0; }
};

/// C_l = G0 l^-alpha for l >= 1.  Requires alpha > 2 (regularly varying
/// spectra with summable variance and decaying needlet correlations).
PowerSpectrum make_power_law(double alpha, double G0, int lmax);
/// Arbitrary nonnegative C_l; the l = 0 entry is forced to 0.
PowerSpectrum make_tabulated(std::vector<double> cl);

/// a_lm for 0 <= m <= l <= lmax in m-major order (same layout as
/// kernels::LegendreTable); negative orders follow a_{l,-m} = (-1)^m conj(a_lm).
class HarmonicCoefficients {
 public:
  HarmonicCoefficients() = default;
  explicit HarmonicCoefficients(int lmax);

  int lmax() const { return lmax_; }
  std::size_t size() const { return re_.size(); }
  std::size_t index(int l, int m) const {
    return static_cast<std::size_t>(m) * (2 * lmax_ + 3 - m) / 2 + static_cast<std::size_t>(l - m);
  }

  /// Any -l <= m <= l.
  std::complex<double> at(int l, int m) const;
  /// m >= 0 only; negative orders are implied.
  void set(int l, int m, std::complex<double> v);

  std::vector<double>& re() { return re_; }
  std::vector<double>& im() { return im_; }
  const std::vector<double>& re() const { return re_; }
  const std::vector<double>& im() const { return im_; }

  /// Sum over all (l, m), negative m included, of |a_lm|^2 = ||T||^2_{L^2}.
  double squared_norm() const;

  HarmonicCoefficients& operator+=(const HarmonicCoefficients& o);

 private:
  int lmax_ = -1;
  std::vector<double> re_, im_;
};

/// a_l0 ~ N(0, C_l); for m > 0 real and imaginary parts ~ N(0, C_l / 2).
/// Every (l, m) draws from its own counter-based substream of `seed`.
HarmonicCoefficients sample_alm(const PowerSpectrum& spectrum, std::uint64_t seed);

/// T(x) = sum_lm a_lm Y_lm(x).  Throws NumericIntegrityError if some a_l0
/// carries an imaginary part above 1e-10 (relative to max |a_lm|).
std::vector<double> evaluate_field(const HarmonicCoefficients& alm, std::span<const UnitPoint> points);

/// Hemispheric variance modulation m(x) = 1 + A sign(<x, axis>).
struct Modulation {
  double amplitude = 0.0;
  UnitPoint axis = kNorthPole;
  double operator()(const UnitPoint& x) const;
};

/// m(x) T(x) at the given points, T the isotropic sample for `seed`.
std::vector<double> sample_anisotropic(const PowerSpectrum& spectrum, const Modulation& modulation,
                                       std::uint64_t seed, std::span<const UnitPoint> points);

/// Harmonic coefficients up to lmax_out of m(x) T(x), by quadrature on a
/// product grid exact for degree spectrum.lmax() + lmax_out.  With A = 0 this
/// reproduces sample_alm truncated to lmax_out.
HarmonicCoefficients anisotropic_alm(const PowerSpectrum& spectrum, const Modulation& modulation,
                                     std::uint64_t seed, int lmax_out);

/// a_lm = sum_k w_k f(x_k) conj(Y_lm(x_k)).
HarmonicCoefficients project_to_alm(std::span<const UnitPoint> points, std::span<const double> weights,
                                    std::span<const double> values, int lmax);

/// Exact Cov(T(x), T(y)) = sum_l C_l L_l(<x, y>).
double field_covariance(const PowerSpectrum& spectrum, const UnitPoint& x, const UnitPoint& y);

}  // namespace needlets
