#pragma once

// Data-parallel inner loops of harmonic synthesis/analysis.  Every kernel has
// a scalar reference implementation; vector variants are selected at runtime
// and must agree with the reference to rounding (see tests/test_kernels.cpp).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "needlets/geometry.hpp"

namespace needlets::kernels {

/// Recurrence coefficients for the fully normalised associated Legendre
/// functions Pbar_lm (Condon-Shortley phase, Y_lm = Pbar_lm(cos t) e^{i m phi}).
/// Storage is m-major: index(l, m) = offset(m) + (l - m).
class LegendreTable {
 public:
  explicit LegendreTable(int lmax);

  int lmax() const { return lmax_; }
  std::size_t size() const { return a_.size(); }
  std::size_t offset(int m) const { return static_cast<std::size_t>(m) * (2 * lmax_ + 3 - m) / 2; }
  std::size_t index(int l, int m) const { return offset(m) + static_cast<std::size_t>(l - m); }

  // Pbar_lm = a_lm (t Pbar_{l-1,m} - b_lm Pbar_{l-2,m}) for l > m.
  const double* a() const { return a_.data(); }
  const double* b() const { return b_.data(); }
  // Pbar_mm = diag_m sin(t) Pbar_{m-1,m-1}.
  const double* diag() const { return diag_.data(); }

 private:
  int lmax_;
  std::vector<double> a_, b_, diag_;
};

/// Points in structure-of-arrays form: cos/sin of colatitude and longitude.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::span<const UnitPoint> points);

  std::size_t size() const { return cos_theta_.size(); }
  const double* cos_theta() const { return cos_theta_.data(); }
  const double* sin_theta() const { return sin_theta_.data(); }
  const double* cos_phi() const { return cos_phi_.data(); }
  const double* sin_phi() const { return sin_phi_.data(); }

 private:
  std::vector<double> cos_theta_, sin_theta_, cos_phi_, sin_phi_;
};

/// Seeds below this magnitude are flushed to zero; at lmax <= 512 the
/// functions they would seed stay below ~1e-200 (no denormal stalls).
inline constexpr double kSeedFlush = 1e-280;

struct KernelSet {
  std::string_view name;

  /// out[k] = sum_m w_m Re(e^{i m phi_k} sum_l c_lm Pbar_lm(cos theta_k)),
  /// w_0 = 1, w_m = 2: the real field whose m >= 0 coefficients are c.
  void (*synthesize)(const LegendreTable& table, const double* c_re, const double* c_im, const PointSet& points,
                     double* out);

  /// out_lm += sum_k v_k Pbar_lm(cos theta_k) e^{-i m phi_k}.
  void (*adjoint)(const LegendreTable& table, const PointSet& points, const double* values, double* out_re,
                  double* out_im);

  /// out[i] = sum_{l=0}^{lmax} w_l P_l(t_i) (ordinary Legendre polynomials).
  void (*legendre_series)(const double* w, int lmax, const double* t, std::size_t n, double* out);
};

const KernelSet& scalar_kernels();

/// AVX2/FMA variant, or nullptr if not compiled in or unsupported by the CPU.
const KernelSet* avx2_kernels();

/// Best available variant.  NEEDLETS_KERNELS=scalar forces the reference.
const KernelSet& active_kernels();

}  // namespace needlets::kernels
