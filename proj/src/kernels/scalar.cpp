#include <cmath>

#include "needlets/kernels.hpp"

namespace needlets::kernels {

namespace {

void synthesize_scalar(const LegendreTable& tab, const double* c_re, const double* c_im, const PointSet& pts,
                       double* out) {
  const int L = tab.lmax();
  const double* A = tab.a();
  const double* B = tab.b();
  const double* D = tab.diag();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double t = pts.cos_theta()[k], s = pts.sin_theta()[k];
    const double cp = pts.cos_phi()[k], sp = pts.sin_phi()[k];
    double mm = D[0], cm = 1.0, sm = 0.0, total = 0.0;
    for (int m = 0; m <= L; ++m) {
      if (m > 0) {
        mm *= D[m] * s;
        if (std::abs(mm) < kSeedFlush) mm = 0.0;
        const double c_next = cm * cp - sm * sp;
        sm = sm * cp + cm * sp;
        cm = c_next;
      }
      const std::size_t off = tab.offset(m);
      double p2 = 0.0, p1 = mm;
      double ar = p1 * c_re[off], ai = p1 * c_im[off];
      for (int l = m + 1; l <= L; ++l) {
        const std::size_t i = off + static_cast<std::size_t>(l - m);
        const double p = A[i] * (t * p1 - B[i] * p2);
        ar += p * c_re[i];
        ai += p * c_im[i];
        p2 = p1;
        p1 = p;
      }
      total += (m == 0 ? 1.0 : 2.0) * (ar * cm - ai * sm);
    }
    out[k] = total;
  }
}

void adjoint_scalar(const LegendreTable& tab, const PointSet& pts, const double* values, double* out_re,
                    double* out_im) {
  const int L = tab.lmax();
  const double* A = tab.a();
  const double* B = tab.b();
  const double* D = tab.diag();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double t = pts.cos_theta()[k], s = pts.sin_theta()[k];
    const double cp = pts.cos_phi()[k], sp = pts.sin_phi()[k];
    const double v = values[k];
    double mm = D[0], cm = 1.0, sm = 0.0;
    for (int m = 0; m <= L; ++m) {
      if (m > 0) {
        mm *= D[m] * s;
        if (std::abs(mm) < kSeedFlush) mm = 0.0;
        const double c_next = cm * cp - sm * sp;
        sm = sm * cp + cm * sp;
        cm = c_next;
      }
      const double wr = v * cm, wi = -v * sm;
      const std::size_t off = tab.offset(m);
      double p2 = 0.0, p1 = mm;
      out_re[off] += wr * p1;
      out_im[off] += wi * p1;
      for (int l = m + 1; l <= L; ++l) {
        const std::size_t i = off + static_cast<std::size_t>(l - m);
        const double p = A[i] * (t * p1 - B[i] * p2);
        out_re[i] += wr * p;
        out_im[i] += wi * p;
        p2 = p1;
        p1 = p;
      }
    }
  }
}

void legendre_series_scalar(const double* w, int lmax, const double* t, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x = t[i];
    double p2 = 1.0, p1 = x;
    double acc = w[0];
    if (lmax >= 1) acc += w[1] * x;
    for (int l = 2; l <= lmax; ++l) {
      const double p = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p2) / l;
      acc += w[l] * p;
      p2 = p1;
      p1 = p;
    }
    out[i] = acc;
  }
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet set{"scalar", &synthesize_scalar, &adjoint_scalar, &legendre_series_scalar};
  return set;
}

}  // namespace needlets::kernels
