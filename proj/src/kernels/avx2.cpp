// AVX2/FMA variants.  This translation unit is compiled with -mavx2 -mfma and
// only entered after a runtime CPU check (kernels/dispatch.cpp).

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "needlets/kernels.hpp"

#ifndef __AVX2__
#error kernels/avx2.cpp must be compiled with -mavx2 -mfma
#endif

namespace needlets::kernels {

namespace {

constexpr std::size_t kLanes = 4;
constexpr std::size_t kBlock = 2 * kLanes;  // two interleaved vectors hide FMA latency

// Copy up to kBlock point attributes, zero-padding the tail.
struct Block {
  alignas(32) double t[kBlock], s[kBlock], cp[kBlock], sp[kBlock], v[kBlock];
};

std::size_t load_block(const PointSet& pts, const double* values, std::size_t k0, Block& b) {
  const std::size_t n = std::min(kBlock, pts.size() - k0);
  for (std::size_t i = 0; i < kBlock; ++i) {
    const bool live = i < n;
    b.t[i] = live ? pts.cos_theta()[k0 + i] : 0.0;
    b.s[i] = live ? pts.sin_theta()[k0 + i] : 0.0;
    b.cp[i] = live ? pts.cos_phi()[k0 + i] : 1.0;
    b.sp[i] = live ? pts.sin_phi()[k0 + i] : 0.0;
    b.v[i] = (live && values != nullptr) ? values[k0 + i] : 0.0;
  }
  return n;
}

inline __m256d flush_small(__m256d x) {
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d keep = _mm256_cmp_pd(_mm256_and_pd(x, abs_mask), _mm256_set1_pd(kSeedFlush), _CMP_GE_OQ);
  return _mm256_and_pd(x, keep);
}

void synthesize_avx2(const LegendreTable& tab, const double* c_re, const double* c_im, const PointSet& pts,
                     double* out) {
  const int L = tab.lmax();
  const double* A = tab.a();
  const double* B = tab.b();
  const double* D = tab.diag();
  Block blk;
  alignas(32) double res[kBlock];
  for (std::size_t k0 = 0; k0 < pts.size(); k0 += kBlock) {
    const std::size_t n = load_block(pts, nullptr, k0, blk);
    const __m256d t0 = _mm256_load_pd(blk.t), t1 = _mm256_load_pd(blk.t + 4);
    const __m256d s0 = _mm256_load_pd(blk.s), s1 = _mm256_load_pd(blk.s + 4);
    const __m256d cp0 = _mm256_load_pd(blk.cp), cp1 = _mm256_load_pd(blk.cp + 4);
    const __m256d sp0 = _mm256_load_pd(blk.sp), sp1 = _mm256_load_pd(blk.sp + 4);
    __m256d mm0 = _mm256_set1_pd(D[0]), mm1 = mm0;
    __m256d cm0 = _mm256_set1_pd(1.0), cm1 = cm0;
    __m256d sm0 = _mm256_setzero_pd(), sm1 = sm0;
    __m256d tot0 = _mm256_setzero_pd(), tot1 = tot0;
    for (int m = 0; m <= L; ++m) {
      if (m > 0) {
        const __m256d dm = _mm256_set1_pd(D[m]);
        mm0 = flush_small(_mm256_mul_pd(_mm256_mul_pd(mm0, dm), s0));
        mm1 = flush_small(_mm256_mul_pd(_mm256_mul_pd(mm1, dm), s1));
        const __m256d c0 = _mm256_fmsub_pd(cm0, cp0, _mm256_mul_pd(sm0, sp0));
        const __m256d c1 = _mm256_fmsub_pd(cm1, cp1, _mm256_mul_pd(sm1, sp1));
        sm0 = _mm256_fmadd_pd(sm0, cp0, _mm256_mul_pd(cm0, sp0));
        sm1 = _mm256_fmadd_pd(sm1, cp1, _mm256_mul_pd(cm1, sp1));
        cm0 = c0;
        cm1 = c1;
      }
      const std::size_t off = tab.offset(m);
      __m256d q0 = _mm256_setzero_pd(), q1 = q0;  // Pbar_{l-2}
      __m256d p0 = mm0, p1 = mm1;                 // Pbar_{l-1}
      const __m256d cr = _mm256_set1_pd(c_re[off]), ci = _mm256_set1_pd(c_im[off]);
      __m256d ar0 = _mm256_mul_pd(p0, cr), ar1 = _mm256_mul_pd(p1, cr);
      __m256d ai0 = _mm256_mul_pd(p0, ci), ai1 = _mm256_mul_pd(p1, ci);
      for (int l = m + 1; l <= L; ++l) {
        const std::size_t i = off + static_cast<std::size_t>(l - m);
        const __m256d a = _mm256_set1_pd(A[i]), b = _mm256_set1_pd(B[i]);
        const __m256d n0 = _mm256_mul_pd(a, _mm256_fmsub_pd(t0, p0, _mm256_mul_pd(b, q0)));
        const __m256d n1 = _mm256_mul_pd(a, _mm256_fmsub_pd(t1, p1, _mm256_mul_pd(b, q1)));
        const __m256d xr = _mm256_set1_pd(c_re[i]), xi = _mm256_set1_pd(c_im[i]);
        ar0 = _mm256_fmadd_pd(n0, xr, ar0);
        ar1 = _mm256_fmadd_pd(n1, xr, ar1);
        ai0 = _mm256_fmadd_pd(n0, xi, ai0);
        ai1 = _mm256_fmadd_pd(n1, xi, ai1);
        q0 = p0;
        q1 = p1;
        p0 = n0;
        p1 = n1;
      }
      const __m256d w = _mm256_set1_pd(m == 0 ? 1.0 : 2.0);
      tot0 = _mm256_fmadd_pd(w, _mm256_fmsub_pd(ar0, cm0, _mm256_mul_pd(ai0, sm0)), tot0);
      tot1 = _mm256_fmadd_pd(w, _mm256_fmsub_pd(ar1, cm1, _mm256_mul_pd(ai1, sm1)), tot1);
    }
    _mm256_store_pd(res, tot0);
    _mm256_store_pd(res + 4, tot1);
    std::copy(res, res + n, out + k0);
  }
}

struct Lanes {
  __m256d v;
};

void adjoint_avx2(const LegendreTable& tab, const PointSet& pts, const double* values, double* out_re,
                  double* out_im) {
  const int L = tab.lmax();
  const double* A = tab.a();
  const double* B = tab.b();
  const double* D = tab.diag();
  const std::size_t nlm = tab.size();
  // Per-lane partial sums, reduced once at the end.
  std::vector<Lanes> acc_re(nlm, Lanes{_mm256_setzero_pd()}), acc_im(nlm, Lanes{_mm256_setzero_pd()});
  Block blk;
  for (std::size_t k0 = 0; k0 < pts.size(); k0 += kBlock) {
    load_block(pts, values, k0, blk);
    const __m256d t0 = _mm256_load_pd(blk.t), t1 = _mm256_load_pd(blk.t + 4);
    const __m256d s0 = _mm256_load_pd(blk.s), s1 = _mm256_load_pd(blk.s + 4);
    const __m256d cp0 = _mm256_load_pd(blk.cp), cp1 = _mm256_load_pd(blk.cp + 4);
    const __m256d sp0 = _mm256_load_pd(blk.sp), sp1 = _mm256_load_pd(blk.sp + 4);
    const __m256d v0 = _mm256_load_pd(blk.v), v1 = _mm256_load_pd(blk.v + 4);
    __m256d mm0 = _mm256_set1_pd(D[0]), mm1 = mm0;
    __m256d cm0 = _mm256_set1_pd(1.0), cm1 = cm0;
    __m256d sm0 = _mm256_setzero_pd(), sm1 = sm0;
    for (int m = 0; m <= L; ++m) {
      if (m > 0) {
        const __m256d dm = _mm256_set1_pd(D[m]);
        mm0 = flush_small(_mm256_mul_pd(_mm256_mul_pd(mm0, dm), s0));
        mm1 = flush_small(_mm256_mul_pd(_mm256_mul_pd(mm1, dm), s1));
        const __m256d c0 = _mm256_fmsub_pd(cm0, cp0, _mm256_mul_pd(sm0, sp0));
        const __m256d c1 = _mm256_fmsub_pd(cm1, cp1, _mm256_mul_pd(sm1, sp1));
        sm0 = _mm256_fmadd_pd(sm0, cp0, _mm256_mul_pd(cm0, sp0));
        sm1 = _mm256_fmadd_pd(sm1, cp1, _mm256_mul_pd(cm1, sp1));
        cm0 = c0;
        cm1 = c1;
      }
      const __m256d wr0 = _mm256_mul_pd(v0, cm0), wr1 = _mm256_mul_pd(v1, cm1);
      const __m256d wi0 = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(v0, sm0));
      const __m256d wi1 = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(v1, sm1));
      const std::size_t off = tab.offset(m);
      __m256d q0 = _mm256_setzero_pd(), q1 = q0;
      __m256d p0 = mm0, p1 = mm1;
      acc_re[off].v = _mm256_fmadd_pd(wr0, p0, _mm256_fmadd_pd(wr1, p1, acc_re[off].v));
      acc_im[off].v = _mm256_fmadd_pd(wi0, p0, _mm256_fmadd_pd(wi1, p1, acc_im[off].v));
      for (int l = m + 1; l <= L; ++l) {
        const std::size_t i = off + static_cast<std::size_t>(l - m);
        const __m256d a = _mm256_set1_pd(A[i]), b = _mm256_set1_pd(B[i]);
        const __m256d n0 = _mm256_mul_pd(a, _mm256_fmsub_pd(t0, p0, _mm256_mul_pd(b, q0)));
        const __m256d n1 = _mm256_mul_pd(a, _mm256_fmsub_pd(t1, p1, _mm256_mul_pd(b, q1)));
        acc_re[i].v = _mm256_fmadd_pd(wr0, n0, _mm256_fmadd_pd(wr1, n1, acc_re[i].v));
        acc_im[i].v = _mm256_fmadd_pd(wi0, n0, _mm256_fmadd_pd(wi1, n1, acc_im[i].v));
        q0 = p0;
        q1 = p1;
        p0 = n0;
        p1 = n1;
      }
    }
  }
  alignas(32) double lane[kLanes];
  for (std::size_t i = 0; i < nlm; ++i) {
    _mm256_store_pd(lane, acc_re[i].v);
    out_re[i] += (lane[0] + lane[1]) + (lane[2] + lane[3]);
    _mm256_store_pd(lane, acc_im[i].v);
    out_im[i] += (lane[0] + lane[1]) + (lane[2] + lane[3]);
  }
}

void legendre_series_avx2(const double* w, int lmax, const double* t, std::size_t n, double* out) {
  std::vector<double> alpha(static_cast<std::size_t>(std::max(lmax, 1)) + 1), beta(alpha.size());
  for (int l = 2; l <= lmax; ++l) {
    alpha[l] = (2.0 * l - 1.0) / l;
    beta[l] = (l - 1.0) / l;
  }
  alignas(32) double xs[kBlock], res[kBlock];
  for (std::size_t i0 = 0; i0 < n; i0 += kBlock) {
    const std::size_t cnt = std::min(kBlock, n - i0);
    for (std::size_t i = 0; i < kBlock; ++i) xs[i] = i < cnt ? t[i0 + i] : 0.0;
    const __m256d x0 = _mm256_load_pd(xs), x1 = _mm256_load_pd(xs + 4);
    __m256d q0 = _mm256_set1_pd(1.0), q1 = q0;
    __m256d p0 = x0, p1 = x1;
    __m256d acc0 = _mm256_set1_pd(w[0]), acc1 = acc0;
    if (lmax >= 1) {
      const __m256d w1 = _mm256_set1_pd(w[1]);
      acc0 = _mm256_fmadd_pd(w1, x0, acc0);
      acc1 = _mm256_fmadd_pd(w1, x1, acc1);
    }
    for (int l = 2; l <= lmax; ++l) {
      const __m256d al = _mm256_set1_pd(alpha[l]), be = _mm256_set1_pd(beta[l]), wl = _mm256_set1_pd(w[l]);
      const __m256d n0 = _mm256_fmsub_pd(_mm256_mul_pd(al, x0), p0, _mm256_mul_pd(be, q0));
      const __m256d n1 = _mm256_fmsub_pd(_mm256_mul_pd(al, x1), p1, _mm256_mul_pd(be, q1));
      acc0 = _mm256_fmadd_pd(wl, n0, acc0);
      acc1 = _mm256_fmadd_pd(wl, n1, acc1);
      q0 = p0;
      q1 = p1;
      p0 = n0;
      p1 = n1;
    }
    _mm256_store_pd(res, acc0);
    _mm256_store_pd(res + 4, acc1);
    std::copy(res, res + cnt, out + i0);
  }
}

}  // namespace

const KernelSet& avx2_kernel_set() {
  static const KernelSet set{"avx2", &synthesize_avx2, &adjoint_avx2, &legendre_series_avx2};
  return set;
}

}  // namespace needlets::kernels
