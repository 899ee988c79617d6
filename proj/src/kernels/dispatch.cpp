#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>

#include "needlets/error.hpp"
#include "needlets/kernels.hpp"

namespace needlets::kernels {

#if defined(NEEDLETS_HAVE_AVX2)
const KernelSet& avx2_kernel_set();  // kernels/avx2.cpp
#endif

LegendreTable::LegendreTable(int lmax) : lmax_(lmax) {
  if (lmax < 0) throw ValidationError("LegendreTable: lmax must be >= 0");
  const std::size_t n = offset(lmax + 1);
  a_.assign(n, 0.0);
  b_.assign(n, 0.0);
  diag_.assign(static_cast<std::size_t>(lmax) + 1, 1.0 / std::sqrt(4.0 * std::numbers::pi));
  for (int m = 1; m <= lmax; ++m) diag_[m] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m));
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 1; l <= lmax; ++l) {
      const double ll = static_cast<double>(l) * l, mm = static_cast<double>(m) * m;
      const double lm1 = static_cast<double>(l - 1) * (l - 1);
      a_[index(l, m)] = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
      b_[index(l, m)] = std::sqrt((lm1 - mm) / (4.0 * lm1 - 1.0));
    }
  }
}

PointSet::PointSet(std::span<const UnitPoint> points) {
  const auto n = points.size();
  cos_theta_.resize(n);
  sin_theta_.resize(n);
  cos_phi_.resize(n);
  sin_phi_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = points[k];
    const double rho = std::hypot(p.x, p.y);
    const double r = std::hypot(rho, p.z);
    cos_theta_[k] = p.z / r;
    sin_theta_[k] = rho / r;
    if (rho > 0.0) {
      cos_phi_[k] = p.x / rho;
      sin_phi_[k] = p.y / rho;
    } else {
      cos_phi_[k] = 1.0;
      sin_phi_[k] = 0.0;
    }
  }
}

const KernelSet* avx2_kernels() {
#if defined(NEEDLETS_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernel_set() : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active_kernels() {
  static const KernelSet* chosen = [] {
    const char* env = std::getenv("NEEDLETS_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const auto* v = avx2_kernels()) return v;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace needlets::kernels
