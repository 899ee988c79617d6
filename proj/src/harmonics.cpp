#include "needlets/harmonics.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "needlets/error.hpp"

namespace needlets {

namespace {

constexpr double kPi = std::numbers::pi;

double checked_cosine(double t) {
  if (!(std::abs(t) <= 1.0 + 1e-12)) {
    throw ValidationError("Legendre argument outside [-1, 1]: " + std::to_string(t));
  }
  return std::clamp(t, -1.0, 1.0);
}

// Value v * 2^e with v kept in a comfortable range.
struct Scaled {
  double v = 1.0;
  int e = 0;
  void renormalize() {
    if (v != 0.0 && (std::abs(v) < 0x1p-600 || std::abs(v) > 0x1p600)) {
      int k = 0;
      v = std::frexp(v, &k);
      e += k;
    }
  }
};

// Pbar_lm(cos theta) for one (l, m), normalised so that
// Y_lm = Pbar_lm e^{i m phi}.
double normalized_legendre(int l, int m, double t, double s) {
  Scaled pmm{1.0 / std::sqrt(4.0 * kPi), 0};
  for (int k = 1; k <= m; ++k) {
    pmm.v *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
    pmm.renormalize();
  }
  if (pmm.v == 0.0) return 0.0;
  if (l == m) return std::ldexp(pmm.v, pmm.e);
  double p2 = 0.0, p1 = pmm.v;
  int e = pmm.e;
  const double mm = static_cast<double>(m) * m;
  for (int n = m + 1; n <= l; ++n) {
    const double nn = static_cast<double>(n) * n;
    const double n1 = static_cast<double>(n - 1) * (n - 1);
    const double a = std::sqrt((4.0 * nn - 1.0) / (nn - mm));
    const double b = std::sqrt((n1 - mm) / (4.0 * n1 - 1.0));
    const double p = a * (t * p1 - b * p2);
    p2 = p1;
    p1 = p;
    if (std::abs(p1) > 0x1p600) {
      p1 = std::ldexp(p1, -600);
      p2 = std::ldexp(p2, -600);
      e += 600;
    }
  }
  return std::ldexp(p1, e);
}

}  // namespace

double legendre_p(int l, double t) {
  if (l < 0) throw ValidationError("legendre_p: negative degree");
  const double x = checked_cosine(t);
  if (l == 0) return 1.0;
  double p2 = 1.0, p1 = x;
  for (int n = 2; n <= l; ++n) {
    const double p = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p2) / n;
    p2 = p1;
    p1 = p;
  }
  return p1;
}

double kernel_L(int l, double t) { return (2.0 * l + 1.0) / (4.0 * kPi) * legendre_p(l, t); }

std::complex<double> eval_ylm(int l, int m, const UnitPoint& p) {
  if (l < 0 || std::abs(m) > l) {
    throw ValidationError("eval_ylm: need |m| <= l, got l=" + std::to_string(l) + " m=" + std::to_string(m));
  }
  const int am = std::abs(m);
  const double rho = std::hypot(p.x, p.y);
  const double r = std::hypot(rho, p.z);
  const double t = p.z / r, s = rho / r;
  const double phi = std::atan2(p.y, p.x);
  const double pl = normalized_legendre(l, am, t, s);
  std::complex<double> y = std::polar(pl, am * phi);
  if (m < 0) {
    y = std::conj(y);
    if (am % 2 == 1) y = -y;
  }
  return y;
}

void real_harmonics(int lmax, const UnitPoint& p, std::span<double> out) {
  const std::size_t need = static_cast<std::size_t>(lmax + 1) * (lmax + 1);
  if (out.size() < need) throw ValidationError("real_harmonics: output span too small");
  const double rho = std::hypot(p.x, p.y);
  const double r = std::hypot(rho, p.z);
  const double t = p.z / r, s = rho / r;
  const double cp = rho > 0.0 ? p.x / rho : 1.0, sp = rho > 0.0 ? p.y / rho : 0.0;
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  double cm = 1.0, sm = 0.0;
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) {
      pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
      if (std::abs(pmm) < 1e-280) pmm = 0.0;
      const double c = cm * cp - sm * sp;
      sm = sm * cp + cm * sp;
      cm = c;
    }
    const double mm = static_cast<double>(m) * m;
    double p2 = 0.0, p1 = pmm;
    for (int l = m; l <= lmax; ++l) {
      if (l > m) {
        const double ll = static_cast<double>(l) * l, l1 = static_cast<double>(l - 1) * (l - 1);
        const double pn = std::sqrt((4.0 * ll - 1.0) / (ll - mm)) * (t * p1 - std::sqrt((l1 - mm) / (4.0 * l1 - 1.0)) * p2);
        p2 = p1;
        p1 = pn;
      }
      const std::size_t base = static_cast<std::size_t>(l) * l + l;
      if (m == 0) {
        out[base] = p1;
      } else {
        out[base + m] = std::numbers::sqrt2 * p1 * cm;
        out[base - m] = std::numbers::sqrt2 * p1 * sm;
      }
    }
  }
}

GaussLegendre gauss_legendre(std::size_t n) {
  if (n == 0) throw ValidationError("gauss_legendre: need at least one node");
  const int deg = static_cast<int>(n);
  // legendre_p_zeros returns the nonnegative roots in ascending order.
  const auto pos = boost::math::legendre_p_zeros<double>(deg);
  GaussLegendre g;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
    if (*it != 0.0) g.nodes.push_back(-*it);
  }
  for (double x : pos) g.nodes.push_back(x);
  for (double x : g.nodes) {
    const double d = boost::math::legendre_p_prime(deg, x);
    g.weights.push_back(2.0 / ((1.0 - x * x) * d * d));
  }
  return g;
}

namespace {

QuadratureGrid grid_from_rule(const std::vector<double>& z_nodes, const std::vector<double>& z_weights,
                              std::size_t nlon) {
  QuadratureGrid grid;
  grid.points.reserve(z_nodes.size() * nlon);
  grid.weights.reserve(z_nodes.size() * nlon);
  const double dphi = 2.0 * kPi / static_cast<double>(nlon);
  for (std::size_t i = 0; i < z_nodes.size(); ++i) {
    const double z = z_nodes[i];
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (std::size_t k = 0; k < nlon; ++k) {
      const double phi = dphi * (static_cast<double>(k) + 0.5);
      grid.points.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
      grid.weights.push_back(z_weights[i] * dphi);
    }
  }
  return grid;
}

}  // namespace

QuadratureGrid product_grid(std::size_t nlat, std::size_t nlon) {
  if (nlon == 0) throw ValidationError("product_grid: nlon must be positive");
  const auto gl = gauss_legendre(nlat);
  return grid_from_rule(gl.nodes, gl.weights, nlon);
}

QuadratureGrid split_product_grid_for_degree(int degree) {
  const std::size_t nlat = static_cast<std::size_t>(std::max(degree, 0)) / 2 + 1;
  const auto gl = gauss_legendre(nlat);
  std::vector<double> z, w;
  for (double sign : {-1.0, 1.0}) {
    for (std::size_t i = 0; i < nlat; ++i) {
      z.push_back(sign * 0.5 * (gl.nodes[i] + 1.0));
      w.push_back(0.5 * gl.weights[i]);
    }
  }
  return grid_from_rule(z, w, static_cast<std::size_t>(degree) + 1);
}

QuadratureGrid product_grid_for_degree(int degree) {
  const std::size_t nlat = static_cast<std::size_t>(std::max(degree, 0)) / 2 + 1;
  return product_grid(nlat, static_cast<std::size_t>(degree) + 1);
}

}  // namespace needlets
