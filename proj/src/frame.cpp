#include "needlets/frame.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "needlets/error.hpp"
#include "needlets/harmonics.hpp"

namespace needlets {

namespace {

constexpr double kPi = std::numbers::pi;

double bump(double s, double a) {
  if (s <= a || s >= 1.0) return 0.0;
  return std::exp(-1.0 / ((s - a) * (1.0 - s)));
}

constexpr int kPanels = 2048;

// Fixed 20-point Gauss-Legendre; panels are narrow enough that this is exact
// to rounding for the smooth bump.
double integrate_bump(double lo, double hi, double a) {
  if (hi <= lo) return 0.0;
  return boost::math::quadrature::gauss<double, 20>::integrate([a](double s) { return bump(s, a); }, lo, hi);
}

int floor_power(double B, int e) {
  const double v = std::pow(B, e);
  return static_cast<int>(std::floor(v * (1.0 + 1e-14)));
}

}  // namespace

NeedletWindow::NeedletWindow(double B) : B_(B), norm_(0.0) {
  if (!(B > 1.0)) throw ValidationError("needlet window needs B > 1");
  const double a = 1.0 / B, h = (1.0 - a) / kPanels;
  std::vector<double> panel(kPanels);
  for (int i = 0; i < kPanels; ++i) panel[i] = integrate_bump(a + i * h, i + 1 == kPanels ? 1.0 : a + (i + 1) * h, a);
  left_.assign(kPanels + 1, 0.0);
  right_.assign(kPanels + 1, 0.0);
  for (int i = 0; i < kPanels; ++i) left_[i + 1] = left_[i] + panel[i];
  for (int i = kPanels; i-- > 0;) right_[i] = right_[i + 1] + panel[i];
  norm_ = left_[kPanels];
}

double NeedletWindow::phi(double xi) const {
  xi = std::abs(xi);
  const double a = 1.0 / B_;
  if (xi <= a) return 1.0;
  if (xi >= 1.0) return 0.0;
  const double h = (1.0 - a) / kPanels;
  const int i = std::clamp(static_cast<int>((xi - a) / h), 0, kPanels - 1);
  const double lo = a + i * h, hi = i + 1 == kPanels ? 1.0 : a + (i + 1) * h;
  // Sum over the shorter side for accuracy.
  const double v = xi < 0.5 * (a + 1.0) ? 1.0 - (left_[i] + integrate_bump(lo, xi, a)) / norm_
                                        : (right_[i + 1] + integrate_bump(xi, hi, a)) / norm_;
  return std::clamp(v, 0.0, 1.0);
}

double NeedletWindow::b_squared(double xi) const { return std::max(0.0, phi(xi / B_) - phi(xi)); }

double NeedletWindow::b(double xi) const { return std::sqrt(b_squared(xi)); }

Band level_band(double B, int j) {
  Band band;
  band.lo = (j >= 1 ? floor_power(B, j - 1) : 0) + 1;
  band.hi = floor_power(B, j + 1) - 1;
  return band;
}

NeedletFrame::NeedletFrame(const FrameConfig& config) : config_(config), window_(config.B) {
  if (config.jmin < 0 || config.jmax < config.jmin) throw ValidationError("frame needs 0 <= jmin <= jmax");
  if (!(config.c_net > 0.0)) throw ValidationError("frame needs c_net > 0");
  for (int j = config.jmin; j <= config.jmax; ++j) {
    FrameLevel lvl;
    lvl.j = j;
    lvl.band = level_band(config.B, j);
    lvl.epsilon = std::min(kPi, config.c_net * kPi * std::pow(config.B, -(j + 1)));
    auto net = std::make_shared<const MaximalNet>(
        build_maximal_net(lvl.epsilon, config.strategy, derive_seed(config.seed, {0x6c6576656c, static_cast<std::uint64_t>(j)})));
    const int target = std::min(2 * floor_power(config.B, j + 1), config.degree_cap);
    lvl.rule = cubature_weights(net, target, config.mode);
    lvl.b.assign(static_cast<std::size_t>(std::max(lvl.band.hi, 0)) + 1, 0.0);
    const double scale = std::pow(config.B, j);
    for (int l = lvl.band.lo; l <= lvl.band.hi; ++l) lvl.b[l] = window_.b(l / scale);
    lvl.soa = kernels::PointSet(lvl.rule.points());
    levels_.push_back(std::move(lvl));
  }
}

const FrameLevel& NeedletFrame::level(int j) const {
  if (j < config_.jmin || j > config_.jmax) {
    throw ValidationError("level " + std::to_string(j) + " is outside the frame's range [" +
                          std::to_string(config_.jmin) + ", " + std::to_string(config_.jmax) + "]");
  }
  return levels_[static_cast<std::size_t>(j - config_.jmin)];
}

int NeedletFrame::max_degree() const {
  int d = 0;
  for (const auto& l : levels_) d = std::max(d, l.band.hi);
  return d;
}

double needlet_eval(const NeedletFrame& frame, int j, std::size_t k, const UnitPoint& x) {
  const FrameLevel& lvl = frame.level(j);
  if (k >= lvl.size()) throw ValidationError("needlet_eval: k out of range for level " + std::to_string(j));
  if (lvl.band.empty()) return 0.0;
  const double t = std::clamp(x.dot(lvl.points()[k]), -1.0, 1.0);
  double total = 0.0;
  for (int l = lvl.band.lo; l <= lvl.band.hi; ++l) total += lvl.b[l] * kernel_L(l, t);
  return std::sqrt(lvl.rule.weights[k]) * total;
}

NeedletCoefficients analyze(const NeedletFrame& frame, const HarmonicCoefficients& alm, int j) {
  const FrameLevel& lvl = frame.level(j);
  NeedletCoefficients out;
  out.j = j;
  out.beta.assign(lvl.size(), 0.0);
  if (lvl.band.empty()) return out;
  if (alm.lmax() < lvl.band.hi) {
    throw ValidationError("analyze: level " + std::to_string(j) + " needs harmonic degree " +
                          std::to_string(lvl.band.hi) + ", input stops at " + std::to_string(alm.lmax()));
  }
  const int L = lvl.band.hi;
  const kernels::LegendreTable table(L);
  std::vector<double> c_re(table.size(), 0.0), c_im(table.size(), 0.0);
  double scale = 0.0;
  for (int m = 0; m <= L; ++m) {
    for (int l = std::max(m, lvl.band.lo); l <= L; ++l) {
      const std::size_t src = alm.index(l, m), dst = table.index(l, m);
      c_re[dst] = lvl.b[l] * alm.re()[src];
      c_im[dst] = lvl.b[l] * alm.im()[src];
      scale = std::max({scale, std::abs(c_re[dst]), std::abs(c_im[dst])});
    }
  }
  for (int l = lvl.band.lo; l <= L; ++l) {
    if (std::abs(c_im[table.index(l, 0)]) > 1e-10 * std::max(scale, 1e-300)) {
      throw NumericIntegrityError("analyze: imaginary residue from a_" + std::to_string(l) + ",0 exceeds 1e-10");
    }
  }
  kernels::active_kernels().synthesize(table, c_re.data(), c_im.data(), lvl.soa, out.beta.data());
  for (std::size_t k = 0; k < out.beta.size(); ++k) out.beta[k] *= std::sqrt(lvl.rule.weights[k]);
  return out;
}

Reconstruction synthesize(const NeedletFrame& frame, std::span<const NeedletCoefficients> coeffs, int lmax) {
  Reconstruction rec{HarmonicCoefficients(lmax), {}};
  const kernels::LegendreTable table(lmax);
  for (const auto& c : coeffs) {
    const FrameLevel& lvl = frame.level(c.j);
    if (c.beta.size() != lvl.size()) {
      throw ValidationError("synthesize: level " + std::to_string(c.j) + " has " + std::to_string(c.beta.size()) +
                            " coefficients, expected " + std::to_string(lvl.size()));
    }
    if (lvl.band.empty() || lvl.band.lo > lmax) continue;
    const int top = std::min(lvl.band.hi, lmax);
    if (lvl.rule.exact_degree < 2 * top) {
      rec.warnings.push_back("level " + std::to_string(c.j) + ": cubature verified to degree " +
                             std::to_string(lvl.rule.exact_degree) + ", reconstruction up to degree " +
                             std::to_string(top) + " needs " + std::to_string(2 * top));
    }
    std::vector<double> v(lvl.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sqrt(lvl.rule.weights[k]) * c.beta[k];
    std::vector<double> p_re(table.size(), 0.0), p_im(table.size(), 0.0);
    kernels::active_kernels().adjoint(table, lvl.soa, v.data(), p_re.data(), p_im.data());
    for (int m = 0; m <= top; ++m) {
      for (int l = std::max(m, lvl.band.lo); l <= top; ++l) {
        const std::size_t i = table.index(l, m), o = rec.alm.index(l, m);
        rec.alm.re()[o] += lvl.b[l] * p_re[i];
        rec.alm.im()[o] += lvl.b[l] * p_im[i];
      }
    }
  }
  return rec;
}

double gamma_factor(const NeedletWindow& window, const PowerSpectrum& spectrum, int j) {
  const Band band = level_band(window.base(), j);
  if (band.empty()) return 0.0;
  if (spectrum.lmax() < band.hi) {
    throw ValidationError("gamma_factor: spectrum stops at l = " + std::to_string(spectrum.lmax()) + ", level " +
                          std::to_string(j) + " needs " + std::to_string(band.hi));
  }
  const double scale = std::pow(window.base(), j);
  double total = 0.0;
  for (int l = band.lo; l <= band.hi; ++l) {
    total += window.b_squared(l / scale) * spectrum.cl[l] * (2.0 * l + 1.0) / (4.0 * kPi);
  }
  return total;
}

std::vector<double> correlation_weights(const NeedletWindow& window, const PowerSpectrum& spectrum, int j) {
  const Band band = level_band(window.base(), j);
  const double gamma = gamma_factor(window, spectrum, j);
  if (!(gamma > 0.0)) throw ValidationError("correlation_weights: gamma_j is zero at level " + std::to_string(j));
  std::vector<double> w(static_cast<std::size_t>(std::max(band.hi, 0)) + 1, 0.0);
  const double scale = std::pow(window.base(), j);
  for (int l = band.lo; l <= band.hi; ++l) {
    w[l] = window.b_squared(l / scale) * spectrum.cl[l] * (2.0 * l + 1.0) / (4.0 * kPi) / gamma;
  }
  return w;
}

CoeffCovariance coeff_covariance(const NeedletFrame& frame, const PowerSpectrum& spectrum, int j, std::size_t k,
                                 std::size_t k2) {
  const FrameLevel& lvl = frame.level(j);
  if (k >= lvl.size() || k2 >= lvl.size()) throw ValidationError("coeff_covariance: index out of range");
  const double gamma = gamma_factor(frame.window(), spectrum, j);
  const double lam = std::sqrt(lvl.rule.weights[k] * lvl.rule.weights[k2]);
  CoeffCovariance out;
  if (k == k2) {
    out.covariance = lvl.rule.weights[k] * gamma;
    out.correlation = 1.0;
    return out;
  }
  const double t = std::clamp(lvl.points()[k].dot(lvl.points()[k2]), -1.0, 1.0);
  const double scale = std::pow(frame.window().base(), j);
  double s = 0.0;
  for (int l = lvl.band.lo; l <= lvl.band.hi; ++l) {
    s += frame.window().b_squared(l / scale) * spectrum.cl[l] * kernel_L(l, t);
  }
  out.covariance = lam * s;
  out.correlation = gamma > 0.0 ? s / gamma : 0.0;
  return out;
}

}  // namespace needlets
