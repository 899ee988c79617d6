#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "needlets/cubature.hpp"
#include "needlets/field.hpp"
#include "needlets/geometry.hpp"
#include "needlets/kernels.hpp"

namespace needlets {

/// Smooth spectral window.  phi is 1 on [0, 1/B], 0 on [1, inf) and a
/// normalised integral of exp(-1/((s - 1/B)(1 - s))) in between;
/// b^2(xi) = phi(xi / B) - phi(xi), so sum_j b^2(xi / B^j) = 1 for xi >= 1.
class NeedletWindow {
 public:
  explicit NeedletWindow(double B);

  double base() const { return B_; }
  double phi(double xi) const;
  double b_squared(double xi) const;
  double b(double xi) const;

 private:
  double B_;
  double norm_;  // integral of the bump over (1/B, 1)
  // Bump integrals over fixed panels of (1/B, 1): from the left edge to each
  // panel boundary and from each boundary to the right edge.
  std::vector<double> left_, right_;
};

/// Integer degrees l with floor(B^{j-1}) < l < floor(B^{j+1}).
struct Band {
  int lo = 1;  // first degree
  int hi = 0;  // last degree; empty when hi < lo
  bool empty() const { return hi < lo; }
};
Band level_band(double B, int j);

struct FrameConfig {
  double B = 2.0;
  int jmin = 0;
  int jmax = 5;
  /// Level-j cubature nets use epsilon_j = c_net * pi * B^{-(j+1)}.
  double c_net = 1.0;
  /// Moment-fit target degree is min(2 floor(B^{j+1}), degree_cap).
  int degree_cap = kMomentFitCap;
  CubatureMode mode = CubatureMode::automatic;
  NetStrategy strategy = NetStrategy::greedy_random;
  std::uint64_t seed = 0;
};

struct FrameLevel {
  int j = 0;
  Band band;
  double epsilon = 0.0;
  CubatureRule rule;
  std::vector<double> b;  // b(l / B^j) for l = 0..band.hi (zero outside the band)
  kernels::PointSet soa;   // cubature points in kernel layout

  std::size_t size() const { return rule.size(); }
  std::span<const UnitPoint> points() const { return rule.points(); }
  std::span<const double> weights() const { return rule.weights; }
};

/// Needlet system for levels jmin..jmax.  Immutable after construction.
class NeedletFrame {
 public:
  explicit NeedletFrame(const FrameConfig& config);

  const FrameConfig& config() const { return config_; }
  const NeedletWindow& window() const { return window_; }
  int jmin() const { return config_.jmin; }
  int jmax() const { return config_.jmax; }
  const FrameLevel& level(int j) const;
  /// Largest degree any level touches.
  int max_degree() const;

 private:
  FrameConfig config_;
  NeedletWindow window_;
  std::vector<FrameLevel> levels_;
};

/// Coefficients of one level, aligned with the level's cubature points.
struct NeedletCoefficients {
  int j = 0;
  std::vector<double> beta;
  std::vector<double> beta_hat;  // empty until normalised
};

/// psi_jk(x) = sqrt(lambda_jk) sum_band b(l / B^j) L_l(<x, xi_jk>).
double needlet_eval(const NeedletFrame& frame, int j, std::size_t k, const UnitPoint& x);

/// beta_jk = sqrt(lambda_jk) sum_band b(l / B^j) T_l(xi_jk).  Requires
/// alm.lmax() >= band.hi = floor(B^{j+1}) - 1, the last degree the sum touches.
NeedletCoefficients analyze(const NeedletFrame& frame, const HarmonicCoefficients& alm, int j);

struct Reconstruction {
  HarmonicCoefficients alm;
  std::vector<std::string> warnings;
};

/// sum_jk beta_jk psi_jk expressed in harmonic coefficients up to `lmax`.
/// A warning is attached for every level whose cubature is not verified
/// exact up to twice its highest reconstructed degree.
Reconstruction synthesize(const NeedletFrame& frame, std::span<const NeedletCoefficients> coeffs, int lmax);

/// gamma_j = sum_l b^2(l / B^j) C_l (2l + 1) / (4 pi), so E beta_jk^2 = lambda_jk gamma_j.
double gamma_factor(const NeedletWindow& window, const PowerSpectrum& spectrum, int j);

/// w_l with corr(beta_jk, beta_jk') = sum_l w_l P_l(<xi_jk, xi_jk'>), l = 0..band.hi.
std::vector<double> correlation_weights(const NeedletWindow& window, const PowerSpectrum& spectrum, int j);

struct CoeffCovariance {
  double covariance = 0.0;
  double correlation = 0.0;
};

/// E beta_jk beta_jk' and the correlation, same level only.
CoeffCovariance coeff_covariance(const NeedletFrame& frame, const PowerSpectrum& spectrum, int j, std::size_t k,
                                 std::size_t k2);

}  // namespace needlets
