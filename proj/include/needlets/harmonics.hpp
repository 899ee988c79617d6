#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "needlets/geometry.hpp"

namespace needlets {

/// Legendre polynomial P_l(t) by the three-term recurrence.  |t| <= 1 + 1e-12.
double legendre_p(int l, double t);

/// L_l(t) = (2l + 1)/(4 pi) P_l(t): the reproducing kernel of degree-l
/// harmonics, L_l(<x, y>) = sum_m Y_lm(x) conj(Y_lm(y)).
double kernel_L(int l, double t);

/// Fully normalised complex spherical harmonic (Condon-Shortley phase).
/// Accurate up to l = 512 (the Legendre recurrence tracks an exponent so
/// sin^m(theta) seeds never underflow).
std::complex<double> eval_ylm(int l, int m, const UnitPoint& p);

/// Real orthonormal harmonics of every degree <= lmax at p, packed as
/// index l^2 + l + m: m = 0 -> Y_l0, m > 0 -> sqrt2 Re Y_lm, m < 0 -> sqrt2 Im Y_l|m|.
void real_harmonics(int lmax, const UnitPoint& p, std::span<double> out);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(std::size_t n);

/// Product rule (Gauss-Legendre in cos(theta), uniform in phi); integrates
/// every polynomial of degree <= 2*nlat - 1 exactly when nlon >= 2*nlat.
struct QuadratureGrid {
  std::vector<UnitPoint> points;
  std::vector<double> weights;
};
QuadratureGrid product_grid(std::size_t nlat, std::size_t nlon);
/// Smallest product grid exact for polynomials of degree <= degree.
QuadratureGrid product_grid_for_degree(int degree);
/// Product grid with separate Gauss-Legendre rules on z < 0 and z > 0: exact
/// for functions that are a polynomial of degree <= degree on each
/// hemisphere (e.g. sign(z) times a polynomial).
QuadratureGrid split_product_grid_for_degree(int degree);

}  // namespace needlets
