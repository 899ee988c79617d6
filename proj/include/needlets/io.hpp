#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "needlets/cubature.hpp"
#include "needlets/diagnostics.hpp"
#include "needlets/field.hpp"
#include "needlets/frame.hpp"
#include "needlets/geometry.hpp"

namespace needlets {

// Net: header "epsilon N seed strategy", then N lines "x y z" (17 significant
// digits).  Cubature rules add a fourth column w.
void write_net(std::ostream& os, const MaximalNet& net);
void write_cubature(std::ostream& os, const CubatureRule& rule);
MaximalNet read_net(std::istream& is);

struct CubatureFile {
  MaximalNet net;
  std::vector<double> weights;
};
CubatureFile read_cubature(std::istream& is);

/// CSV j,k,xi_x,xi_y,xi_z,lambda,beta,beta_hat (beta_hat empty if not normalised).
void write_coefficients_header(std::ostream& os);
void write_coefficients(std::ostream& os, const FrameLevel& level, const NeedletCoefficients& coeffs);

struct CoefficientRow {
  int j = 0;
  std::size_t k = 0;
  UnitPoint xi;
  double lambda = 0.0;
  double beta = 0.0;
  double beta_hat = 0.0;
  bool has_beta_hat = false;
};
std::vector<CoefficientRow> read_coefficients(std::istream& is);

/// CSV x,y,z,T.
void write_field(std::ostream& os, std::span<const UnitPoint> points, std::span<const double> values);

/// CSV l,m,re,im for 0 <= m <= l.
void write_alm(std::ostream& os, const HarmonicCoefficients& alm);
HarmonicCoefficients read_alm(std::istream& is);

/// CSV j,r,M,a,b,W,bound,ratio.
void write_correlation_sums(std::ostream& os, std::span<const CorrelationSumRow> rows);

/// Prefix every line of `text` with "# " (config echo at the top of CSV files).
std::string comment_block(const std::string& text);

}  // namespace needlets
