#include "needlets/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "needlets/error.hpp"

namespace needlets {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Next line that is neither blank nor a '#' comment.
bool next_data_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  return false;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("cannot parse ") + what + " from '" + s + "'");
  }
}

void write_points(std::ostream& os, const MaximalNet& net, const std::vector<double>* weights) {
  os << g17(net.epsilon()) << ' ' << net.size() << ' ' << net.seed() << ' ' << to_string(net.strategy()) << '\n';
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& p = net[i];
    os << g17(p.x) << ' ' << g17(p.y) << ' ' << g17(p.z);
    if (weights) os << ' ' << g17((*weights)[i]);
    os << '\n';
  }
}

CubatureFile read_points(std::istream& is, bool with_weights) {
  std::string line;
  if (!next_data_line(is, line)) throw ValidationError("net file: missing header");
  std::istringstream head(line);
  double eps = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string strategy;
  if (!(head >> eps >> n >> seed >> strategy)) throw ValidationError("net file: malformed header '" + line + "'");
  std::vector<UnitPoint> pts;
  std::vector<double> w;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_data_line(is, line)) throw ValidationError("net file: expected " + std::to_string(n) + " points");
    std::istringstream row(line);
    UnitPoint p;
    double wi = 0.0;
    if (!(row >> p.x >> p.y >> p.z)) throw ValidationError("net file: malformed point line '" + line + "'");
    if (with_weights && !(row >> wi)) throw ValidationError("cubature file: missing weight on '" + line + "'");
    pts.push_back(p);
    if (with_weights) w.push_back(wi);
  }
  return {MaximalNet(eps, std::move(pts), seed, parse_net_strategy(strategy)), std::move(w)};
}

}  // namespace

void write_net(std::ostream& os, const MaximalNet& net) { write_points(os, net, nullptr); }

void write_cubature(std::ostream& os, const CubatureRule& rule) { write_points(os, *rule.net, &rule.weights); }

MaximalNet read_net(std::istream& is) { return read_points(is, false).net; }

CubatureFile read_cubature(std::istream& is) { return read_points(is, true); }

void write_coefficients_header(std::ostream& os) { os << "j,k,xi_x,xi_y,xi_z,lambda,beta,beta_hat\n"; }

void write_coefficients(std::ostream& os, const FrameLevel& level, const NeedletCoefficients& coeffs) {
  for (std::size_t k = 0; k < coeffs.beta.size(); ++k) {
    const auto& p = level.points()[k];
    os << coeffs.j << ',' << k << ',' << g17(p.x) << ',' << g17(p.y) << ',' << g17(p.z) << ','
       << g17(level.rule.weights[k]) << ',' << g17(coeffs.beta[k]) << ',';
    if (k < coeffs.beta_hat.size()) os << g17(coeffs.beta_hat[k]);
    os << '\n';
  }
}

std::vector<CoefficientRow> read_coefficients(std::istream& is) {
  std::vector<CoefficientRow> rows;
  std::string line;
  bool header = true;
  while (next_data_line(is, line)) {
    if (header) {
      header = false;
      if (line.rfind("j,", 0) == 0) continue;
    }
    const auto c = split_csv(line);
    if (c.size() < 7) throw ValidationError("coefficients CSV: expected 8 columns in '" + line + "'");
    CoefficientRow r;
    r.j = static_cast<int>(parse_double(c[0], "j"));
    r.k = static_cast<std::size_t>(parse_double(c[1], "k"));
    r.xi = {parse_double(c[2], "xi_x"), parse_double(c[3], "xi_y"), parse_double(c[4], "xi_z")};
    r.lambda = parse_double(c[5], "lambda");
    r.beta = parse_double(c[6], "beta");
    if (c.size() > 7 && !c[7].empty()) {
      r.beta_hat = parse_double(c[7], "beta_hat");
      r.has_beta_hat = true;
    }
    rows.push_back(r);
  }
  return rows;
}

void write_field(std::ostream& os, std::span<const UnitPoint> points, std::span<const double> values) {
  if (points.size() != values.size()) throw ValidationError("write_field: size mismatch");
  os << "x,y,z,T\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    os << g17(points[k].x) << ',' << g17(points[k].y) << ',' << g17(points[k].z) << ',' << g17(values[k]) << '\n';
  }
}

void write_alm(std::ostream& os, const HarmonicCoefficients& alm) {
  os << "l,m,re,im\n";
  for (int l = 0; l <= alm.lmax(); ++l) {
    for (int m = 0; m <= l; ++m) {
      const auto v = alm.at(l, m);
      os << l << ',' << m << ',' << g17(v.real()) << ',' << g17(v.imag()) << '\n';
    }
  }
}

HarmonicCoefficients read_alm(std::istream& is) {
  struct Entry {
    int l, m;
    double re, im;
  };
  std::vector<Entry> entries;
  std::string line;
  int lmax = -1;
  bool header = true;
  while (next_data_line(is, line)) {
    if (header) {
      header = false;
      if (line.rfind("l,", 0) == 0) continue;
    }
    const auto c = split_csv(line);
    if (c.size() != 4) throw ValidationError("alm CSV: expected 4 columns in '" + line + "'");
    Entry e{static_cast<int>(parse_double(c[0], "l")), static_cast<int>(parse_double(c[1], "m")),
            parse_double(c[2], "re"), parse_double(c[3], "im")};
    if (e.l < 0 || e.m < 0 || e.m > e.l) throw ValidationError("alm CSV: invalid (l, m) in '" + line + "'");
    lmax = std::max(lmax, e.l);
    entries.push_back(e);
  }
  if (lmax < 0) throw ValidationError("alm CSV: no coefficients");
  HarmonicCoefficients alm(lmax);
  for (const auto& e : entries) alm.set(e.l, e.m, {e.re, e.im});
  return alm;
}

void write_correlation_sums(std::ostream& os, std::span<const CorrelationSumRow> rows) {
  os << "j,r,M,a,b,W,bound,ratio\n";
  for (const auto& r : rows) {
    os << r.j << ',' << r.r << ',' << r.M << ',' << r.a << ',' << r.b << ',' << g17(r.W) << ',' << g17(r.bound) << ','
       << g17(r.ratio) << '\n';
  }
}

std::string comment_block(const std::string& text) {
  std::string out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out += "# " + line + "\n";
  return out;
}

}  // namespace needlets
