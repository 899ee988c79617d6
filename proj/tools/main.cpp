// needlets: batch driver for net generation, simulation, analysis, tests,
// Monte Carlo studies and correlation-sum diagnostics.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "needlets/diagnostics.hpp"
#include "needlets/error.hpp"
#include "needlets/experiment.hpp"
#include "needlets/io.hpp"

namespace fs = std::filesystem;
using namespace needlets;

namespace {

struct Options {
  double B = 2.0;
  int jmin = 0;
  int jmax = 5;
  double c_net = 1.0;
  int degree_cap = kMomentFitCap;
  std::string cubature = "automatic";
  std::string strategy = "greedy_random";
  std::uint64_t net_seed = 0;
  double alpha = 3.0;
  double G0 = 1.0;
  std::vector<double> cl;
  std::vector<int> levels;
  int r = -1;
  int sigma_r = -1;
  std::vector<int> q{2};
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::string normalization = "exact";
  double amplitude = 0.0;
  std::vector<double> axis{0.0, 0.0, 1.0};
  double tau = -1.0;
  double level = 0.05;
  std::string out;

  // subcommand inputs
  double epsilon = 0.0;
  std::string alm_file;
  std::string coeff_file;
  std::vector<int> Ms{3, 4};
};

ExperimentConfig to_config(const Options& o) {
  ExperimentConfig c;
  c.frame.B = o.B;
  c.frame.jmin = o.jmin;
  c.frame.jmax = o.jmax;
  c.frame.c_net = o.c_net;
  c.frame.degree_cap = o.degree_cap;
  c.frame.mode = parse_cubature_mode(o.cubature);
  c.frame.strategy = parse_net_strategy(o.strategy);
  c.frame.seed = o.net_seed;
  c.alpha = o.alpha;
  c.G0 = o.G0;
  c.cl = o.cl;
  c.levels = o.levels;
  c.r = o.r;
  c.sigma_r = o.sigma_r;
  c.q = o.q;
  c.replications = o.replications;
  c.seed = o.seed;
  c.normalization = parse_normalization(o.normalization);
  c.amplitude = o.amplitude;
  if (o.axis.size() != 3) throw ValidationError("axis needs three components");
  c.axis = UnitPoint::normalized(o.axis[0], o.axis[1], o.axis[2]);
  c.tau = o.tau;
  c.level = o.level;
  return c;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw ValidationError("cannot write " + p.string());
  return os;
}

std::ifstream open_in(const std::string& p) {
  std::ifstream is(p);
  if (!is) throw ValidationError("cannot read " + p);
  return is;
}

// A zero field has no normalisation; its beta_hat column stays empty.
void normalize_nonzero(const Experiment& e, NeedletCoefficients& c) {
  for (double b : c.beta)
    if (b != 0.0) return e.normalize_level(c);
}

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw ValidationError("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

void cmd_gen_net(const Options& o) {
  const auto net = build_maximal_net(o.epsilon, parse_net_strategy(o.strategy), o.seed);
  if (o.out.empty()) {
    write_net(std::cout, net);
  } else {
    auto os = open_out(o.out);
    write_net(os, net);
  }
  std::cerr << "N = " << net.size() << "\n";
}

void cmd_simulate(const Options& o, const std::string& echo) {
  const Experiment e(to_config(o));
  const fs::path dir = out_dir(o);
  const HarmonicCoefficients alm = e.field_alm(o.seed);
  {
    auto os = open_out(dir / "alm.csv");
    os << comment_block(echo);
    write_alm(os, alm);
  }
  auto cs = open_out(dir / "coefficients.csv");
  cs << comment_block(echo);
  write_coefficients_header(cs);
  for (int j = e.frame().jmin(); j <= e.frame().jmax(); ++j) {
    const FrameLevel& lvl = e.frame().level(j);
    NeedletCoefficients c = analyze(e.frame(), alm, j);
    normalize_nonzero(e, c);
    write_coefficients(cs, lvl, c);
    auto ns = open_out(dir / ("net_j" + std::to_string(j) + ".txt"));
    write_cubature(ns, lvl.rule);
  }
  // field values on the finest cubature net
  const FrameLevel& fine = e.frame().level(e.frame().jmax());
  auto fs_ = open_out(dir / "field.csv");
  fs_ << comment_block(echo);
  write_field(fs_, fine.points(), evaluate_field(alm, fine.points()));
}

void cmd_analyze(const Options& o, const std::string& echo) {
  const Experiment e(to_config(o));
  auto is = open_in(o.alm_file);
  const HarmonicCoefficients alm = read_alm(is);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!o.out.empty()) {
    file = open_out(o.out);
    os = &file;
  }
  *os << comment_block(echo);
  write_coefficients_header(*os);
  for (int j = e.frame().jmin(); j <= e.frame().jmax(); ++j) {
    NeedletCoefficients c = analyze(e.frame(), alm, j);
    normalize_nonzero(e, c);
    write_coefficients(*os, e.frame().level(j), c);
  }
}

void cmd_test(const Options& o, const std::string& echo) {
  const Experiment e(to_config(o));
  auto is = open_in(o.coeff_file);
  const auto rows = read_coefficients(is);
  nlohmann::json reports = nlohmann::json::array();
  for (int j : e.levels()) {
    const FrameLevel& lvl = e.frame().level(j);
    NeedletCoefficients c;
    c.j = j;
    c.beta.assign(lvl.size(), 0.0);
    std::vector<double> bh(lvl.size(), 0.0);
    std::size_t seen = 0, with_hat = 0;
    for (const auto& row : rows) {
      if (row.j != j) continue;
      if (row.k >= lvl.size()) throw ValidationError("level " + std::to_string(j) + ": index k out of range");
      if (geodesic_distance(row.xi, lvl.points()[row.k]) > 1e-9) {
        throw ValidationError("level " + std::to_string(j) + ": coefficient points do not match the configured net");
      }
      c.beta[row.k] = row.beta;
      bh[row.k] = row.beta_hat;
      ++seen;
      with_hat += row.has_beta_hat;
    }
    if (seen == 0) continue;
    if (seen != lvl.size()) {
      throw ValidationError("level " + std::to_string(j) + ": " + std::to_string(seen) + " coefficients for " +
                            std::to_string(lvl.size()) + " cubature points");
    }
    if (with_hat == seen) {
      c.beta_hat = std::move(bh);
    } else {
      e.normalize_level(c);
    }
    for (const auto& rep : e.reports(c, o.seed)) reports.push_back(to_json(rep));
  }
  if (reports.empty()) throw ValidationError("no coefficients for the analysed levels");
  nlohmann::json doc{{"config", echo}, {"reports", reports}};
  if (o.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    auto os = open_out(o.out);
    os << doc.dump(2) << "\n";
  }
}

void cmd_mc_study(const Options& o, const std::string& echo) {
  const Experiment e(to_config(o));
  const fs::path dir = out_dir(o);
  auto csv = open_out(dir / "replications.csv");
  csv << comment_block(echo);
  write_mc_header(csv);
  McAccumulator acc(o.level);
  for (std::size_t rep = 0; rep < o.replications; ++rep) {
    const Realization real = e.run(e.replication_seed(rep));
    write_mc_rows(csv, rep, real);
    acc.add(real);
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : acc.summaries()) summary.push_back(to_json(s));
  auto js = open_out(dir / "summary.json");
  js << nlohmann::json{{"config", echo}, {"summaries", summary}}.dump(2) << "\n";
}

void cmd_diagnose(const Options& o, const std::string& echo) {
  const Experiment e(to_config(o));
  const fs::path dir = out_dir(o);
  std::vector<CorrelationSumRow> rows;
  std::vector<SubsampleDesign> designs;
  for (int j : e.levels()) {
    const auto& d = e.setup(j).design;
    const auto t = correlation_sum_table(d, o.Ms);
    rows.insert(rows.end(), t.begin(), t.end());
    designs.push_back(d);
  }
  {
    auto os = open_out(dir / "correlation_sums.csv");
    os << comment_block(echo);
    write_correlation_sums(os, rows);
  }
  std::size_t separated = 0, violations = 0;
  for (const auto& r : rows) {
    if (!r.separated()) continue;
    ++separated;
    violations += r.W > r.separated_bound;
  }
  const LogFactorReport lf = m3_log_factor_check(designs);
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : lf.points) {
    pts.push_back({{"j", p.j},
                   {"r", p.r},
                   {"delta_over_eps", p.delta_over_eps},
                   {"max_W_M3", p.max_W_M3},
                   {"max_W_M4", p.max_W_M4},
                   {"m3_plain", p.m3_plain},
                   {"m3_log", p.m3_log},
                   {"m4", p.m4},
                   {"m4_ineq18", p.m4_ineq18}});
  }
  auto js = open_out(dir / "scaling.json");
  js << nlohmann::json{{"config", echo},
                       {"separated_pairs", separated},
                       {"separated_violations", violations},
                       {"points", pts},
                       {"m4_bounded", lf.m4_bounded},
                       {"m4_ineq18_bounded", lf.m4_ineq18_bounded},
                       {"m3_plain_grows", lf.m3_plain_grows},
                       {"m3_log_bounded", lf.m3_log_bounded}}
            .dump(2)
     << "\n";
  std::cerr << separated << " separated pairs, " << violations << " violations\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical needlets and Voronoi subsampling of isotropic Gaussian fields"};
  app.set_config("--config", "", "INI file of key = value settings");
  app.require_subcommand(1);
  Options o;

  app.add_option("--B", o.B, "needlet base B > 1")->capture_default_str();
  app.add_option("--jmin", o.jmin, "first frame level")->capture_default_str();
  app.add_option("--jmax", o.jmax, "last frame level")->capture_default_str();
  app.add_option("--c-net", o.c_net, "net scale: epsilon_j = c_net pi B^-(j+1)")->capture_default_str();
  app.add_option("--degree-cap", o.degree_cap, "largest moment-fit degree")->capture_default_str();
  app.add_option("--cubature", o.cubature, "automatic | moment_fit | voronoi_area")->capture_default_str();
  app.add_option("--strategy", o.strategy, "greedy_random | spiral_thinned")->capture_default_str();
  app.add_option("--net-seed", o.net_seed, "seed for the cubature and subsample nets")->capture_default_str();
  app.add_option("--alpha", o.alpha, "power-law exponent, C_l = G0 l^-alpha")->capture_default_str();
  app.add_option("--G0", o.G0, "power-law amplitude")->capture_default_str();
  app.add_option("--cl", o.cl, "tabulated spectrum C_0 C_1 ... (replaces the power law; missing degrees are 0)");
  app.add_option("--levels", o.levels, "levels to analyse (default: all admissible)");
  app.add_option("--r", o.r, "coarse level (default: max(1, floor(sqrt j) - 1))")->capture_default_str();
  app.add_option("--sigma-r", o.sigma_r, "coarse level of the test normaliser (default: max(r, j - 3))")
      ->capture_default_str();
  app.add_option("--q", o.q, "Hermite orders")->capture_default_str();
  app.add_option("--replications", o.replications, "Monte Carlo replications")->capture_default_str();
  auto* seed = app.add_option("--seed", o.seed, "field / net seed (required)");
  app.add_option("--normalization", o.normalization, "exact | estimated")->capture_default_str();
  app.add_option("--amplitude", o.amplitude, "hemispheric modulation A, |A| < 1")->capture_default_str();
  app.add_option("--axis", o.axis, "modulation axis x y z")->expected(3)->capture_default_str();
  app.add_option("--tau", o.tau, "threshold (default: sqrt(2 log A_j))")->capture_default_str();
  app.add_option("--level", o.level, "test level")->capture_default_str();
  app.add_option("-o,--out", o.out, "output file or directory");

  auto* gen = app.add_subcommand("gen-net", "write a maximal epsilon-net");
  gen->add_option("--epsilon", o.epsilon, "separation radius (radians)")->required();
  auto* sim = app.add_subcommand("simulate", "sample a field; write alm, field, coefficients and nets");
  auto* ana = app.add_subcommand("analyze", "needlet coefficients of a harmonic-coefficient file");
  ana->add_option("--alm", o.alm_file, "l,m,re,im CSV")->required()->check(CLI::ExistingFile);
  auto* tst = app.add_subcommand("test", "subsample statistics and isotropy tests on a coefficient file");
  tst->add_option("--coefficients", o.coeff_file, "coefficient CSV")->required()->check(CLI::ExistingFile);
  auto* mc = app.add_subcommand("mc-study", "Monte Carlo replications with summary");
  auto* diag = app.add_subcommand("diagnose", "correlation sums between subsample cells");
  diag->add_option("--M", o.Ms, "decay exponents")->capture_default_str();
  for (auto* s : {gen, sim, ana, tst, mc, diag}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }
  if (seed->count() == 0) {
    std::cerr << "error: --seed is required\n";
    return 2;
  }
  // the output location is not part of the experiment
  std::string echo;
  {
    std::istringstream all(app.config_to_str(true, false));
    for (std::string line; std::getline(all, line);)
      if (line.rfind("out=", 0) != 0) echo += line + "\n";
  }

  try {
    if (gen->parsed()) cmd_gen_net(o);
    else if (sim->parsed()) cmd_simulate(o, echo);
    else if (ana->parsed()) cmd_analyze(o, echo);
    else if (tst->parsed()) cmd_test(o, echo);
    else if (mc->parsed()) cmd_mc_study(o, echo);
    else if (diag->parsed()) cmd_diagnose(o, echo);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
