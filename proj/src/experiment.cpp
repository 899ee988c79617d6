#include "needlets/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "needlets/error.hpp"
#include "needlets/rng.hpp"

namespace needlets {

std::string_view to_string(Normalization n) { return n == Normalization::exact ? "exact" : "estimated"; }

Normalization parse_normalization(std::string_view name) {
  if (name == "exact") return Normalization::exact;
  if (name == "estimated") return Normalization::estimated;
  throw ValidationError("unknown normalization '" + std::string(name) + "' (expected exact or estimated)");
}

int schedule_r(int j) { return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(j)))) - 1); }

int default_sigma_r(int j, int r) { return std::max(r, j - 3); }

namespace {

bool admissible(double B, int j, int r) { return r >= 0 && std::pow(B, -j) < std::pow(B, -r) / 4.0; }

int level_r(const ExperimentConfig& c, int j) { return c.r >= 0 ? c.r : schedule_r(j); }

int level_sigma_r(const ExperimentConfig& c, int j) {
  return c.sigma_r >= 0 ? c.sigma_r : default_sigma_r(j, level_r(c, j));
}

}  // namespace

void validate(const ExperimentConfig& c) {
  if (!(c.frame.B > 1.0)) throw ValidationError("B must be > 1");
  if (c.frame.jmin < 0 || c.frame.jmax < c.frame.jmin) throw ValidationError("need 0 <= jmin <= jmax");
  if (c.replications < 1) throw ValidationError("replications must be >= 1");
  if (c.q.empty()) throw ValidationError("need at least one q");
  for (int q : c.q)
    if (q < 1) throw ValidationError("q must be >= 1, got " + std::to_string(q));
  if (c.cl.empty() && !(c.alpha > 2.0)) throw ValidationError("power-law spectrum needs alpha > 2");
  if (!(std::abs(c.amplitude) < 1.0)) throw ValidationError("modulation amplitude must satisfy |A| < 1");
  if (!(c.level > 0.0 && c.level < 1.0)) throw ValidationError("test level must lie in (0, 1)");
  for (int j : c.levels) {
    if (j < c.frame.jmin || j > c.frame.jmax) {
      throw ValidationError("level " + std::to_string(j) + " outside [jmin, jmax]");
    }
    const int r = level_r(c, j);
    if (c.frame.jmax < r + 2) throw ValidationError("jmax must be >= r + 2");
    if (!admissible(c.frame.B, j, r) || !admissible(c.frame.B, j, level_sigma_r(c, j))) {
      throw ValidationError("level " + std::to_string(j) + " admits no subsample design at r=" + std::to_string(r) +
                            " (need B^-j < B^-r / 4)");
    }
  }
}

nlohmann::json to_json(const SubsampleReport& s) {
  return {
      {"j", s.j},
      {"r", s.r},
      {"q", s.q},
      {"A_r", s.A_r},
      {"A_j", s.A_j},
      {"gamma_stats", s.gamma_stats},
      {"sigma_hat_sq", s.sigma_hat_sq},
      {"Sigma_hat", s.Sigma_hat},
      {"sigma_r", s.sigma_r},
      {"Sigma_hat_test", s.Sigma_hat_test},
      {"Sigma_hat_ns", s.Sigma_hat_ns},
      {"S_j", s.S_j},
      {"p_sup", s.p_sup},
      {"T_j", s.T_j},
      {"p_ns", s.p_ns},
      {"whole_sphere", s.whole_sphere},
      {"tau", s.tau},
      {"threshold_count", s.threshold_count},
      {"uniformity", {{"chi2", s.uniformity.chi2}, {"dof", s.uniformity.dof}, {"p_value", s.uniformity.p_value}}},
      {"normalization", s.normalization},
      {"gamma_j", s.gamma_j},
      {"seed", s.seed},
  };
}

Experiment::Experiment(ExperimentConfig config, std::shared_ptr<const NeedletFrame> frame)
    : config_(std::move(config)), frame_(std::move(frame)) {
  if (config_.levels.empty()) {
    for (int j = config_.frame.jmin; j <= config_.frame.jmax; ++j) {
      if (admissible(config_.frame.B, j, level_r(config_, j)) &&
          admissible(config_.frame.B, j, level_sigma_r(config_, j))) {
        config_.levels.push_back(j);
      }
    }
    if (config_.levels.empty()) throw ValidationError("no level in [jmin, jmax] admits a subsample design");
  }
  validate(config_);
  if (!frame_) {
    frame_ = std::make_shared<const NeedletFrame>(config_.frame);
  } else {
    for (int j : config_.levels) frame_->level(j);  // throws if not covered
    if (frame_->config().B != config_.frame.B) throw ValidationError("shared frame has a different B");
  }
  const int lmax = frame_->max_degree();
  if (config_.cl.empty()) {
    spectrum_ = make_power_law(config_.alpha, config_.G0, lmax);
  } else {
    std::vector<double> cl = config_.cl;
    cl.resize(static_cast<std::size_t>(lmax) + 1, 0.0);
    spectrum_ = make_tabulated(std::move(cl));
  }
  levels_ = config_.levels;

  const UnitPoint south{-config_.axis.x, -config_.axis.y, -config_.axis.z};
  const std::uint64_t net_seed = frame_->config().seed;
  for (int j : levels_) {
    const FrameLevel& lvl = frame_->level(j);
    LevelSetup s;
    s.j = j;
    s.r = level_r(config_, j);
    s.sigma_r = level_sigma_r(config_, j);
    s.gamma = gamma_factor(frame_->window(), spectrum_, j);
    s.design = make_subsample_design(lvl, config_.frame.B, s.r, config_.frame.strategy, net_seed);
    s.sigma_cells = s.sigma_r == s.r
                        ? s.design.cells
                        : make_subsample_design(lvl, config_.frame.B, s.sigma_r, config_.frame.strategy, net_seed).cells;
    s.hemispheres = hemisphere_cells(lvl.points(), lvl.epsilon, config_.axis, south);
    setups_.push_back(std::move(s));
  }
}

const LevelSetup& Experiment::setup(int j) const {
  for (const auto& s : setups_)
    if (s.j == j) return s;
  throw ValidationError("level " + std::to_string(j) + " is not analysed by this experiment");
}

std::uint64_t Experiment::replication_seed(std::size_t rep) const {
  return derive_seed(config_.seed, {static_cast<std::uint64_t>(rep)});
}

HarmonicCoefficients Experiment::field_alm(std::uint64_t seed) const {
  if (config_.amplitude == 0.0) return sample_alm(spectrum_, seed);
  return anisotropic_alm(spectrum_, Modulation{config_.amplitude, config_.axis}, seed, spectrum_.lmax());
}

void Experiment::normalize_level(NeedletCoefficients& coeffs) const {
  const FrameLevel& lvl = frame_->level(coeffs.j);
  if (config_.normalization == Normalization::exact) {
    const bool analysed = std::find(levels_.begin(), levels_.end(), coeffs.j) != levels_.end();
    const double gamma = analysed ? setup(coeffs.j).gamma : gamma_factor(frame_->window(), spectrum_, coeffs.j);
    normalize(coeffs, lvl.weights(), gamma);
  } else {
    normalize_estimated(coeffs, lvl.weights());
  }
}

std::vector<SubsampleReport> Experiment::reports(const NeedletCoefficients& coeffs, std::uint64_t seed) const {
  const LevelSetup& s = setup(coeffs.j);
  const std::span<const double> bh = coeffs.beta_hat;
  if (bh.size() != s.design.A_j()) {
    throw ValidationError("level " + std::to_string(coeffs.j) + ": " + std::to_string(bh.size()) +
                          " normalised coefficients for " + std::to_string(s.design.A_j()) + " cubature points");
  }
  if (std::all_of(bh.begin(), bh.end(), [](double v) { return v == 0.0; })) {
    throw ValidationError("level " + std::to_string(coeffs.j) + ": all coefficients are zero, Sigma_hat degenerates");
  }
  // estimated gamma from the raw coefficients, reported for either mode
  double gamma_j = s.gamma;
  if (config_.normalization == Normalization::estimated) {
    const auto w = frame_->level(coeffs.j).weights();
    CompensatedSum g;
    for (std::size_t k = 0; k < coeffs.beta.size(); ++k) g.add(coeffs.beta[k] * coeffs.beta[k] / w[k]);
    gamma_j = g.value() / static_cast<double>(coeffs.beta.size());
  }

  const double Sigma_ns = big_sigma_hat(subsample_stats(bh, s.sigma_cells, 2));
  const TestResult ns = north_south_test(bh, s.hemispheres, Sigma_ns);
  const double tau = config_.tau >= 0.0 ? config_.tau : universal_threshold(bh.size());
  const auto selected = threshold_indices(bh, tau);
  const UniformityCheck uniformity = uniformity_check(selected, s.design.cells);

  std::vector<SubsampleReport> out;
  for (int q : config_.q) {
    SubsampleReport rep;
    rep.j = coeffs.j;
    rep.r = s.r;
    rep.q = q;
    rep.A_r = s.design.A_r();
    rep.A_j = s.design.A_j();
    rep.gamma_stats = subsample_stats(bh, s.design.cells, q);
    rep.sigma_hat_sq = sigma_hat_sq(bh, q);
    rep.Sigma_hat = big_sigma_hat(rep.gamma_stats);
    rep.sigma_r = s.sigma_r;
    rep.Sigma_hat_test = s.sigma_r == s.r ? rep.Sigma_hat : big_sigma_hat(subsample_stats(bh, s.sigma_cells, q));
    rep.Sigma_hat_ns = Sigma_ns;
    const TestResult sup = sup_test(rep.gamma_stats, rep.Sigma_hat_test);
    rep.S_j = sup.statistic;
    rep.p_sup = sup.p_value;
    rep.T_j = ns.statistic;
    rep.p_ns = ns.p_value;
    rep.whole_sphere = whole_sphere_stat(bh, q);
    rep.tau = tau;
    rep.threshold_count = selected.size();
    rep.uniformity = uniformity;
    rep.normalization = std::string(to_string(config_.normalization));
    rep.gamma_j = gamma_j;
    rep.seed = seed;
    out.push_back(std::move(rep));
  }
  return out;
}

Realization Experiment::run(std::uint64_t seed) const {
  Realization real;
  real.seed = seed;
  const HarmonicCoefficients alm = field_alm(seed);
  for (int j : levels_) {
    NeedletCoefficients c = analyze(*frame_, alm, j);
    normalize_level(c);
    auto reps = reports(c, seed);
    real.reports.insert(real.reports.end(), reps.begin(), reps.end());
    real.coeffs.push_back(std::move(c));
  }
  return real;
}

void McAccumulator::add(const Realization& realization) {
  for (const auto& rep : realization.reports) {
    auto it = std::find_if(series_.begin(), series_.end(), [&](const Series& s) { return s.j == rep.j && s.q == rep.q; });
    if (it == series_.end()) {
      series_.push_back(Series{rep.j, rep.q, {}, {}, {}, 0});
      it = series_.end() - 1;
    }
    it->reports.push_back(rep);
    for (const auto& c : realization.coeffs) {
      if (c.j != rep.j) continue;
      for (double b : c.beta_hat) {
        const double h = hermite(rep.q, b);
        it->hq_sum.add(h);
        it->hq_sq_sum.add(h * h);
      }
      it->hq_count += c.beta_hat.size();
    }
  }
}

const McAccumulator::Series* McAccumulator::series(int j, int q) const {
  for (const auto& s : series_)
    if (s.j == j && s.q == q) return &s;
  return nullptr;
}

std::vector<McSummary> McAccumulator::summaries() const {
  std::vector<McSummary> out;
  for (const auto& s : series_) {
    McSummary m;
    const auto& first = s.reports.front();
    m.j = s.j;
    m.q = s.q;
    m.r = first.r;
    m.A_j = first.A_j;
    m.A_r = first.A_r;
    m.replications = s.reports.size();
    const double n = static_cast<double>(m.replications);

    std::vector<double> sig, Sig, Sig_test, ws, p_sup, gammas, counts;
    std::size_t reject_T = 0, reject_S = 0;
    for (const auto& r : s.reports) {
      sig.push_back(r.sigma_hat_sq);
      Sig.push_back(r.Sigma_hat);
      Sig_test.push_back(r.Sigma_hat_test);
      ws.push_back(std::sqrt(static_cast<double>(r.A_j)) * r.whole_sphere);
      p_sup.push_back(r.p_sup);
      counts.push_back(static_cast<double>(r.threshold_count));
      gammas.insert(gammas.end(), r.gamma_stats.begin(), r.gamma_stats.end());
      if (r.p_ns < level_) ++reject_T;
      if (r.p_sup < level_) ++reject_S;
    }
    m.mean_sigma_hat_sq = mean(sig);
    m.mean_Sigma_hat = mean(Sig);
    m.mean_Sigma_hat_test = mean(Sig_test);
    m.rejection_T = static_cast<double>(reject_T) / n;
    m.rejection_S = static_cast<double>(reject_S) / n;
    m.mean_threshold_count = mean(counts);
    m.expected_threshold_count =
        static_cast<double>(m.A_j) * std::erfc(first.tau / std::sqrt(2.0));
    if (s.hq_count >= 2) {
      const double c = static_cast<double>(s.hq_count);
      const double s1 = s.hq_sum.value();
      m.var_hq = (s.hq_sq_sum.value() - s1 * s1 / c) / (c - 1.0);
    }
    if (gammas.size() >= 2) m.var_gamma = sample_variance(gammas);
    if (ws.size() >= 2) m.var_whole_sphere = sample_variance(ws);
    if (gammas.size() >= 100 && m.var_gamma && *m.var_gamma > 0.0) {
      std::vector<double> z(gammas);
      for (double& v : z) v /= std::sqrt(*m.var_gamma);
      m.cum4_gamma = cum4(z);
    }
    if (p_sup.size() >= 2) m.ks_p_sup = ks_uniform(p_sup);
    out.push_back(m);
  }
  return out;
}

nlohmann::json to_json(const McSummary& m) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j = {
      {"j", m.j},
      {"q", m.q},
      {"r", m.r},
      {"A_j", m.A_j},
      {"A_r", m.A_r},
      {"replications", m.replications},
      {"mean_sigma_hat_sq", m.mean_sigma_hat_sq},
      {"mean_Sigma_hat", m.mean_Sigma_hat},
      {"mean_Sigma_hat_test", m.mean_Sigma_hat_test},
      {"var_hq", opt(m.var_hq)},
      {"var_gamma", opt(m.var_gamma)},
      {"var_whole_sphere", opt(m.var_whole_sphere)},
      {"rejection_T", m.rejection_T},
      {"rejection_S", m.rejection_S},
      {"mean_threshold_count", m.mean_threshold_count},
      {"expected_threshold_count", m.expected_threshold_count},
  };
  j["cum4_gamma"] = m.cum4_gamma ? nlohmann::json{{"value", m.cum4_gamma->value},
                                                  {"standard_error", m.cum4_gamma->standard_error},
                                                  {"n", m.cum4_gamma->n}}
                                 : nlohmann::json(nullptr);
  j["ks_p_sup"] = m.ks_p_sup ? nlohmann::json{{"D", m.ks_p_sup->statistic}, {"p_value", m.ks_p_sup->p_value}}
                             : nlohmann::json(nullptr);
  return j;
}

void write_mc_header(std::ostream& os) {
  os << "rep,seed,j,q,r,A_r,A_j,sigma_hat_sq,Sigma_hat,Sigma_hat_test,S_j,p_sup,T_j,p_ns,whole_sphere,"
        "threshold_count,gamma_stats\n";
}

void write_mc_rows(std::ostream& os, std::size_t rep, const Realization& realization) {
  char buf[40];
  auto g = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : realization.reports) {
    os << rep << ',' << r.seed << ',' << r.j << ',' << r.q << ',' << r.r << ',' << r.A_r << ',' << r.A_j << ','
       << g(r.sigma_hat_sq) << ',' << g(r.Sigma_hat) << ',' << g(r.Sigma_hat_test) << ',' << g(r.S_j) << ','
       << g(r.p_sup) << ',' << g(r.T_j) << ',' << g(r.p_ns) << ',' << g(r.whole_sphere) << ',' << r.threshold_count
       << ',';
    for (std::size_t a = 0; a < r.gamma_stats.size(); ++a) os << (a ? ";" : "") << g(r.gamma_stats[a]);
    os << '\n';
  }
}

}  // namespace needlets
