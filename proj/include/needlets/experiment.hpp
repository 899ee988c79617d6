#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "needlets/diagnostics.hpp"
#include "needlets/field.hpp"
#include "needlets/frame.hpp"
#include "needlets/stats.hpp"

namespace needlets {

enum class Normalization { exact, estimated };
std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view name);

/// r = max(1, floor(sqrt j) - 1).
int schedule_r(int j);

/// Coarse level whose cells feed the Sigma_hat used by S_j and T_j: the
/// finest admissible one, max(r, j - 3).
int default_sigma_r(int j, int r);

struct ExperimentConfig {
  FrameConfig frame;  // B, level range, cubature and net settings; frame.seed seeds the nets
  double alpha = 3.0;
  double G0 = 1.0;
  /// If non-empty, a tabulated spectrum replaces the power law.
  std::vector<double> cl;
  /// Levels to analyse; empty means every level in [jmin, jmax] admitting
  /// a subsample design.
  std::vector<int> levels;
  int r = -1;        // < 0: schedule_r(j)
  int sigma_r = -1;  // < 0: default_sigma_r(j, r)
  std::vector<int> q{2};
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::exact;
  /// Hemispheric modulation 1 + A sign(<x, axis>); A = 0 is the isotropic model.
  double amplitude = 0.0;
  UnitPoint axis = kNorthPole;
  double tau = -1.0;  // < 0: sqrt(2 log A_j)
  double level = 0.05;
};

/// Throws ValidationError on an inconsistent configuration.
void validate(const ExperimentConfig& config);

struct SubsampleReport {
  int j = 0;
  int r = 0;
  int q = 2;
  std::size_t A_r = 0;
  std::size_t A_j = 0;
  std::vector<double> gamma_stats;
  double sigma_hat_sq = 0.0;
  double Sigma_hat = 0.0;       // (1/A_r) sum_a Gamma_a^2 over the r-cells
  int sigma_r = 0;
  double Sigma_hat_test = 0.0;  // same estimator on the sigma_r cells; normalises S_j
  double Sigma_hat_ns = 0.0;    // q = 2 version on the sigma_r cells; normalises T_j
  double S_j = 0.0;
  double p_sup = 1.0;
  double T_j = 0.0;
  double p_ns = 1.0;
  double whole_sphere = 0.0;    // (1/A_j) sum_k H_q(beta_hat_jk)
  double tau = 0.0;
  std::size_t threshold_count = 0;
  UniformityCheck uniformity;
  std::string normalization;
  double gamma_j = 0.0;         // exact or estimated normalising factor
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const SubsampleReport& report);

/// Everything about one analysed level that does not depend on the field.
struct LevelSetup {
  int j = 0;
  int r = 0;
  int sigma_r = 0;
  double gamma = 0.0;
  SubsampleDesign design;
  VoronoiTessellation sigma_cells;
  VoronoiTessellation hemispheres;
};

struct Realization {
  std::uint64_t seed = 0;
  std::vector<NeedletCoefficients> coeffs;  // one per analysed level, beta_hat filled
  std::vector<SubsampleReport> reports;     // levels x q
};

class Experiment {
 public:
  /// `frame` may be shared between experiments; it must cover the levels.
  explicit Experiment(ExperimentConfig config, std::shared_ptr<const NeedletFrame> frame = nullptr);

  const ExperimentConfig& config() const { return config_; }
  const NeedletFrame& frame() const { return *frame_; }
  std::shared_ptr<const NeedletFrame> shared_frame() const { return frame_; }
  const PowerSpectrum& spectrum() const { return spectrum_; }
  const std::vector<int>& levels() const { return levels_; }
  const LevelSetup& setup(int j) const;

  std::uint64_t replication_seed(std::size_t rep) const;

  /// Harmonic coefficients of the (possibly modulated) field for `seed`.
  HarmonicCoefficients field_alm(std::uint64_t seed) const;

  /// Normalise level-j coefficients according to the configured mode.
  void normalize_level(NeedletCoefficients& coeffs) const;

  /// Reports for one level from normalised coefficients, one per q.
  std::vector<SubsampleReport> reports(const NeedletCoefficients& coeffs, std::uint64_t seed) const;

  Realization run(std::uint64_t seed) const;

 private:
  ExperimentConfig config_;
  std::shared_ptr<const NeedletFrame> frame_;
  PowerSpectrum spectrum_;
  std::vector<int> levels_;
  std::vector<LevelSetup> setups_;
};

/// Cross-replication summary for one (j, q).
struct McSummary {
  int j = 0;
  int q = 2;
  int r = 0;
  std::size_t A_j = 0;
  std::size_t A_r = 0;
  std::size_t replications = 0;
  double mean_sigma_hat_sq = 0.0;
  double mean_Sigma_hat = 0.0;
  double mean_Sigma_hat_test = 0.0;
  std::optional<double> var_hq;            // pooled Var H_q(beta_hat_jk) over k and replications
  std::optional<double> var_gamma;         // pooled Var Gamma_a over cells and replications
  std::optional<double> var_whole_sphere;  // Var of sqrt(A_j) * whole_sphere across replications
  std::optional<Cum4Estimate> cum4_gamma;  // of Gamma_a / sqrt(var_gamma), pooled
  double rejection_T = 0.0;
  double rejection_S = 0.0;
  std::optional<TestResult> ks_p_sup;
  double mean_threshold_count = 0.0;
  double expected_threshold_count = 0.0;   // A_j * 2 (1 - Phi(tau)) for Gaussian beta_hat
};

nlohmann::json to_json(const McSummary& summary);

class McAccumulator {
 public:
  explicit McAccumulator(double level = 0.05) : level_(level) {}
  void add(const Realization& realization);
  std::vector<McSummary> summaries() const;

  /// Raw per-replication values for one (j, q); empty if unseen.
  struct Series {
    int j = 0;
    int q = 2;
    std::vector<SubsampleReport> reports;
    CompensatedSum hq_sum, hq_sq_sum;
    std::size_t hq_count = 0;
  };
  const Series* series(int j, int q) const;

 private:
  double level_;
  std::vector<Series> series_;
};

/// Header and one row per report for the per-replication CSV.
void write_mc_header(std::ostream& os);
void write_mc_rows(std::ostream& os, std::size_t rep, const Realization& realization);

}  // namespace needlets
