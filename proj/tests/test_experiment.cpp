#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "needlets/error.hpp"
#include "needlets/experiment.hpp"

using namespace needlets;

namespace {

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.frame.jmin = 4;
  c.frame.jmax = 4;
  c.frame.seed = 5;
  c.q = {2, 3};
  c.seed = 11;
  return c;
}

const Experiment& shared_experiment() {
  static const Experiment e(base_config());
  return e;
}

}  // namespace

TEST_CASE("schedule") {
  CHECK(schedule_r(4) == 1);
  CHECK(schedule_r(8) == 1);
  CHECK(schedule_r(9) == 2);
  CHECK(schedule_r(16) == 3);
  CHECK(default_sigma_r(5, 1) == 2);
  CHECK(default_sigma_r(4, 1) == 1);
  CHECK(parse_normalization("estimated") == Normalization::estimated);
  CHECK_THROWS_AS(parse_normalization("other"), ValidationError);
}

TEST_CASE("configuration validation") {
  auto c = base_config();
  c.replications = 0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c = base_config();
  c.frame.B = 1.0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c = base_config();
  c.amplitude = 1.0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c = base_config();
  c.levels = {4};
  c.r = 3;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c = base_config();
  c.frame.jmin = 0;
  c.frame.jmax = 2;
  CHECK_THROWS_AS(Experiment{c}, ValidationError);
}

TEST_CASE("one realization") {
  const auto& e = shared_experiment();
  REQUIRE(e.levels() == std::vector<int>{4});
  const auto real = e.run(e.replication_seed(0));
  REQUIRE(real.reports.size() == 2);
  const auto& s = e.setup(4);
  for (const auto& r : real.reports) {
    CHECK(r.j == 4);
    CHECK(r.r == 1);
    CHECK(r.A_r == s.design.A_r());
    CHECK(r.gamma_stats.size() == r.A_r);
    CHECK(r.p_sup >= 0.0);
    CHECK(r.p_sup <= 1.0);
    CHECK(r.p_ns >= 0.0);
    CHECK(r.p_ns <= 1.0);
    CHECK(r.Sigma_hat == doctest::Approx(big_sigma_hat(r.gamma_stats)));
    double m = 0.0;
    for (double g : r.gamma_stats) m = std::max(m, std::abs(g));
    CHECK(r.S_j == doctest::Approx(m / std::sqrt(r.Sigma_hat_test)).epsilon(1e-12));
    const auto j = to_json(r);
    for (const char* key : {"j", "r", "q", "A_r", "gamma_stats", "sigma_hat_sq", "Sigma_hat", "S_j", "p_sup", "T_j",
                            "p_ns", "seed"})
      CHECK(j.contains(key));
  }
  // same seed, same numbers
  const auto again = e.run(e.replication_seed(0));
  CHECK(again.reports[0].gamma_stats == real.reports[0].gamma_stats);
  CHECK(again.reports[1].T_j == real.reports[1].T_j);
}

TEST_CASE("degenerate coefficients") {
  const auto& e = shared_experiment();
  NeedletCoefficients zero{4, std::vector<double>(e.setup(4).design.A_j(), 0.0), {}};
  zero.beta_hat = zero.beta;
  CHECK_THROWS_AS(e.reports(zero, 1), ValidationError);
  NeedletCoefficients wrong{4, {1.0}, {1.0}};
  CHECK_THROWS_AS(e.reports(wrong, 1), ValidationError);
}

TEST_CASE("summaries") {
  const auto& e = shared_experiment();
  McAccumulator one;
  const auto real = e.run(e.replication_seed(3));
  one.add(real);
  const auto s = one.summaries();
  REQUIRE(s.size() == 2);
  CHECK(s[0].replications == 1);
  CHECK(s[0].mean_sigma_hat_sq == real.reports[0].sigma_hat_sq);
  CHECK(s[0].mean_Sigma_hat == real.reports[0].Sigma_hat);
  CHECK_FALSE(s[0].var_whole_sphere.has_value());

  McAccumulator a, b;
  for (std::size_t rep = 0; rep < 3; ++rep) {
    a.add(e.run(e.replication_seed(rep)));
    b.add(e.run(e.replication_seed(rep)));
  }
  CHECK(to_json(a.summaries()[1]).dump() == to_json(b.summaries()[1]).dump());

  std::stringstream csv;
  write_mc_header(csv);
  write_mc_rows(csv, 0, real);
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("estimated normalization") {
  auto c = base_config();
  c.normalization = Normalization::estimated;
  const Experiment e(c, shared_experiment().shared_frame());
  const auto real = e.run(e.replication_seed(0));
  double s = 0.0;
  for (double b : real.coeffs[0].beta_hat) s += b * b;
  CHECK(s / static_cast<double>(real.coeffs[0].beta_hat.size()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(real.reports[0].normalization == "estimated");
}

TEST_CASE("modulated experiment") {
  auto c = base_config();
  c.amplitude = 0.5;
  c.q = {2};
  const Experiment e(c, shared_experiment().shared_frame());
  // Modulation inflates the north-south contrast relative to the isotropic runs
  // (whose T_j is roughly chi-square(1)).
  double mean_T = 0.0, mean_T0 = 0.0;
  for (std::size_t rep = 0; rep < 10; ++rep) {
    mean_T += e.run(e.replication_seed(rep)).reports[0].T_j;
    mean_T0 += shared_experiment().run(e.replication_seed(rep)).reports[0].T_j;
  }
  CHECK(mean_T > 2.0 * mean_T0);
}
