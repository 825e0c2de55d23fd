#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hca/config.hpp"
#include "hca/csv.hpp"
#include "hca/errors.hpp"
#include "hca/harness.hpp"

using namespace hca;

namespace {

const char* kSmall =
    "# tiny delayed effect run\n"
    "env = delayed_effect\n"
    "delayed_effect.n = 2\n"
    "methods = state_hca, baseline_pg\n"
    "n_step = 2\n"
    "n_seeds = 4\n"
    "n_episodes = 30\n"
    "master_seed = 9\n";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ParsesKeys) {
  const auto cfg = parse_config(
      "env = bandit\n"
      "bandit.epsilon = 0.25   \n"
      "bandit.observable = false\n"
      "methods = return_hca, mc_pg\n"
      "n_step = inf\n"
      "lr.mc_pg = 0.1\n"
      "sweep.axis = epsilon\n"
      "sweep.values = 0.1, 0.3\n");
  EXPECT_EQ(cfg.env, EnvKind::Bandit);
  EXPECT_DOUBLE_EQ(cfg.bandit.epsilon, 0.25);
  EXPECT_FALSE(cfg.bandit.observable);
  ASSERT_EQ(cfg.methods.size(), 2u);
  EXPECT_FALSE(cfg.agent.n_step.has_value());
  EXPECT_DOUBLE_EQ(cfg.agent_for(Algorithm::MonteCarloPG).lr, 0.1);
  EXPECT_DOUBLE_EQ(cfg.agent_for(Algorithm::ReturnHCA).lr, 0.3);
  EXPECT_EQ(cfg.sweep_axis, SweepAxis::Epsilon);
  EXPECT_DOUBLE_EQ(cfg.at_axis_value(0.3).bandit.epsilon, 0.3);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("env = moon\n"), ConfigError);
  EXPECT_THROW(parse_config("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse_config("n_seeds = 3\nn_seeds = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("n_seeds 3\n"), ConfigError);
  EXPECT_THROW(parse_config("lr = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("n_seeds = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("env = shortcut\nsweep.axis = sigma\nsweep.values = 1\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/x.conf"), ConfigError);
}

TEST(Config, CanonicalEchoAndHash) {
  const auto a = parse_config("n_seeds = 2\n# note\nenv = shortcut\n");
  const auto b = parse_config("env   =   shortcut\nn_seeds = 2\n");
  EXPECT_EQ(canonical_config(a), canonical_config(b));
  EXPECT_EQ(canonical_config(a), "env = shortcut\nn_seeds = 2\n");
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  const auto c = with_override(a, "n_seeds", "5");
  EXPECT_EQ(c.n_seeds, 5u);
  EXPECT_NE(fnv1a64(canonical_config(a)), fnv1a64(canonical_config(c)));
}

TEST(Config, ShippedConfigsLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(HCA_CONFIG_DIR)) {
    if (entry.path().extension() != ".conf") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
}

TEST(Csv, FormattingAndRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(csv_row({"a", "1", "x"}), "a,1,x\n");
  const auto f = parse_csv_row("3,state_hca,0.5,0.25,10");
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(f[1], "state_hca");
}

TEST(Harness, EmptyRunIsHeaderOnly) {
  auto cfg = with_override(parse_config(kSmall), "n_episodes", "0");
  cfg = with_override(cfg, "n_seeds", "1");
  const auto r = run_experiment(cfg);
  EXPECT_EQ(format_csv(r), "episode,method,mean_return,std_return,n_seeds\n");
  EXPECT_EQ(r.meta.seeds.size(), 1u);
  EXPECT_NE(format_metadata(r.meta).find("\"config_hash\""), std::string::npos);
}

TEST(Harness, AggregatesRecomputeFromSeeds) {
  const auto r = run_experiment(parse_config(kSmall));
  ASSERT_EQ(r.curves.size(), 2u);
  for (const auto& c : r.curves) {
    ASSERT_EQ(c.returns.size(), 4u);
    for (std::size_t e = 0; e < r.n_episodes; ++e) {
      double m = 0.0, v = 0.0;
      for (const auto& s : c.returns) m += s[e];
      m /= 4.0;
      for (const auto& s : c.returns) v += (s[e] - m) * (s[e] - m);
      EXPECT_NEAR(c.mean[e], m, 1e-12);
      EXPECT_NEAR(c.stddev[e], std::sqrt(v / 4.0), 1e-12);
    }
  }
  // Each seed is the standalone run with the derived seed.
  const auto cfg = parse_config(kSmall);
  EXPECT_EQ(r.curves[0].returns[2], run_single(cfg.build_environment(), cfg.agent_for(cfg.methods[0]),
                                               derive_seed(cfg.master_seed, 2), cfg.n_episodes));
}

TEST(Harness, DeterministicBytesAcrossThreadCounts) {
  const auto cfg = parse_config(kSmall);
  const auto one = format_csv(run_experiment(cfg, 1));
  EXPECT_EQ(one, format_csv(run_experiment(cfg, 1)));
  EXPECT_EQ(one, format_csv(run_experiment(cfg, 3)));
  const auto csv = one.substr(one.find('\n') + 1);
  const auto first = parse_csv_row(csv.substr(0, csv.find('\n')));
  EXPECT_EQ(first[0], "0");
  EXPECT_EQ(first[1], "state_hca");
  EXPECT_EQ(first[4], "4");
}

TEST(Harness, EmitCsvWritesIdenticalFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "hca_emit_test";
  std::filesystem::create_directories(dir);
  const auto cfg = parse_config(kSmall);
  emit_csv(run_experiment(cfg), dir / "a.csv");
  emit_csv(run_experiment(cfg), dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(emit_csv(run_experiment(cfg), "/nonexistent/dir/x.csv"), std::runtime_error);
}

TEST(Harness, FinalPerformanceAndArea) {
  std::vector<double> r(20, 0.0);
  r[18] = 1.0;
  r[19] = 3.0;
  EXPECT_DOUBLE_EQ(final_performance(r), 2.0);
  EXPECT_DOUBLE_EQ(final_performance({5.0}), 5.0);
  EXPECT_DOUBLE_EQ(area_under_curve({1.0, 2.0, 3.0}), 2.0);
}

TEST(Harness, SinglePointSweepMatchesRun) {
  const auto cfg = parse_config(std::string(kSmall) + "sweep.axis = sigma\nsweep.values = 0\n");
  const auto rows = run_sweep(cfg);
  const auto run = run_experiment(parse_config(kSmall));
  ASSERT_EQ(rows.size(), 2u);
  double m = 0.0;
  for (const auto& s : run.curves[0].returns) m += final_performance(s);
  EXPECT_NEAR(rows[0].final_mean, m / 4.0, 1e-12);
}

TEST(Harness, BanditOptimumDecaysWithCrossover) {
  auto cfg = parse_config(
      "env = bandit\n"
      "bandit.stddev = 0.5\n"
      "methods = baseline_pg\n"
      "n_step = inf\n"
      "sweep.axis = epsilon\n"
      "sweep.values = 0.0, 0.2, 0.4, 0.5\n"
      "n_seeds = 20\n"
      "n_episodes = 200\n");
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].final_mean, rows[i - 1].final_mean);
}

TEST(Harness, CalibrationMarksOneBestPerMethod) {
  auto cfg = with_override(parse_config(kSmall), "calibrate.grid", "0.1, 0.4");
  const auto rows = calibrate(cfg);
  ASSERT_EQ(rows.size(), 4u);
  int best = 0;
  for (const auto& r : rows) best += r.best;
  EXPECT_EQ(best, 2);
  EXPECT_EQ(format_calibration_csv(rows).find("method"), 0u);
}
