#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hca/config.hpp"

namespace hca {

std::string_view library_version();

struct RunMetadata {
  std::string config_echo;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  double wall_time_s = 0.0;
  std::string version;
};

/// Learning curves of one method: per-seed undiscounted episode returns and
/// their mean and population standard deviation across seeds.
struct MethodCurve {
  Algorithm method = Algorithm::StateHCA;
  std::vector<std::vector<double>> returns;  // [seed][episode]
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct RunResult {
  std::size_t n_episodes = 0;
  std::size_t n_seeds = 0;
  std::vector<MethodCurve> curves;
  RunMetadata meta;
};

/// Undiscounted returns of one learner over n_episodes, all randomness from
/// RunStreams(seed).
std::vector<double> run_single(const TabularMDP& mdp, const AgentConfig& agent_cfg, std::uint64_t seed,
                               std::size_t n_episodes);

/// Mean and population standard deviation per episode.
void aggregate(MethodCurve& curve, std::size_t n_episodes);

/// Seed i is derive_seed(master_seed, i); every method sees the same seeds.
/// Seeds run on up to `threads` workers; aggregation is ordered by seed.
RunResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1);

struct ProbeRow {
  double long_prob = 0.0;
  ProbeMethod method = ProbeMethod::Oracle;
  std::size_t repetition = 0;
  double advantage = 0.0;
};

/// Shortcut only. For each long-path probability (the long_prob sweep
/// values) and repetition, fixes pi(LONG) = p in chain states and records
/// each method's estimate of A(x_0, probe_action).
std::vector<ProbeRow> run_advantage_probe(const ExperimentConfig& cfg);

/// Policy with pi(LONG | chain state) = long_prob and uniform elsewhere.
SoftmaxPolicy shortcut_probe_policy(const ShortcutConfig& sc, double long_prob);

struct SweepRow {
  double axis_value = 0.0;
  Algorithm method = Algorithm::StateHCA;
  double final_mean = 0.0;
  double final_std = 0.0;
  std::size_t n_seeds = 0;
};

/// Mean of the last 10% of episodes (at least one).
double final_performance(const std::vector<double>& returns);

/// One run_experiment per axis value; final performance per seed, then mean
/// and population standard deviation over seeds.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::size_t threads = 1);

struct CalibrationRow {
  Algorithm method = Algorithm::StateHCA;
  double lr = 0.0;
  double auc = 0.0;
  bool best = false;
};

/// Area under the mean learning curve, averaged over episodes.
double area_under_curve(const std::vector<double>& mean_curve);

/// Grid search of lr per method by area under the mean learning curve.
std::vector<CalibrationRow> calibrate(const ExperimentConfig& cfg, std::size_t threads = 1);

// --- Output -------------------------------------------------------------

/// `episode,method,mean_return,std_return,n_seeds`, method-major.
void emit_csv(const RunResult& result, const std::filesystem::path& path);
std::string format_csv(const RunResult& result);
std::string format_probe_csv(const std::vector<ProbeRow>& rows);
std::string format_sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis);
std::string format_calibration_csv(const std::vector<CalibrationRow>& rows);

/// JSON sidecar: config echo, hash, seeds, wall time, version.
std::string format_metadata(const RunMetadata& meta);
RunMetadata make_metadata(const ExperimentConfig& cfg, double wall_time_s);

/// Writes bytes to path; failures name the path.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace hca
