#include "hca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "hca/csv.hpp"
#include "hca/errors.hpp"
#include "json.hpp"

#ifndef HCA_VERSION
#define HCA_VERSION "0.0.0"
#endif

namespace hca {

std::string_view library_version() { return HCA_VERSION; }

namespace {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must only
/// write to slot i of its output.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::uint64_t> seeds_for(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds(cfg.n_seeds);
  for (std::size_t i = 0; i < cfg.n_seeds; ++i) seeds[i] = derive_seed(cfg.master_seed, i);
  return seeds;
}

std::pair<double, double> mean_and_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<double> run_single(const TabularMDP& mdp, const AgentConfig& agent_cfg, std::uint64_t seed,
                               std::size_t n_episodes) {
  Agent agent(mdp, agent_cfg);
  RunStreams rng(seed);
  std::vector<double> returns;
  returns.reserve(n_episodes);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    const auto traj = sample_trajectory(mdp, agent.policy, rng);
    returns.push_back(traj.undiscounted_return());
    agent.update(traj);
  }
  return returns;
}

void aggregate(MethodCurve& curve, std::size_t n_episodes) {
  curve.mean.assign(n_episodes, 0.0);
  curve.stddev.assign(n_episodes, 0.0);
  std::vector<double> column(curve.returns.size());
  for (std::size_t e = 0; e < n_episodes; ++e) {
    for (std::size_t s = 0; s < curve.returns.size(); ++s) column[s] = curve.returns[s].at(e);
    std::tie(curve.mean[e], curve.stddev[e]) = mean_and_std(column);
  }
}

RunMetadata make_metadata(const ExperimentConfig& cfg, double wall_time_s) {
  RunMetadata meta;
  meta.config_echo = canonical_config(cfg);
  meta.config_hash = fnv1a64(meta.config_echo);
  meta.master_seed = cfg.master_seed;
  meta.seeds = seeds_for(cfg);
  meta.wall_time_s = wall_time_s;
  meta.version = std::string(library_version());
  return meta;
}

RunResult run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto mdp = cfg.build_environment();
  const auto seeds = seeds_for(cfg);

  RunResult result;
  result.n_episodes = cfg.n_episodes;
  result.n_seeds = cfg.n_seeds;
  for (Algorithm method : cfg.methods) {
    const AgentConfig agent_cfg = cfg.agent_for(method);
    MethodCurve curve;
    curve.method = method;
    curve.returns.resize(seeds.size());
    parallel_for(seeds.size(), threads,
                 [&](std::size_t i) { curve.returns[i] = run_single(mdp, agent_cfg, seeds[i], cfg.n_episodes); });
    aggregate(curve, cfg.n_episodes);
    result.curves.push_back(std::move(curve));
  }
  result.meta = make_metadata(cfg, elapsed_since(start));
  return result;
}

SoftmaxPolicy shortcut_probe_policy(const ShortcutConfig& sc, double long_prob) {
  if (!(long_prob > 0.0 && long_prob < 1.0)) throw ConfigError("long-path probability must lie in (0, 1)");
  const auto mdp = build_shortcut(sc);
  SoftmaxPolicy policy(mdp.n_observations, mdp.n_actions);
  std::vector<double> row(mdp.n_actions, 0.0);
  row[ShortcutConfig::kLong] = std::log(long_prob / (1.0 - long_prob));
  for (StateId x = 0; x < sc.n; ++x) policy.set_logits(mdp.observation_of[x], row);
  return policy;
}

std::vector<ProbeRow> run_advantage_probe(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.env != EnvKind::Shortcut) throw ConfigError("the advantage probe needs env = shortcut");
  const std::vector<double> long_probs = cfg.sweep_axis == SweepAxis::LongProb
                                             ? cfg.sweep_values
                                             : std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99};
  const auto mdp = cfg.build_environment();
  if (cfg.probe_action >= mdp.n_actions) throw ConfigError("probe.action is not an action of the environment");
  const auto seeds = seeds_for(cfg);

  std::vector<ProbeRow> rows;
  for (double p : long_probs) {
    const auto policy = shortcut_probe_policy(cfg.shortcut, p);
    for (ProbeMethod method : cfg.probe_methods) {
      AgentConfig agent_cfg = cfg.agent_for(Algorithm::StateHCA);
      switch (method) {
        case ProbeMethod::ReturnHCA:
          agent_cfg = cfg.agent_for(Algorithm::ReturnHCA);
          break;
        case ProbeMethod::BaselinePG:
          agent_cfg = cfg.agent_for(Algorithm::BaselinePG);
          break;
        case ProbeMethod::MonteCarloPG:
          agent_cfg = cfg.agent_for(Algorithm::MonteCarloPG);
          break;
        default:
          break;
      }
      for (std::size_t r = 0; r < seeds.size(); ++r) {
        RunStreams rng(seeds[r]);
        const auto est = estimate_advantage_probe(mdp, policy, method, cfg.probe_rollouts, agent_cfg, rng);
        rows.push_back({p, method, r, est[cfg.probe_action]});
      }
    }
  }
  return rows;
}

double final_performance(const std::vector<double>& returns) {
  if (returns.empty()) return 0.0;
  const std::size_t window = std::max<std::size_t>(1, returns.size() / 10);
  double total = 0.0;
  for (std::size_t i = returns.size() - window; i < returns.size(); ++i) total += returns[i];
  return total / static_cast<double>(window);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  const std::vector<double> values = cfg.sweep_axis == SweepAxis::None ? std::vector<double>{0.0} : cfg.sweep_values;
  std::vector<SweepRow> rows;
  for (double v : values) {
    const auto result = run_experiment(cfg.at_axis_value(v), threads);
    for (const auto& curve : result.curves) {
      std::vector<double> finals;
      for (const auto& seed_returns : curve.returns) finals.push_back(final_performance(seed_returns));
      const auto [mean, sd] = mean_and_std(finals);
      rows.push_back({v, curve.method, mean, sd, finals.size()});
    }
  }
  return rows;
}

double area_under_curve(const std::vector<double>& mean_curve) {
  if (mean_curve.empty()) return 0.0;
  double total = 0.0;
  for (double v : mean_curve) total += v;
  return total / static_cast<double>(mean_curve.size());
}

std::vector<CalibrationRow> calibrate(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<CalibrationRow> rows;
  for (Algorithm method : cfg.methods) {
    const std::size_t first = rows.size();
    for (double lr : cfg.calibrate_grid) {
      ExperimentConfig sub = cfg;
      sub.methods = {method};
      sub.lr_override[method] = lr;
      const auto result = run_experiment(sub, threads);
      rows.push_back({method, lr, area_under_curve(result.curves.front().mean), false});
    }
    std::size_t best = first;
    for (std::size_t i = first; i < rows.size(); ++i)
      if (rows[i].auc > rows[best].auc) best = i;
    rows[best].best = true;
  }
  return rows;
}

std::string format_csv(const RunResult& result) {
  std::string out = "episode,method,mean_return,std_return,n_seeds\n";
  for (const auto& curve : result.curves)
    for (std::size_t e = 0; e < curve.mean.size(); ++e)
      out += csv_row({std::to_string(e), std::string(to_string(curve.method)), format_number(curve.mean[e]),
                      format_number(curve.stddev[e]), std::to_string(curve.returns.size())});
  return out;
}

void emit_csv(const RunResult& result, const std::filesystem::path& path) { write_file(path, format_csv(result)); }

std::string format_probe_csv(const std::vector<ProbeRow>& rows) {
  std::string out = "long_prob,method,repetition,advantage\n";
  for (const auto& r : rows)
    out += csv_row({format_number(r.long_prob), std::string(to_string(r.method)), std::to_string(r.repetition),
                    format_number(r.advantage)});
  return out;
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis) {
  std::string out = std::string(to_string(axis)) + ",method,final_mean,final_std,n_seeds\n";
  for (const auto& r : rows)
    out += csv_row({format_number(r.axis_value), std::string(to_string(r.method)), format_number(r.final_mean),
                    format_number(r.final_std), std::to_string(r.n_seeds)});
  return out;
}

std::string format_calibration_csv(const std::vector<CalibrationRow>& rows) {
  std::string out = "method,lr,auc,best\n";
  for (const auto& r : rows)
    out += csv_row({std::string(to_string(r.method)), format_number(r.lr), format_number(r.auc),
                    r.best ? "1" : "0"});
  return out;
}

std::string format_metadata(const RunMetadata& meta) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(meta.config_hash));
  nlohmann::ordered_json j;
  j["config"] = meta.config_echo;
  j["config_hash"] = hash;
  j["master_seed"] = meta.master_seed;
  j["seeds"] = meta.seeds;
  j["wall_time_s"] = meta.wall_time_s;
  j["version"] = meta.version;
  return j.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace hca
