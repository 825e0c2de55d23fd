// Command-line front end: run, probe, sweep, verify, calibrate.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hca/config.hpp"
#include "hca/csv.hpp"
#include "hca/errors.hpp"
#include "hca/harness.hpp"
#include "hca/identities.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> master_seed;
  std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("config", opts.config_path, "experiment config file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seeds", opts.seeds, "override n_seeds");
  cmd->add_option("--master-seed", opts.master_seed, "override master_seed");
  cmd->add_option("--threads", opts.threads, "worker threads over seeds")->check(CLI::PositiveNumber);
}

hca::ExperimentConfig load(const CommonOptions& opts) {
  auto cfg = hca::load_config(opts.config_path);
  if (opts.seeds) cfg = hca::with_override(cfg, "n_seeds", std::to_string(*opts.seeds));
  if (opts.master_seed) cfg = hca::with_override(cfg, "master_seed", std::to_string(*opts.master_seed));
  return cfg;
}

fs::path output_path(const CommonOptions& opts, const std::string& suffix) {
  fs::create_directories(opts.out_dir);
  return fs::path(opts.out_dir) / (fs::path(opts.config_path).stem().string() + suffix);
}

void write_outputs(const CommonOptions& opts, const hca::ExperimentConfig& cfg, const std::string& kind,
                   const std::string& csv, double wall_time) {
  const auto csv_path = output_path(opts, "_" + kind + ".csv");
  hca::write_file(csv_path, csv);
  hca::write_file(output_path(opts, "_" + kind + ".meta.json"),
                  hca::format_metadata(hca::make_metadata(cfg, wall_time)));
  std::cout << "wrote " << csv_path.string() << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

int run_verify(std::uint64_t family_seed, std::size_t n_mdps, double tolerance) {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = hca::run_identity_suite(family_seed, n_mdps, {0.9, 0.99, 1.0}, tolerance);
  bool ok = true;
  std::printf("%-22s %8s %8s %14s  %s\n", "identity", "checked", "skipped", "max_discrep", "result");
  for (const auto& r : rows) {
    std::printf("%-22s %8zu %8zu %14.3e  %s\n", std::string(hca::to_string(r.which)).c_str(), r.n_checked,
                r.n_skipped, r.max_discrepancy, r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  std::printf("%zu MDPs x 3 discounts, tolerance %.1e, %.2fs\n", n_mdps, tolerance, seconds_since(start));
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hindsight credit assignment experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hca::library_version()));

  CommonOptions run_opts, probe_opts, sweep_opts, calib_opts;
  auto* run = app.add_subcommand("run", "learning curves for every configured method");
  add_common(run, run_opts);
  auto* probe = app.add_subcommand("probe", "advantage estimates under fixed Shortcut policies");
  add_common(probe, probe_opts);
  auto* sweep = app.add_subcommand("sweep", "final performance along the configured sweep axis");
  add_common(sweep, sweep_opts);
  auto* calib = app.add_subcommand("calibrate", "learning-rate grid search by area under the curve");
  add_common(calib, calib_opts);

  std::uint64_t family_seed = 2019;
  std::size_t n_mdps = 100;
  double tolerance = 1e-9;
  auto* verify = app.add_subcommand("verify", "exact identity suite on random finite MDPs");
  verify->add_option("--mdp-family-seed", family_seed, "seed of the random MDP family");
  verify->add_option("--n-mdps", n_mdps, "number of random MDPs");
  verify->add_option("--tolerance", tolerance, "maximum allowed discrepancy");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) return run_verify(family_seed, n_mdps, tolerance);
    const auto start = std::chrono::steady_clock::now();
    if (*run) {
      const auto cfg = load(run_opts);
      const auto result = hca::run_experiment(cfg, run_opts.threads);
      write_outputs(run_opts, cfg, "run", hca::format_csv(result), seconds_since(start));
    } else if (*probe) {
      const auto cfg = load(probe_opts);
      const auto rows = hca::run_advantage_probe(cfg);
      write_outputs(probe_opts, cfg, "probe", hca::format_probe_csv(rows), seconds_since(start));
    } else if (*sweep) {
      const auto cfg = load(sweep_opts);
      const auto rows = hca::run_sweep(cfg, sweep_opts.threads);
      write_outputs(sweep_opts, cfg, "sweep", hca::format_sweep_csv(rows, cfg.sweep_axis), seconds_since(start));
    } else if (*calib) {
      const auto cfg = load(calib_opts);
      const auto rows = hca::calibrate(cfg, calib_opts.threads);
      for (const auto& r : rows)
        if (r.best)
          std::cout << hca::to_string(r.method) << ": lr = " << hca::format_number(r.lr)
                    << " (auc " << hca::format_number(r.auc) << ")\n";
      write_outputs(calib_opts, cfg, "calibrate", hca::format_calibration_csv(rows), seconds_since(start));
    }
  } catch (const hca::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
