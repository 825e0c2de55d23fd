#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hca/agents.hpp"
#include "hca/environments.hpp"
#include "hca/probe.hpp"

namespace hca {

enum class EnvKind { Shortcut, DelayedEffect, Bandit };
enum class SweepAxis { None, Sigma, Epsilon, LearningRate, LongProb };

std::string_view to_string(EnvKind kind);
std::string_view to_string(SweepAxis axis);

/// Everything needed to reproduce one experiment. Built from flat
/// `key = value` text; see README for the key list.
struct ExperimentConfig {
  EnvKind env = EnvKind::Shortcut;
  ShortcutConfig shortcut;
  DelayedEffectConfig delayed_effect;
  BanditConfig bandit;

  std::vector<Algorithm> methods{Algorithm::StateHCA};
  /// Shared agent settings; algorithm, return range and gamma are filled per method.
  AgentConfig agent;
  std::map<Algorithm, double> lr_override;

  std::size_t n_seeds = 100;
  std::size_t n_episodes = 500;
  std::uint64_t master_seed = 1;

  std::size_t probe_rollouts = 1000;
  ActionId probe_action = ShortcutConfig::kShortcut;
  std::vector<ProbeMethod> probe_methods{ProbeMethod::Oracle, ProbeMethod::StateHCA, ProbeMethod::BaselinePG,
                                         ProbeMethod::ReturnHCA};

  SweepAxis sweep_axis = SweepAxis::None;
  std::vector<double> sweep_values;

  std::vector<double> calibrate_grid{0.1, 0.2, 0.3, 0.4};

  /// Parsed entries, sorted by key; the source of the canonical echo.
  std::map<std::string, std::string> entries;

  TabularMDP build_environment() const;
  /// Agent settings for one method: lr override, environment return range, gamma.
  AgentConfig agent_for(Algorithm method) const;
  /// Copy with one sweep axis value applied.
  ExperimentConfig at_axis_value(double value) const;

  void validate() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replaces or adds one entry and re-parses.
ExperimentConfig with_override(const ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines in key order.
std::string canonical_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace hca
