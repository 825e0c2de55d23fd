#include "hca/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hca/errors.hpp"

namespace hca {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Shortcut:
      return "shortcut";
    case EnvKind::DelayedEffect:
      return "delayed_effect";
    case EnvKind::Bandit:
      return "bandit";
  }
  return "unknown";
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None:
      return "none";
    case SweepAxis::Sigma:
      return "sigma";
    case SweepAxis::Epsilon:
      return "epsilon";
    case SweepAxis::LearningRate:
      return "lr";
    case SweepAxis::LongProb:
      return "long_prob";
  }
  return "unknown";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
  return out;
}

ExperimentConfig from_entries(std::map<std::string, std::string> entries) {
  ExperimentConfig cfg;
  for (const auto& [key, v] : entries) {
    if (key == "env") {
      if (v == "shortcut") cfg.env = EnvKind::Shortcut;
      else if (v == "delayed_effect") cfg.env = EnvKind::DelayedEffect;
      else if (v == "bandit") cfg.env = EnvKind::Bandit;
      else throw ConfigError("config key 'env': unknown environment '" + v + "'");
    } else if (key == "shortcut.n") {
      cfg.shortcut.n = parse_u64(key, v);
    } else if (key == "shortcut.early_term_prob") {
      cfg.shortcut.early_term_prob = parse_double(key, v);
    } else if (key == "shortcut.step_penalty") {
      cfg.shortcut.step_penalty = parse_double(key, v);
    } else if (key == "shortcut.goal_reward") {
      cfg.shortcut.goal_reward = parse_double(key, v);
    } else if (key == "delayed_effect.n") {
      cfg.delayed_effect.n = parse_u64(key, v);
    } else if (key == "delayed_effect.noise_std") {
      cfg.delayed_effect.noise_std = parse_double(key, v);
    } else if (key == "delayed_effect.final_good") {
      cfg.delayed_effect.final_rewards[0] = parse_double(key, v);
    } else if (key == "delayed_effect.final_bad") {
      cfg.delayed_effect.final_rewards[1] = parse_double(key, v);
    } else if (key == "bandit.epsilon") {
      cfg.bandit.epsilon = parse_double(key, v);
    } else if (key == "bandit.mean_1") {
      cfg.bandit.means[0] = parse_double(key, v);
    } else if (key == "bandit.mean_2") {
      cfg.bandit.means[1] = parse_double(key, v);
    } else if (key == "bandit.stddev") {
      cfg.bandit.stddev = parse_double(key, v);
    } else if (key == "bandit.observable") {
      cfg.bandit.observable = parse_bool(key, v);
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& m : split_list(v)) cfg.methods.push_back(parse_algorithm(m));
    } else if (key == "n_step") {
      if (v == "inf") cfg.agent.n_step.reset();
      else cfg.agent.n_step = parse_u64(key, v);
    } else if (key == "lr") {
      cfg.agent.lr = parse_double(key, v);
    } else if (key.rfind("lr.", 0) == 0) {
      cfg.lr_override[parse_algorithm(key.substr(3))] = parse_double(key, v);
    } else if (key == "critic_lr") {
      cfg.agent.critic_lr = parse_double(key, v);
    } else if (key == "hindsight_lr") {
      cfg.agent.hindsight_lr = parse_double(key, v);
    } else if (key == "n_bins") {
      cfg.agent.n_bins = parse_u64(key, v);
    } else if (key == "h_floor") {
      cfg.agent.h_floor = parse_double(key, v);
    } else if (key == "gamma") {
      cfg.agent.gamma = parse_double(key, v);
    } else if (key == "n_seeds") {
      cfg.n_seeds = parse_u64(key, v);
    } else if (key == "n_episodes") {
      cfg.n_episodes = parse_u64(key, v);
    } else if (key == "master_seed") {
      cfg.master_seed = parse_u64(key, v);
    } else if (key == "probe.n_rollouts") {
      cfg.probe_rollouts = parse_u64(key, v);
    } else if (key == "probe.action") {
      cfg.probe_action = parse_u64(key, v);
    } else if (key == "probe.methods") {
      cfg.probe_methods.clear();
      for (const auto& m : split_list(v)) cfg.probe_methods.push_back(parse_probe_method(m));
    } else if (key == "sweep.axis") {
      if (v == "none") cfg.sweep_axis = SweepAxis::None;
      else if (v == "sigma") cfg.sweep_axis = SweepAxis::Sigma;
      else if (v == "epsilon") cfg.sweep_axis = SweepAxis::Epsilon;
      else if (v == "lr") cfg.sweep_axis = SweepAxis::LearningRate;
      else if (v == "long_prob") cfg.sweep_axis = SweepAxis::LongProb;
      else throw ConfigError("config key 'sweep.axis': unknown axis '" + v + "'");
    } else if (key == "sweep.values") {
      cfg.sweep_values = parse_doubles(key, v);
    } else if (key == "calibrate.grid") {
      cfg.calibrate_grid = parse_doubles(key, v);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  cfg.entries = std::move(entries);
  cfg.validate();
  return cfg;
}

}  // namespace

TabularMDP ExperimentConfig::build_environment() const {
  switch (env) {
    case EnvKind::Shortcut:
      return build_shortcut(shortcut);
    case EnvKind::DelayedEffect:
      return build_delayed_effect(delayed_effect);
    case EnvKind::Bandit:
      return build_ambiguous_bandit(bandit);
  }
  throw ConfigError("unknown environment");
}

AgentConfig ExperimentConfig::agent_for(Algorithm method) const {
  AgentConfig out = agent;
  out.algorithm = method;
  if (auto it = lr_override.find(method); it != lr_override.end()) out.lr = it->second;
  std::pair<double, double> range;
  switch (env) {
    case EnvKind::Shortcut:
      range = return_range(shortcut);
      break;
    case EnvKind::DelayedEffect:
      range = return_range(delayed_effect);
      break;
    case EnvKind::Bandit:
      range = return_range(bandit);
      break;
  }
  out.return_lo = range.first;
  out.return_hi = range.second;
  out.validate();
  return out;
}

ExperimentConfig ExperimentConfig::at_axis_value(double value) const {
  ExperimentConfig out = *this;
  switch (sweep_axis) {
    case SweepAxis::None:
      break;
    case SweepAxis::Sigma:
      out.delayed_effect.noise_std = value;
      break;
    case SweepAxis::Epsilon:
      out.bandit.epsilon = value;
      break;
    case SweepAxis::LearningRate:
      out.agent.lr = value;
      out.lr_override.clear();
      break;
    case SweepAxis::LongProb:
      break;
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (n_seeds == 0) throw ConfigError("n_seeds must be at least 1");
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (sweep_axis != SweepAxis::None && sweep_values.empty())
    throw ConfigError("sweep.values must not be empty when sweep.axis is set");
  if (sweep_axis == SweepAxis::Sigma && env != EnvKind::DelayedEffect)
    throw ConfigError("a sigma sweep needs env = delayed_effect");
  if (sweep_axis == SweepAxis::Epsilon && env != EnvKind::Bandit)
    throw ConfigError("an epsilon sweep needs env = bandit");
  if (sweep_axis == SweepAxis::LongProb) {
    if (env != EnvKind::Shortcut) throw ConfigError("a long_prob sweep needs env = shortcut");
    for (double p : sweep_values)
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("long_prob values must lie in (0, 1)");
  }
  if (calibrate_grid.empty()) throw ConfigError("calibrate.grid must not be empty");
  for (auto m : methods) agent_for(m);
  build_environment();
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    if (!entries.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return from_entries(std::move(entries));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ExperimentConfig with_override(const ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto entries = cfg.entries;
  entries[key] = value;
  return from_entries(std::move(entries));
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : cfg.entries) out += key + " = " + value + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace hca
