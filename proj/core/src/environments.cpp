#include "hca/environments.hpp"

#include <algorithm>
#include <cmath>

#include "hca/errors.hpp"

namespace hca {

TabularMDP build_shortcut(const ShortcutConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("shortcut: chain length n must be >= 2");
  if (!(cfg.early_term_prob >= 0.0 && cfg.early_term_prob <= 1.0)) {
    throw ConfigError("shortcut: early_term_prob outside [0, 1]");
  }
  const std::size_t n = cfg.n;
  const StateId goal = n;
  const StateId sink = n + 1;
  TabularMDP mdp(n + 2, 2);
  for (StateId x = 0; x < n; ++x) {
    mdp.p(x, ShortcutConfig::kShortcut, goal) = 1.0;
    const StateId next = (x + 1 < n) ? x + 1 : goal;
    mdp.p(x, ShortcutConfig::kLong, next) += 1.0 - cfg.early_term_prob;
    mdp.p(x, ShortcutConfig::kLong, sink) += cfg.early_term_prob;
    for (ActionId a = 0; a < 2; ++a) mdp.reward_spec(x, a) = RewardSpec::deterministic(cfg.step_penalty);
  }
  for (ActionId a = 0; a < 2; ++a) {
    mdp.p(goal, a, sink) = 1.0;
    mdp.reward_spec(goal, a) = RewardSpec::deterministic(cfg.goal_reward);
  }
  mdp.make_absorbing(sink);
  mdp.initial_state = 0;
  mdp.discount = 1.0;
  // Longest episode: n chain decisions then the goal step.
  mdp.horizon = n + 1;
  mdp.validate();
  return mdp;
}

TabularMDP build_delayed_effect(const DelayedEffectConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("delayed effect: chain length n must be >= 1");
  if (!(cfg.noise_std >= 0.0)) throw ConfigError("delayed effect: noise_std must be >= 0");
  const std::size_t n = cfg.n;
  // 0: start, 1..n: chain A, n+1..2n: chain B, 2n+1: final A, 2n+2: final B, 2n+3: absorbing.
  const StateId final_a = 2 * n + 1;
  const StateId final_b = 2 * n + 2;
  const StateId sink = 2 * n + 3;
  TabularMDP mdp(2 * n + 4, 2);
  mdp.n_observations = n + 4;

  mdp.p(0, DelayedEffectConfig::kGood, 1) = 1.0;
  mdp.p(0, DelayedEffectConfig::kBad, n + 1) = 1.0;
  mdp.observation_of[0] = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const StateId in_a = k;
    const StateId in_b = n + k;
    const StateId next_a = (k < n) ? in_a + 1 : final_a;
    const StateId next_b = (k < n) ? in_b + 1 : final_b;
    for (ActionId a = 0; a < 2; ++a) {
      mdp.p(in_a, a, next_a) = 1.0;
      mdp.p(in_b, a, next_b) = 1.0;
      mdp.reward_spec(in_a, a) = RewardSpec::gaussian(0.0, cfg.noise_std);
      mdp.reward_spec(in_b, a) = RewardSpec::gaussian(0.0, cfg.noise_std);
    }
    mdp.observation_of[in_a] = k;
    mdp.observation_of[in_b] = k;
  }
  for (ActionId a = 0; a < 2; ++a) {
    mdp.p(final_a, a, sink) = 1.0;
    mdp.p(final_b, a, sink) = 1.0;
    mdp.reward_spec(final_a, a) = RewardSpec::deterministic(cfg.final_rewards[0]);
    mdp.reward_spec(final_b, a) = RewardSpec::deterministic(cfg.final_rewards[1]);
  }
  mdp.observation_of[final_a] = n + 1;
  mdp.observation_of[final_b] = n + 2;
  mdp.observation_of[sink] = n + 3;
  mdp.make_absorbing(sink);
  mdp.initial_state = 0;
  mdp.discount = 1.0;
  mdp.horizon = n + 2;
  mdp.validate();
  return mdp;
}

TabularMDP build_ambiguous_bandit(const BanditConfig& cfg) {
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 0.5)) throw ConfigError("bandit: epsilon must lie in [0, 0.5]");
  if (!(cfg.stddev >= 0.0)) throw ConfigError("bandit: stddev must be >= 0");
  // 0: decision, 1: arm-0 state, 2: arm-1 state, 3: absorbing.
  TabularMDP mdp(4, 2);
  for (ActionId a = 0; a < 2; ++a) {
    mdp.p(0, a, 1 + a) = 1.0 - cfg.epsilon;
    mdp.p(0, a, 2 - a) += cfg.epsilon;
    for (ActionId b = 0; b < 2; ++b) {
      mdp.p(1 + a, b, 3) = 1.0;
      mdp.reward_spec(1 + a, b) = RewardSpec::gaussian(cfg.means[a], cfg.stddev);
    }
  }
  mdp.make_absorbing(3);
  if (cfg.observable) {
    mdp.n_observations = 4;
  } else {
    mdp.n_observations = 3;
    mdp.observation_of = {0, 1, 1, 2};
  }
  mdp.initial_state = 0;
  mdp.discount = 1.0;
  mdp.horizon = 2;
  mdp.validate();
  return mdp;
}

std::pair<double, double> return_range(const ShortcutConfig& cfg) {
  const double worst = static_cast<double>(cfg.n + 1) * cfg.step_penalty;
  const double best = cfg.goal_reward;
  return {std::min(worst, best), std::max(worst, best)};
}

std::pair<double, double> return_range(const DelayedEffectConfig& cfg) {
  const double spread = 3.0 * cfg.noise_std * std::sqrt(static_cast<double>(cfg.n));
  const double lo = std::min(cfg.final_rewards[0], cfg.final_rewards[1]) - spread;
  const double hi = std::max(cfg.final_rewards[0], cfg.final_rewards[1]) + spread;
  return {lo, hi};
}

std::pair<double, double> return_range(const BanditConfig& cfg) {
  const double lo = std::min(cfg.means[0], cfg.means[1]) - 3.0 * cfg.stddev;
  const double hi = std::max(cfg.means[0], cfg.means[1]) + 3.0 * cfg.stddev;
  return {lo, hi};
}

}  // namespace hca
