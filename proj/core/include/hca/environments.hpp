#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include "hca/mdp.hpp"

namespace hca {

/// Chain of n states with a shortcut to the goal from every chain state.
///
/// States 0..n-1 are the chain, n is the goal, n+1 is absorbing. Action
/// kShortcut jumps to the goal; kLong advances along the chain (the last
/// chain state advances into the goal) and with probability early_term_prob
/// drops straight into the absorbing state instead. Every decision in a
/// chain state pays step_penalty; the goal pays goal_reward on either action
/// and then absorbs. Fully observed.
struct ShortcutConfig {
  std::size_t n = 5;
  double step_penalty = -1.0;
  double goal_reward = 1.0;
  double early_term_prob = 0.1;

  static constexpr ActionId kShortcut = 0;
  static constexpr ActionId kLong = 1;
};

/// Two parallel aliased chains behind a single initial choice.
///
/// State 0 is the start. Action kGood enters chain A, kBad enters chain B;
/// each chain has n states whose rewards are Gaussian(0, noise_std) and which
/// share one observation per position across the two chains. Each chain ends
/// in its own (observable) final state paying final_rewards[0] for chain A,
/// final_rewards[1] for chain B.
struct DelayedEffectConfig {
  std::size_t n = 5;
  double noise_std = 0.0;
  std::array<double, 2> final_rewards{1.0, -1.0};

  static constexpr ActionId kGood = 0;
  static constexpr ActionId kBad = 1;
};

/// Two-armed bandit whose arms cross over with probability epsilon.
///
/// State 0 decides; action i lands in reward state 1+i with probability
/// 1-epsilon and in the other reward state with probability epsilon. Reward
/// state 1+i pays Gaussian(means[i], stddev) and absorbs. With observable=false
/// both reward states share one observation.
struct BanditConfig {
  double epsilon = 0.1;
  std::array<double, 2> means{1.0, 2.0};
  double stddev = 1.5;
  bool observable = true;
};

TabularMDP build_shortcut(const ShortcutConfig& cfg);
TabularMDP build_delayed_effect(const DelayedEffectConfig& cfg);
TabularMDP build_ambiguous_bandit(const BanditConfig& cfg);

/// Return range [lo, hi] used to bin returns for the return-conditioned
/// hindsight table. Bounded tasks use their analytic extremes; Gaussian noise
/// is covered to three standard deviations of the accumulated noise.
std::pair<double, double> return_range(const ShortcutConfig& cfg);
std::pair<double, double> return_range(const DelayedEffectConfig& cfg);
std::pair<double, double> return_range(const BanditConfig& cfg);

}  // namespace hca
