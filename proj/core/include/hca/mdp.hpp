#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "hca/policy.hpp"
#include "hca/rng.hpp"

namespace hca {

struct DeterministicReward {
  double value = 0.0;
};

struct GaussianReward {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Finite-support reward: values[i] with probability probs[i].
struct FiniteReward {
  std::vector<double> values;
  std::vector<double> probs;
};

class RewardSpec {
 public:
  RewardSpec() = default;
  RewardSpec(DeterministicReward r) : kind_(r) {}
  RewardSpec(GaussianReward r) : kind_(r) {}
  RewardSpec(FiniteReward r) : kind_(std::move(r)) {}

  static RewardSpec deterministic(double value) { return DeterministicReward{value}; }
  static RewardSpec gaussian(double mean, double stddev) { return GaussianReward{mean, stddev}; }
  static RewardSpec finite(std::vector<double> values, std::vector<double> probs) {
    return FiniteReward{std::move(values), std::move(probs)};
  }

  double mean() const;
  double sample(Engine& engine) const;

  /// True when the support is finite: deterministic, finite, or a Gaussian
  /// with zero standard deviation.
  bool has_finite_support() const;

  /// Atoms as (value, probability) pairs; only valid when has_finite_support().
  std::vector<std::pair<double, double>> atoms() const;

  /// Throws ConfigError when probabilities or the standard deviation are invalid.
  void validate() const;

  const auto& kind() const { return kind_; }

 private:
  std::variant<DeterministicReward, GaussianReward, FiniteReward> kind_;
};

/// Finite MDP with an observation map. Learned tables index by observation;
/// the simulator keeps the true state. Fully observed tasks use the identity map.
struct TabularMDP {
  TabularMDP() = default;
  TabularMDP(std::size_t n_states, std::size_t n_actions);

  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t n_observations = 0;
  /// transition[(x * n_actions + a) * n_states + y] = p(y | x, a)
  std::vector<double> transition;
  /// reward[x * n_actions + a]
  std::vector<RewardSpec> reward;
  std::vector<ObsId> observation_of;
  StateId initial_state = 0;
  std::vector<bool> absorbing;
  double discount = 1.0;
  std::size_t horizon = 1;

  double p(StateId x, ActionId a, StateId y) const {
    return transition[(x * n_actions + a) * n_states + y];
  }
  double& p(StateId x, ActionId a, StateId y) {
    return transition[(x * n_actions + a) * n_states + y];
  }
  std::span<const double> row(StateId x, ActionId a) const {
    return {transition.data() + (x * n_actions + a) * n_states, n_states};
  }
  const RewardSpec& reward_spec(StateId x, ActionId a) const { return reward[x * n_actions + a]; }
  RewardSpec& reward_spec(StateId x, ActionId a) { return reward[x * n_actions + a]; }
  double mean_reward(StateId x, ActionId a) const { return reward_spec(x, a).mean(); }

  /// Marks x absorbing: self-loop with probability 1 and zero reward.
  void make_absorbing(StateId x);

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

struct Step {
  ObsId obs = 0;
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;

  friend bool operator==(const Step&, const Step&) = default;
};

/// One episode. steps[k] holds (X_k, A_k, R_k); final_state is X_L after the
/// last step. terminated is true when X_L is absorbing, false when the
/// horizon cut the episode.
struct Trajectory {
  std::vector<Step> steps;
  StateId final_state = 0;
  ObsId final_obs = 0;
  bool terminated = false;
  std::uint64_t seed = 0;

  std::size_t size() const { return steps.size(); }
  /// Observation at index k in [0, size()]; index size() is the final observation.
  ObsId obs_at(std::size_t k) const { return k < steps.size() ? steps[k].obs : final_obs; }
  double undiscounted_return() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Rolls out one episode from the initial state. Actions come from the
/// policy stream, transitions and rewards from the environment stream.
Trajectory sample_trajectory(const TabularMDP& mdp, const SoftmaxPolicy& policy, RunStreams& rng);

/// sum_{t >= start} gamma^(t - start) R_t over the recorded steps.
double discounted_return(const Trajectory& traj, std::size_t start, double gamma);

/// Z_s for every s, computed by the backward recursion Z_s = R_s + gamma Z_{s+1}.
std::vector<double> discounted_returns(const Trajectory& traj, double gamma);

}  // namespace hca
