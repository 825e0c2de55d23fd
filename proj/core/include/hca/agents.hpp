#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"
#include "hca/policy.hpp"

namespace hca {

enum class Algorithm { StateHCA, ReturnHCA, BaselinePG, MonteCarloPG };

std::string_view to_string(Algorithm algorithm);
/// Accepts state_hca, return_hca, baseline_pg, mc_pg.
Algorithm parse_algorithm(std::string_view name);

struct AgentConfig {
  Algorithm algorithm = Algorithm::StateHCA;
  /// Bootstrap horizon; nullopt means full Monte Carlo returns.
  std::optional<std::size_t> n_step;
  /// Policy learning rate.
  double lr = 0.3;
  /// Learning rate of V and r_hat; defaults to lr.
  std::optional<double> critic_lr;
  double hindsight_lr = 0.4;
  std::size_t n_bins = 10;
  double return_lo = -1.0;
  double return_hi = 1.0;
  double h_floor = ReturnHindsightTable::kDefaultFloor;
  double gamma = 1.0;

  void validate() const;
  double value_lr() const { return critic_lr.value_or(lr); }
  /// End (exclusive) of the n-step window starting at s in an episode of length L.
  std::size_t window_end(std::size_t s, std::size_t length) const;
};

/// V(x) over observations.
class ValueTable {
 public:
  ValueTable() = default;
  explicit ValueTable(std::size_t n_observations) : v_(n_observations, 0.0) {}

  double operator[](ObsId x) const { return v_.at(x); }
  double& operator[](ObsId x) { return v_.at(x); }
  std::size_t size() const { return v_.size(); }
  const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> v_;
};

/// r_hat(x, a): regression of the immediate reward.
class RewardModel {
 public:
  RewardModel() = default;
  RewardModel(std::size_t n_observations, std::size_t n_actions)
      : n_actions_(n_actions), r_(n_observations * n_actions, 0.0) {}

  double operator()(ObsId x, ActionId a) const { return r_.at(x * n_actions_ + a); }
  double& operator()(ObsId x, ActionId a) { return r_.at(x * n_actions_ + a); }
  std::size_t n_actions() const { return n_actions_; }

 private:
  std::size_t n_actions_ = 0;
  std::vector<double> r_;
};

/// Value of the bootstrap target at trajectory index k: zero past an
/// absorbing end, V(obs_k) otherwise.
double bootstrap_value(const Trajectory& traj, std::size_t k, const ValueTable& values);

/// n-step targets sum_{t=s}^{e-1} g^{t-s} R_t + g^{e-s} B_e with e the window end.
std::vector<double> n_step_targets(const Trajectory& traj, const ValueTable& values, const AgentConfig& cfg);

// --- State-conditioned HCA -------------------------------------------------

/// Cross-entropy training of h_beta on every pair (X_s, X_j), j = s..window end.
void train_state_hindsight(const Trajectory& traj, StateHindsightTable& hindsight, const AgentConfig& cfg);

/// Sequential square-loss steps of V(X_s) toward the n-step target and of
/// r_hat(X_s, A_s) toward R_s.
void train_value_and_reward(const Trajectory& traj, ValueTable& values, RewardModel& reward_model,
                            const AgentConfig& cfg);

/// Hindsight-weighted action values Q^x(X_s, a) for every action a:
///   r_hat(X_s, a) + sum_{t=s+1}^{e-1} g^{t-s} h(a|X_s,X_t)/pi(a|X_s) R_t
///                 + g^{e-s} h(a|X_s,X_e)/pi(a|X_s) B_e.
std::vector<double> state_hca_action_values(const Trajectory& traj, std::size_t s, const SoftmaxPolicy& policy,
                                            const StateHindsightTable& hindsight, const ValueTable& values,
                                            const RewardModel& reward_model, const AgentConfig& cfg);

/// All-actions policy step at every visited state with coefficients g^s Q^x(X_s, .).
void state_hca_policy_update(const Trajectory& traj, SoftmaxPolicy& policy, const StateHindsightTable& hindsight,
                             const ValueTable& values, const RewardModel& reward_model, const AgentConfig& cfg);

/// Hindsight, then V and r_hat, then the policy.
void state_hca_episode_update(const Trajectory& traj, SoftmaxPolicy& policy, StateHindsightTable& hindsight,
                              ValueTable& values, RewardModel& reward_model, const AgentConfig& cfg);

// --- Return-conditioned HCA ------------------------------------------------

/// (1 - pi(a|x) / h_z(a|x,z)) z.
double return_hca_advantage(const SoftmaxPolicy& policy, const ReturnHindsightTable& hindsight, ObsId x,
                            ActionId a, double z);

/// The return-proportional baseline pi(a|x) / h_z(a|x,z) * z.
double return_hca_baseline(const SoftmaxPolicy& policy, const ReturnHindsightTable& hindsight, ObsId x,
                           ActionId a, double z);

/// Per step: advantage from the current h_z, then the h_z step on
/// (X_s, Z_s, A_s), then a score-function step on A_s. No value function.
void return_hca_episode_update(const Trajectory& traj, SoftmaxPolicy& policy, ReturnHindsightTable& hindsight,
                               const AgentConfig& cfg);

// --- n-step advantage actor-critic -----------------------------------------

/// Advantages G_s - V(X_s) from the pre-episode critic, then score-function
/// policy steps and V regression toward G_s.
void baseline_pg_episode_update(const Trajectory& traj, SoftmaxPolicy& policy, ValueTable& values,
                                const AgentConfig& cfg);

// --- Single-trajectory gradient estimates ---------------------------------
// Flat [obs * n_actions + b] estimates of grad V(X_0) with respect to the
// policy logits. Their means over trajectories are the exact gradient when
// the hindsight tables are exact.

/// sum_s g^s sum_a grad pi(a|X_s) Q^x(X_s, a).
std::vector<double> state_hca_gradient(const Trajectory& traj, const SoftmaxPolicy& policy,
                                       const StateHindsightTable& hindsight, const ValueTable& values,
                                       const RewardModel& reward_model, const AgentConfig& cfg);

/// sum_s g^s grad log pi(A_s|X_s) A^z(X_s, A_s).
std::vector<double> return_hca_gradient(const Trajectory& traj, const SoftmaxPolicy& policy,
                                        const ReturnHindsightTable& hindsight, const AgentConfig& cfg);

/// sum_s g^s grad log pi(A_s|X_s) (Z_s - b_s) with the return-proportional baseline.
std::vector<double> return_baseline_gradient(const Trajectory& traj, const SoftmaxPolicy& policy,
                                             const ReturnHindsightTable& hindsight, const AgentConfig& cfg);

/// A learner bound to one environment: all tables plus its configuration.
class Agent {
 public:
  Agent(const TabularMDP& mdp, AgentConfig cfg);

  void update(const Trajectory& traj);

  const AgentConfig& config() const { return cfg_; }

  SoftmaxPolicy policy;
  ValueTable values;
  RewardModel reward_model;
  StateHindsightTable state_hindsight;
  ReturnHindsightTable return_hindsight;

 private:
  AgentConfig cfg_;
};

}  // namespace hca
