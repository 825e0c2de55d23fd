#include "hca/agents.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hca/errors.hpp"

namespace hca {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::StateHCA:
      return "state_hca";
    case Algorithm::ReturnHCA:
      return "return_hca";
    case Algorithm::BaselinePG:
      return "baseline_pg";
    case Algorithm::MonteCarloPG:
      return "mc_pg";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::StateHCA, Algorithm::ReturnHCA, Algorithm::BaselinePG, Algorithm::MonteCarloPG}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected state_hca, return_hca, baseline_pg or mc_pg)");
}

void AgentConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (critic_lr && (!(*critic_lr > 0.0) || !std::isfinite(*critic_lr)))
    throw ConfigError("critic_lr must be positive");
  if (!(hindsight_lr > 0.0) || !std::isfinite(hindsight_lr)) throw ConfigError("hindsight_lr must be positive");
  if (n_step && *n_step == 0) throw ConfigError("n_step must be at least 1");
  if (n_bins == 0) throw ConfigError("n_bins must be at least 1");
  if (!(return_lo < return_hi)) throw ConfigError("return_lo must be below return_hi");
  if (!(h_floor > 0.0 && h_floor < 1.0)) throw ConfigError("h_floor must lie in (0, 1)");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
}

std::size_t AgentConfig::window_end(std::size_t s, std::size_t length) const {
  if (algorithm == Algorithm::MonteCarloPG || !n_step) return length;
  return std::min(s + *n_step, length);
}

namespace {

void check_dims(const Trajectory& traj, std::size_t n_observations, std::size_t n_actions) {
  for (const auto& st : traj.steps) {
    if (st.obs >= n_observations || st.action >= n_actions)
      throw ConfigError("trajectory step outside the table dimensions");
  }
  if (traj.final_obs >= n_observations) throw ConfigError("final observation outside the table dimensions");
}

}  // namespace

double bootstrap_value(const Trajectory& traj, std::size_t k, const ValueTable& values) {
  if (k > traj.size()) throw std::out_of_range("bootstrap index past the end of the trajectory");
  if (k == traj.size() && traj.terminated) return 0.0;
  return values[traj.obs_at(k)];
}

std::vector<double> n_step_targets(const Trajectory& traj, const ValueTable& values, const AgentConfig& cfg) {
  const std::size_t length = traj.size();
  std::vector<double> targets(length, 0.0);
  for (std::size_t s = 0; s < length; ++s) {
    const std::size_t e = cfg.window_end(s, length);
    double g = 0.0;
    double discount = 1.0;
    for (std::size_t t = s; t < e; ++t) {
      g += discount * traj.steps[t].reward;
      discount *= cfg.gamma;
    }
    targets[s] = g + discount * bootstrap_value(traj, e, values);
  }
  return targets;
}

void train_state_hindsight(const Trajectory& traj, StateHindsightTable& hindsight, const AgentConfig& cfg) {
  check_dims(traj, hindsight.n_observations(), hindsight.n_actions());
  const std::size_t length = traj.size();
  for (std::size_t s = 0; s < length; ++s) {
    const std::size_t e = cfg.window_end(s, length);
    for (std::size_t j = s; j <= e; ++j) {
      hindsight.update(traj.steps[s].obs, traj.obs_at(j), traj.steps[s].action, cfg.hindsight_lr);
    }
  }
}

void train_value_and_reward(const Trajectory& traj, ValueTable& values, RewardModel& reward_model,
                            const AgentConfig& cfg) {
  check_dims(traj, values.size(), reward_model.n_actions());
  const std::size_t length = traj.size();
  const double lr = cfg.value_lr();
  for (std::size_t s = 0; s < length; ++s) {
    const std::size_t e = cfg.window_end(s, length);
    double target = 0.0;
    double discount = 1.0;
    for (std::size_t t = s; t < e; ++t) {
      target += discount * traj.steps[t].reward;
      discount *= cfg.gamma;
    }
    target += discount * bootstrap_value(traj, e, values);

    const auto& st = traj.steps[s];
    values[st.obs] += lr * (target - values[st.obs]);
    reward_model(st.obs, st.action) += lr * (st.reward - reward_model(st.obs, st.action));
  }
}

std::vector<double> state_hca_action_values(const Trajectory& traj, std::size_t s, const SoftmaxPolicy& policy,
                                            const StateHindsightTable& hindsight, const ValueTable& values,
                                            const RewardModel& reward_model, const AgentConfig& cfg) {
  if (s >= traj.size()) throw std::out_of_range("step index past the end of the trajectory");
  const std::size_t length = traj.size();
  const std::size_t e = cfg.window_end(s, length);
  const ObsId x = traj.steps[s].obs;
  const std::size_t n_actions = policy.n_actions();
  const auto pi = policy.probs(x);

  std::vector<double> q(n_actions);
  for (ActionId a = 0; a < n_actions; ++a) q[a] = reward_model(x, a);

  double discount = cfg.gamma;
  for (std::size_t t = s + 1; t < e; ++t) {
    const auto h = hindsight.probs(x, traj.steps[t].obs);
    for (ActionId a = 0; a < n_actions; ++a) q[a] += discount * h[a] / pi[a] * traj.steps[t].reward;
    discount *= cfg.gamma;
  }
  const double boot = bootstrap_value(traj, e, values);
  if (boot != 0.0) {
    const auto h = hindsight.probs(x, traj.obs_at(e));
    for (ActionId a = 0; a < n_actions; ++a) q[a] += discount * h[a] / pi[a] * boot;
  }
  return q;
}

void state_hca_policy_update(const Trajectory& traj, SoftmaxPolicy& policy, const StateHindsightTable& hindsight,
                             const ValueTable& values, const RewardModel& reward_model, const AgentConfig& cfg) {
  check_dims(traj, policy.n_observations(), policy.n_actions());
  double discount = 1.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    auto q = state_hca_action_values(traj, s, policy, hindsight, values, reward_model, cfg);
    for (double& c : q) c *= discount;
    policy.grad_step(traj.steps[s].obs, q, cfg.lr);
    discount *= cfg.gamma;
  }
}

void state_hca_episode_update(const Trajectory& traj, SoftmaxPolicy& policy, StateHindsightTable& hindsight,
                              ValueTable& values, RewardModel& reward_model, const AgentConfig& cfg) {
  train_state_hindsight(traj, hindsight, cfg);
  train_value_and_reward(traj, values, reward_model, cfg);
  state_hca_policy_update(traj, policy, hindsight, values, reward_model, cfg);
}

double return_hca_advantage(const SoftmaxPolicy& policy, const ReturnHindsightTable& hindsight, ObsId x,
                            ActionId a, double z) {
  return (1.0 - hindsight.ratio(policy, a, x, z)) * z;
}

double return_hca_baseline(const SoftmaxPolicy& policy, const ReturnHindsightTable& hindsight, ObsId x,
                           ActionId a, double z) {
  return hindsight.ratio(policy, a, x, z) * z;
}

void return_hca_episode_update(const Trajectory& traj, SoftmaxPolicy& policy, ReturnHindsightTable& hindsight,
                               const AgentConfig& cfg) {
  check_dims(traj, policy.n_observations(), policy.n_actions());
  const auto returns = discounted_returns(traj, cfg.gamma);
  double discount = 1.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto& st = traj.steps[s];
    const double advantage = return_hca_advantage(policy, hindsight, st.obs, st.action, returns[s]);
    hindsight.update(st.obs, returns[s], st.action, cfg.hindsight_lr);
    policy.log_grad_step(st.obs, st.action, discount * advantage, cfg.lr);
    discount *= cfg.gamma;
  }
}

void baseline_pg_episode_update(const Trajectory& traj, SoftmaxPolicy& policy, ValueTable& values,
                                const AgentConfig& cfg) {
  check_dims(traj, policy.n_observations(), policy.n_actions());
  const ValueTable snapshot = values;
  const auto targets = n_step_targets(traj, snapshot, cfg);
  const double value_lr = cfg.value_lr();
  double discount = 1.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto& st = traj.steps[s];
    const double advantage = targets[s] - snapshot[st.obs];
    policy.log_grad_step(st.obs, st.action, discount * advantage, cfg.lr);
    values[st.obs] += value_lr * (targets[s] - values[st.obs]);
    discount *= cfg.gamma;
  }
}

std::vector<double> state_hca_gradient(const Trajectory& traj, const SoftmaxPolicy& policy,
                                       const StateHindsightTable& hindsight, const ValueTable& values,
                                       const RewardModel& reward_model, const AgentConfig& cfg) {
  check_dims(traj, policy.n_observations(), policy.n_actions());
  const std::size_t A = policy.n_actions();
  std::vector<double> grad(policy.n_observations() * A, 0.0);
  double discount = 1.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const ObsId x = traj.steps[s].obs;
    const auto q = state_hca_action_values(traj, s, policy, hindsight, values, reward_model, cfg);
    const auto pi = policy.probs(x);
    double mean = 0.0;
    for (ActionId a = 0; a < A; ++a) mean += pi[a] * q[a];
    for (ActionId b = 0; b < A; ++b) grad[x * A + b] += discount * pi[b] * (q[b] - mean);
    discount *= cfg.gamma;
  }
  return grad;
}

namespace {

template <typename Coeff>
std::vector<double> score_function_gradient(const Trajectory& traj, const SoftmaxPolicy& policy, double gamma,
                                            Coeff coeff) {
  check_dims(traj, policy.n_observations(), policy.n_actions());
  const std::size_t A = policy.n_actions();
  std::vector<double> grad(policy.n_observations() * A, 0.0);
  const auto returns = discounted_returns(traj, gamma);
  double discount = 1.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto& st = traj.steps[s];
    const auto pi = policy.probs(st.obs);
    const double c = discount * coeff(st, returns[s]);
    for (ActionId b = 0; b < A; ++b) grad[st.obs * A + b] += c * ((b == st.action ? 1.0 : 0.0) - pi[b]);
    discount *= gamma;
  }
  return grad;
}

}  // namespace

std::vector<double> return_hca_gradient(const Trajectory& traj, const SoftmaxPolicy& policy,
                                        const ReturnHindsightTable& hindsight, const AgentConfig& cfg) {
  return score_function_gradient(traj, policy, cfg.gamma, [&](const Step& st, double z) {
    return return_hca_advantage(policy, hindsight, st.obs, st.action, z);
  });
}

std::vector<double> return_baseline_gradient(const Trajectory& traj, const SoftmaxPolicy& policy,
                                             const ReturnHindsightTable& hindsight, const AgentConfig& cfg) {
  return score_function_gradient(traj, policy, cfg.gamma, [&](const Step& st, double z) {
    return z - return_hca_baseline(policy, hindsight, st.obs, st.action, z);
  });
}

Agent::Agent(const TabularMDP& mdp, AgentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t n_obs = mdp.n_observations;
  const std::size_t n_actions = mdp.n_actions;
  policy = SoftmaxPolicy(n_obs, n_actions);
  values = ValueTable(n_obs);
  reward_model = RewardModel(n_obs, n_actions);
  state_hindsight = StateHindsightTable(n_obs, n_actions);
  return_hindsight =
      ReturnHindsightTable(n_obs, n_actions, ReturnBinner(cfg_.n_bins, cfg_.return_lo, cfg_.return_hi), cfg_.h_floor);
}

void Agent::update(const Trajectory& traj) {
  switch (cfg_.algorithm) {
    case Algorithm::StateHCA:
      state_hca_episode_update(traj, policy, state_hindsight, values, reward_model, cfg_);
      break;
    case Algorithm::ReturnHCA:
      return_hca_episode_update(traj, policy, return_hindsight, cfg_);
      break;
    case Algorithm::BaselinePG:
    case Algorithm::MonteCarloPG:
      baseline_pg_episode_update(traj, policy, values, cfg_);
      break;
  }
}

}  // namespace hca
