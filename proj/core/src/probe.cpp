#include "hca/probe.hpp"

#include <string>

#include "hca/errors.hpp"
#include "hca/oracle.hpp"

namespace hca {

std::string_view to_string(ProbeMethod method) {
  switch (method) {
    case ProbeMethod::Oracle:
      return "oracle";
    case ProbeMethod::StateHCA:
      return "state_hca";
    case ProbeMethod::ReturnHCA:
      return "return_hca";
    case ProbeMethod::BaselinePG:
      return "baseline_pg";
    case ProbeMethod::MonteCarloPG:
      return "mc_pg";
  }
  return "unknown";
}

ProbeMethod parse_probe_method(std::string_view name) {
  for (auto m : {ProbeMethod::Oracle, ProbeMethod::StateHCA, ProbeMethod::ReturnHCA, ProbeMethod::BaselinePG,
                 ProbeMethod::MonteCarloPG})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown probe method '" + std::string(name) + "'");
}

std::vector<double> estimate_advantage_probe(const TabularMDP& mdp, const SoftmaxPolicy& policy,
                                             ProbeMethod method, std::size_t n_rollouts, const AgentConfig& cfg,
                                             RunStreams& rng) {
  const std::size_t A = mdp.n_actions;
  const ObsId x0 = mdp.observation_of[mdp.initial_state];
  if (method == ProbeMethod::Oracle) {
    const auto sol = solve_values(mdp, policy);
    std::vector<double> adv(A);
    for (ActionId a = 0; a < A; ++a) adv[a] = sol.adv(mdp.initial_state, a);
    return adv;
  }

  AgentConfig agent_cfg = cfg;
  switch (method) {
    case ProbeMethod::StateHCA:
      agent_cfg.algorithm = Algorithm::StateHCA;
      break;
    case ProbeMethod::ReturnHCA:
      agent_cfg.algorithm = Algorithm::ReturnHCA;
      break;
    case ProbeMethod::BaselinePG:
      agent_cfg.algorithm = Algorithm::BaselinePG;
      break;
    default:
      agent_cfg.algorithm = Algorithm::MonteCarloPG;
      break;
  }
  Agent agent(mdp, agent_cfg);
  agent.policy = policy;
  // Fresh tables carry no hindsight information: h = pi.
  agent.state_hindsight.reset_to_policy(policy);
  agent.return_hindsight.reset_to_policy(policy);

  // Train the estimators online, then score every stored rollout with the
  // final estimators.
  std::vector<Trajectory> rollouts;
  rollouts.reserve(n_rollouts);
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    auto traj = sample_trajectory(mdp, agent.policy, rng);
    switch (method) {
      case ProbeMethod::StateHCA:
        train_state_hindsight(traj, agent.state_hindsight, agent_cfg);
        train_value_and_reward(traj, agent.values, agent.reward_model, agent_cfg);
        break;
      case ProbeMethod::ReturnHCA:
        for (std::size_t s = 0; s < traj.size(); ++s)
          agent.return_hindsight.update(traj.steps[s].obs, discounted_return(traj, s, agent_cfg.gamma),
                                        traj.steps[s].action, agent_cfg.hindsight_lr);
        break;
      default: {
        const auto targets = n_step_targets(traj, agent.values, agent_cfg);
        const double lr = agent_cfg.value_lr();
        for (std::size_t s = 0; s < traj.size(); ++s) {
          const ObsId x = traj.steps[s].obs;
          agent.values[x] += lr * (targets[s] - agent.values[x]);
        }
        break;
      }
    }
    rollouts.push_back(std::move(traj));
  }

  std::vector<double> sum(A, 0.0);
  std::vector<std::size_t> count(A, 0);
  const auto pi = agent.policy.probs(x0);
  for (const auto& traj : rollouts) {
    if (traj.size() == 0) continue;
    const ActionId a0 = traj.steps[0].action;
    switch (method) {
      case ProbeMethod::StateHCA: {
        const auto q = state_hca_action_values(traj, 0, agent.policy, agent.state_hindsight, agent.values,
                                               agent.reward_model, agent_cfg);
        double mean = 0.0;
        for (ActionId a = 0; a < A; ++a) mean += pi[a] * q[a];
        for (ActionId a = 0; a < A; ++a) {
          sum[a] += q[a] - mean;
          ++count[a];
        }
        break;
      }
      case ProbeMethod::ReturnHCA:
        sum[a0] += return_hca_advantage(agent.policy, agent.return_hindsight, x0, a0,
                                        discounted_return(traj, 0, agent_cfg.gamma));
        ++count[a0];
        break;
      default:
        sum[a0] += n_step_targets(traj, agent.values, agent_cfg)[0] - agent.values[x0];
        ++count[a0];
        break;
    }
  }
  std::vector<double> est(A, 0.0);
  for (ActionId a = 0; a < A; ++a)
    if (count[a] > 0) est[a] = sum[a] / static_cast<double>(count[a]);
  return est;
}

}  // namespace hca
