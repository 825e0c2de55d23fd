#include "hca/mdp.hpp"

#include <cmath>
#include <string>

#include "hca/errors.hpp"

namespace hca {

namespace {

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overload(Fs...) -> Overload<Fs...>;

constexpr double kProbTol = 1e-12;

std::string at(StateId x, ActionId a) {
  return "(state " + std::to_string(x) + ", action " + std::to_string(a) + ")";
}

}  // namespace

double RewardSpec::mean() const {
  return std::visit(Overload{
                        [](const DeterministicReward& r) { return r.value; },
                        [](const GaussianReward& r) { return r.mean; },
                        [](const FiniteReward& r) {
                          double m = 0.0;
                          for (std::size_t i = 0; i < r.values.size(); ++i) m += r.values[i] * r.probs[i];
                          return m;
                        },
                    },
                    kind_);
}

double RewardSpec::sample(Engine& engine) const {
  return std::visit(Overload{
                        [](const DeterministicReward& r) { return r.value; },
                        [&](const GaussianReward& r) {
                          if (r.stddev == 0.0) return r.mean;
                          return std::normal_distribution<double>(r.mean, r.stddev)(engine);
                        },
                        [&](const FiniteReward& r) {
                          const double u = uniform01(engine);
                          double acc = 0.0;
                          for (std::size_t i = 0; i + 1 < r.values.size(); ++i) {
                            acc += r.probs[i];
                            if (u < acc) return r.values[i];
                          }
                          return r.values.back();
                        },
                    },
                    kind_);
}

bool RewardSpec::has_finite_support() const {
  if (const auto* g = std::get_if<GaussianReward>(&kind_)) return g->stddev == 0.0;
  return true;
}

std::vector<std::pair<double, double>> RewardSpec::atoms() const {
  return std::visit(Overload{
                        [](const DeterministicReward& r) {
                          return std::vector<std::pair<double, double>>{{r.value, 1.0}};
                        },
                        [](const GaussianReward& r) {
                          if (r.stddev != 0.0) {
                            throw InadmissibleError("reward atoms: Gaussian reward has infinite support");
                          }
                          return std::vector<std::pair<double, double>>{{r.mean, 1.0}};
                        },
                        [](const FiniteReward& r) {
                          std::vector<std::pair<double, double>> out;
                          for (std::size_t i = 0; i < r.values.size(); ++i) {
                            if (r.probs[i] > 0.0) out.emplace_back(r.values[i], r.probs[i]);
                          }
                          return out;
                        },
                    },
                    kind_);
}

void RewardSpec::validate() const {
  std::visit(Overload{
                 [](const DeterministicReward& r) {
                   if (!std::isfinite(r.value)) throw ConfigError("reward: non-finite value");
                 },
                 [](const GaussianReward& r) {
                   if (!std::isfinite(r.mean) || !(r.stddev >= 0.0) || !std::isfinite(r.stddev)) {
                     throw ConfigError("reward: Gaussian needs finite mean and std >= 0");
                   }
                 },
                 [](const FiniteReward& r) {
                   if (r.values.empty() || r.values.size() != r.probs.size()) {
                     throw ConfigError("reward: finite reward needs matching non-empty values/probs");
                   }
                   double total = 0.0;
                   for (double p : r.probs) {
                     if (!(p >= 0.0)) throw ConfigError("reward: negative probability");
                     total += p;
                   }
                   if (std::abs(total - 1.0) > kProbTol) throw ConfigError("reward: probabilities do not sum to 1");
                 },
             },
             kind_);
}

TabularMDP::TabularMDP(std::size_t states, std::size_t actions)
    : n_states(states),
      n_actions(actions),
      n_observations(states),
      transition(states * actions * states, 0.0),
      reward(states * actions, RewardSpec::deterministic(0.0)),
      observation_of(states),
      absorbing(states, false) {
  for (StateId x = 0; x < states; ++x) observation_of[x] = x;
}

void TabularMDP::make_absorbing(StateId x) {
  absorbing.at(x) = true;
  for (ActionId a = 0; a < n_actions; ++a) {
    for (StateId y = 0; y < n_states; ++y) p(x, a, y) = (y == x) ? 1.0 : 0.0;
    reward_spec(x, a) = RewardSpec::deterministic(0.0);
  }
}

void TabularMDP::validate() const {
  if (n_states == 0 || n_actions == 0) throw ConfigError("mdp: empty state or action set");
  if (transition.size() != n_states * n_actions * n_states) throw ConfigError("mdp: transition tensor has wrong size");
  if (reward.size() != n_states * n_actions) throw ConfigError("mdp: reward table has wrong size");
  if (observation_of.size() != n_states) throw ConfigError("mdp: observation map is not total over states");
  if (absorbing.size() != n_states) throw ConfigError("mdp: absorbing flags have wrong size");
  if (initial_state >= n_states) throw ConfigError("mdp: initial state out of range");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("mdp: discount outside [0, 1]");
  if (horizon == 0) throw ConfigError("mdp: horizon must be positive");
  for (StateId x = 0; x < n_states; ++x) {
    if (observation_of[x] >= n_observations) {
      throw ConfigError("mdp: state " + std::to_string(x) + " maps to an out-of-range observation");
    }
    for (ActionId a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (StateId y = 0; y < n_states; ++y) {
        const double q = p(x, a, y);
        if (!(q >= 0.0)) throw ConfigError("mdp: negative transition probability at " + at(x, a));
        total += q;
      }
      if (std::abs(total - 1.0) > kProbTol) throw ConfigError("mdp: transition row does not sum to 1 at " + at(x, a));
      reward_spec(x, a).validate();
      if (absorbing[x]) {
        if (p(x, a, x) != 1.0) throw ConfigError("mdp: absorbing state without self-loop at " + at(x, a));
        const auto& r = reward_spec(x, a);
        if (!r.has_finite_support() || r.atoms().size() != 1 || r.mean() != 0.0) {
          throw ConfigError("mdp: absorbing state with nonzero reward at " + at(x, a));
        }
      }
    }
  }
}

double Trajectory::undiscounted_return() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

Trajectory sample_trajectory(const TabularMDP& mdp, const SoftmaxPolicy& policy, RunStreams& rng) {
  if (policy.n_observations() != mdp.n_observations || policy.n_actions() != mdp.n_actions) {
    throw ConfigError("sample_trajectory: policy is " + std::to_string(policy.n_observations()) + "x" +
                      std::to_string(policy.n_actions()) + " but the mdp has " +
                      std::to_string(mdp.n_observations) + " observations and " +
                      std::to_string(mdp.n_actions) + " actions");
  }
  Trajectory traj;
  traj.seed = rng.seed;
  traj.steps.reserve(mdp.horizon);
  StateId x = mdp.initial_state;
  while (!mdp.absorbing[x] && traj.steps.size() < mdp.horizon) {
    const ObsId o = mdp.observation_of[x];
    const ActionId a = policy.sample(o, rng.policy);
    const double r = mdp.reward_spec(x, a).sample(rng.env);
    traj.steps.push_back({o, x, a, r});

    const auto next = mdp.row(x, a);
    const double u = uniform01(rng.env);
    // Rounding can leave u above the accumulated mass; fall back to the last
    // state with positive probability.
    StateId y = mdp.n_states - 1;
    while (y > 0 && next[y] == 0.0) --y;
    double acc = 0.0;
    for (StateId c = 0; c < mdp.n_states; ++c) {
      acc += next[c];
      if (u < acc) {
        y = c;
        break;
      }
    }
    x = y;
  }
  traj.final_state = x;
  traj.final_obs = mdp.observation_of[x];
  traj.terminated = mdp.absorbing[x];
  return traj;
}

double discounted_return(const Trajectory& traj, std::size_t start, double gamma) {
  if (start >= traj.size()) {
    throw std::out_of_range("discounted_return: start " + std::to_string(start) + " outside trajectory of length " +
                            std::to_string(traj.size()));
  }
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t t = start; t < traj.size(); ++t) {
    total += weight * traj.steps[t].reward;
    weight *= gamma;
  }
  return total;
}

std::vector<double> discounted_returns(const Trajectory& traj, double gamma) {
  std::vector<double> z(traj.size());
  double next = 0.0;
  for (std::size_t s = traj.size(); s-- > 0;) {
    next = traj.steps[s].reward + gamma * next;
    z[s] = next;
  }
  return z;
}

}  // namespace hca
