#include <algorithm>
#include <array>
#include <numeric>

#include "hca/identities.hpp"
#include "hca/rng.hpp"

namespace hca {

namespace {

std::size_t uniform_int(Engine& eng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform01(eng) * static_cast<double>(hi - lo + 1));
}

/// Strictly positive weights normalized to sum to one.
std::vector<double> positive_simplex(Engine& eng, std::size_t n) {
  std::vector<double> w(n);
  for (double& v : w) v = 0.2 + uniform01(eng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

FamilyMember random_family_member(std::uint64_t family_seed, std::size_t index, double gamma) {
  Engine eng(derive_seed(family_seed, index));
  constexpr std::array<double, 6> kRewardGrid{-1.0, -0.5, 0.0, 0.5, 1.0, 2.0};

  const std::size_t n_states = uniform_int(eng, 3, 6);
  const std::size_t n_actions = uniform_int(eng, 2, 3);
  const std::size_t n_transient = n_states - 1;
  const StateId absorbing = n_states - 1;

  // State 0 alone in the first layer, the rest split into nonempty layers.
  const std::size_t n_layers = uniform_int(eng, 1, n_transient);
  std::vector<std::size_t> layer_of(n_transient, 0);
  std::vector<std::vector<StateId>> layers(n_layers);
  layers[0].push_back(0);
  for (StateId x = 1; x < n_transient; ++x) {
    const std::size_t forced = x < n_layers ? x : 0;
    std::size_t l = forced;
    if (forced == 0 && n_layers > 1) l = uniform_int(eng, 1, n_layers - 1);
    layer_of[x] = l;
    layers[l].push_back(x);
  }

  TabularMDP mdp(n_states, n_actions);
  mdp.discount = gamma;
  mdp.horizon = n_layers;
  mdp.initial_state = 0;
  mdp.make_absorbing(absorbing);

  for (StateId x = 0; x < n_transient; ++x) {
    const std::size_t l = layer_of[x];
    std::vector<StateId> successors;
    if (l + 1 == n_layers) {
      successors.push_back(absorbing);
    } else {
      const auto& next = layers[l + 1];
      // At most two successors keeps trajectory enumeration small.
      const std::size_t first = uniform_int(eng, 0, next.size() - 1);
      successors.push_back(next[first]);
      const double u = uniform01(eng);
      if (u < 0.35) {
        successors.push_back(absorbing);
      } else if (u < 0.7 && next.size() > 1) {
        successors.push_back(next[(first + 1 + uniform_int(eng, 0, next.size() - 2)) % next.size()]);
      }
    }

    std::vector<double> atoms{kRewardGrid[uniform_int(eng, 0, kRewardGrid.size() - 1)]};
    if (uniform01(eng) < 0.6) {
      double second = atoms[0];
      while (second == atoms[0]) second = kRewardGrid[uniform_int(eng, 0, kRewardGrid.size() - 1)];
      atoms.push_back(second);
    }

    for (ActionId a = 0; a < n_actions; ++a) {
      const auto w = positive_simplex(eng, successors.size());
      for (std::size_t i = 0; i < successors.size(); ++i) mdp.p(x, a, successors[i]) = w[i];
      mdp.reward_spec(x, a) = RewardSpec::finite(atoms, positive_simplex(eng, atoms.size()));
    }
  }
  mdp.validate();

  SoftmaxPolicy policy(mdp.n_observations, n_actions);
  std::vector<double> row(n_actions);
  for (ObsId o = 0; o < mdp.n_observations; ++o) {
    for (double& v : row) v = 3.0 * uniform01(eng) - 1.5;
    policy.set_logits(o, row);
  }
  return {std::move(mdp), std::move(policy)};
}

}  // namespace hca
