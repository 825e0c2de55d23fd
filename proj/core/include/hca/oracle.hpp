#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hca/hindsight.hpp"
#include "hca/mdp.hpp"
#include "hca/policy.hpp"

namespace hca {

/// pi(a | observation_of[x]) laid out as [x * n_actions + a].
std::vector<double> state_policy(const TabularMDP& mdp, const SoftmaxPolicy& policy);

/// Longest number of steps from each state to absorption. Throws
/// InadmissibleError when non-absorbing states form a cycle or when the
/// initial state cannot always terminate within the horizon.
std::vector<std::size_t> termination_depths(const TabularMDP& mdp);

/// Exact values of a policy on a terminating tabular MDP.
struct OracleSolution {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t n_observations = 0;
  std::vector<double> V;           // [x]
  std::vector<double> Q;           // [x * n_actions + a]
  std::vector<double> A;           // [x * n_actions + a]
  std::vector<double> occupancy;   // [source * n_states + y], discounted visits of non-absorbing y
  std::vector<double> gradient;    // [obs * n_actions + b], d V(initial_state) / d logit

  double q(StateId x, ActionId a) const { return Q[x * n_actions + a]; }
  double adv(StateId x, ActionId a) const { return A[x * n_actions + a]; }
  double d(StateId source, StateId y) const { return occupancy[source * n_states + y]; }
  double grad(ObsId o, ActionId b) const { return gradient[o * n_actions + b]; }
};

/// Backward induction on expected rewards. The gradient is
/// sum_x d(x0, x) sum_a Q(x, a) grad pi(a | x).
OracleSolution solve_values(const TabularMDP& mdp, const SoftmaxPolicy& policy);

/// P(X_k = y | X_0 = x, A_0 = a) and P(X_k = y | X_0 = x) for k = 0..depth.
/// Beyond depth every trajectory has been absorbed, so P_k = P_depth.
struct LagDistributions {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t depth = 0;
  std::vector<std::vector<double>> given_action;  // [k][(x * n_actions + a) * n_states + y]
  std::vector<std::vector<double>> marginal;      // [k][x * n_states + y]

  double p(std::size_t k, StateId x, ActionId a, StateId y) const;
  double p(std::size_t k, StateId x, StateId y) const;
};

LagDistributions forward_distributions(const TabularMDP& mdp, const SoftmaxPolicy& policy);

/// h(a | x, y) over a set of sources and targets; NaN marks rows whose
/// conditioning event has probability zero.
class HindsightMatrix {
 public:
  HindsightMatrix() = default;
  HindsightMatrix(std::size_t n_sources, std::size_t n_targets, std::size_t n_actions);

  std::size_t n_sources() const { return n_sources_; }
  std::size_t n_targets() const { return n_targets_; }
  std::size_t n_actions() const { return n_actions_; }

  bool defined(std::size_t x, std::size_t y) const;
  double operator()(std::size_t x, std::size_t y, ActionId a) const;
  double& at(std::size_t x, std::size_t y, ActionId a);

 private:
  std::size_t n_sources_ = 0;
  std::size_t n_targets_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> h_;
};

/// Lag weights rho(1..K-1) = beta^(k-1) (1 - beta) and rho(K) = beta^(K-1),
/// indexed 0..K with weight 0 at lag 0. With K at or beyond the absorption
/// depth this is the geometric rho; with K = T it is rho_T.
std::vector<double> truncated_geometric_weights(double beta, std::size_t K);

/// h_k(a | x, y) = pi(a|x) P_k(y|x,a) / P_k(y|x).
HindsightMatrix hindsight_at_lag(const LagDistributions& lags, const std::vector<double>& pi, std::size_t k);

/// Hindsight under a random lag k ~ weights:
///   pi(a|x) sum_k w_k P_k(y|x,a) / sum_k w_k P_k(y|x).
HindsightMatrix mixed_hindsight(const LagDistributions& lags, const std::vector<double>& pi,
                                const std::vector<double>& weights);

struct ExactHindsight {
  LagDistributions lags;
  std::vector<HindsightMatrix> h_k;        // k = 0..k_max
  std::optional<HindsightMatrix> h_beta;   // present when beta < 1
  std::optional<HindsightMatrix> h_beta_T; // present when T >= 1
};

/// Requires a strictly positive policy and a terminating MDP.
ExactHindsight exact_state_hindsight(const TabularMDP& mdp, const SoftmaxPolicy& policy, std::size_t k_max,
                                     double beta, std::size_t T);

/// Observation-level hindsight h(a | o_x, o_y) under lag weights. Source
/// states that share an observation are pooled by their discounted
/// occupancy from the initial state; targets are pooled by observation.
HindsightMatrix observation_hindsight(const TabularMDP& mdp, const SoftmaxPolicy& policy,
                                      const std::vector<double>& weights);

/// Finite distribution as (value, probability) atoms sorted by value.
using Atoms = std::vector<std::pair<double, double>>;

/// Grid key used to merge return atoms: round(z * 1e9).
std::int64_t return_key(double z);

/// Exact distribution of the discounted return from every state and
/// state-action pair.
struct ReturnDistribution {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<Atoms> by_state;   // [x]
  std::vector<Atoms> by_action;  // [x * n_actions + a]
  std::vector<double> pi;        // [x * n_actions + a]

  /// P(Z = z | x) and P(Z = z | x, a) with z matched on the 1e-9 grid.
  double prob(StateId x, double z) const;
  double prob(StateId x, ActionId a, double z) const;
  /// h_z(a | x, z) = pi(a|x) P(z|x,a) / P(z|x); NaN when P(z|x) = 0.
  double h_z(StateId x, ActionId a, double z) const;
};

/// Enumerates the trajectory tree with memoization over states. Rejects
/// Gaussian rewards with nonzero spread, more than 8 states, or a horizon
/// beyond 12.
ReturnDistribution exact_return_distribution(const TabularMDP& mdp, const SoftmaxPolicy& policy);

/// Writes log h into the learned table (log 0 becomes -50). Undefined rows
/// fall back to the policy's logits.
void load_state_hindsight(StateHindsightTable& table, const HindsightMatrix& h, const SoftmaxPolicy& policy);

/// Writes binned exact h_z into the learned table: atoms falling into one bin
/// are pooled. Empty bins fall back to the policy's logits. Requires a fully
/// observed MDP.
void load_return_hindsight(ReturnHindsightTable& table, const ReturnDistribution& dist, const TabularMDP& mdp,
                           const SoftmaxPolicy& policy);

}  // namespace hca
