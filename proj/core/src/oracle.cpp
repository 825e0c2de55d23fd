#include "hca/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "hca/errors.hpp"

namespace hca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLogZero = -50.0;
constexpr std::size_t kMaxEnumStates = 8;
constexpr std::size_t kMaxEnumHorizon = 12;

void check_policy(const TabularMDP& mdp, const SoftmaxPolicy& policy) {
  if (policy.n_observations() != mdp.n_observations || policy.n_actions() != mdp.n_actions)
    throw ConfigError("policy dimensions do not match the MDP");
}

void require_positive(const std::vector<double>& pi) {
  for (double p : pi) {
    if (!(p > 0.0)) throw InadmissibleError("policy must be strictly positive (pi(a|x) > 0)");
  }
}

std::vector<StateId> by_depth(const std::vector<std::size_t>& depths) {
  std::vector<StateId> order(depths.size());
  std::iota(order.begin(), order.end(), StateId{0});
  std::stable_sort(order.begin(), order.end(), [&](StateId a, StateId b) { return depths[a] < depths[b]; });
  return order;
}

}  // namespace

std::vector<double> state_policy(const TabularMDP& mdp, const SoftmaxPolicy& policy) {
  check_policy(mdp, policy);
  std::vector<double> pi(mdp.n_states * mdp.n_actions);
  for (StateId x = 0; x < mdp.n_states; ++x) {
    const auto row = policy.probs(mdp.observation_of[x]);
    std::copy(row.begin(), row.end(), pi.begin() + static_cast<std::ptrdiff_t>(x * mdp.n_actions));
  }
  return pi;
}

std::vector<std::size_t> termination_depths(const TabularMDP& mdp) {
  mdp.validate();
  const std::size_t S = mdp.n_states;
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  constexpr std::size_t kOnStack = kUnvisited - 1;
  std::vector<std::size_t> depth(S, kUnvisited);

  // Iterative DFS; a back edge to a state still on the stack is a cycle.
  for (StateId root = 0; root < S; ++root) {
    if (depth[root] != kUnvisited) continue;
    std::vector<std::pair<StateId, std::size_t>> stack{{root, 0}};
    depth[root] = kOnStack;
    while (!stack.empty()) {
      auto& [x, next] = stack.back();
      if (mdp.absorbing[x]) {
        depth[x] = 0;
        stack.pop_back();
        continue;
      }
      bool pushed = false;
      while (next < mdp.n_actions * S) {
        const ActionId a = next / S;
        const StateId y = next % S;
        ++next;
        if (mdp.p(x, a, y) <= 0.0) continue;
        if (depth[y] == kOnStack)
          throw InadmissibleError("non-absorbing states form a cycle; the episode need not terminate");
        if (depth[y] == kUnvisited) {
          depth[y] = kOnStack;
          stack.emplace_back(y, 0);
          pushed = true;
          break;
        }
      }
      if (pushed) continue;
      std::size_t d = 0;
      for (ActionId a = 0; a < mdp.n_actions; ++a)
        for (StateId y = 0; y < S; ++y)
          if (mdp.p(x, a, y) > 0.0) d = std::max(d, depth[y] + 1);
      depth[x] = d;
      stack.pop_back();
    }
  }
  if (depth[mdp.initial_state] > mdp.horizon)
    throw InadmissibleError("episodes from the initial state can outlast the horizon (" +
                            std::to_string(depth[mdp.initial_state]) + " > " + std::to_string(mdp.horizon) + ")");
  return depth;
}

OracleSolution solve_values(const TabularMDP& mdp, const SoftmaxPolicy& policy) {
  const auto depths = termination_depths(mdp);
  const auto pi = state_policy(mdp, policy);
  const std::size_t S = mdp.n_states;
  const std::size_t A = mdp.n_actions;
  const double gamma = mdp.discount;

  OracleSolution sol;
  sol.n_states = S;
  sol.n_actions = A;
  sol.n_observations = mdp.n_observations;
  sol.V.assign(S, 0.0);
  sol.Q.assign(S * A, 0.0);
  sol.A.assign(S * A, 0.0);

  for (StateId x : by_depth(depths)) {
    if (mdp.absorbing[x]) continue;
    double v = 0.0;
    for (ActionId a = 0; a < A; ++a) {
      double q = mdp.mean_reward(x, a);
      for (StateId y = 0; y < S; ++y) q += gamma * mdp.p(x, a, y) * sol.V[y];
      sol.Q[x * A + a] = q;
      v += pi[x * A + a] * q;
    }
    sol.V[x] = v;
    for (ActionId a = 0; a < A; ++a) sol.A[x * A + a] = sol.Q[x * A + a] - v;
  }

  // Discounted visits through non-absorbing states. The transient chain is
  // acyclic, so its powers vanish after max depth steps.
  std::vector<double> M(S * S, 0.0);
  for (StateId x = 0; x < S; ++x) {
    if (mdp.absorbing[x]) continue;
    for (ActionId a = 0; a < A; ++a)
      for (StateId y = 0; y < S; ++y)
        if (!mdp.absorbing[y]) M[x * S + y] += pi[x * A + a] * mdp.p(x, a, y);
  }
  const std::size_t max_depth = *std::max_element(depths.begin(), depths.end());
  sol.occupancy.assign(S * S, 0.0);
  for (StateId src = 0; src < S; ++src) {
    if (mdp.absorbing[src]) continue;
    std::vector<double> mass(S, 0.0), next(S);
    mass[src] = 1.0;
    double discount = 1.0;
    for (std::size_t k = 0; k <= max_depth; ++k) {
      for (StateId y = 0; y < S; ++y) sol.occupancy[src * S + y] += discount * mass[y];
      std::fill(next.begin(), next.end(), 0.0);
      for (StateId x = 0; x < S; ++x) {
        if (mass[x] == 0.0) continue;
        for (StateId y = 0; y < S; ++y) next[y] += mass[x] * M[x * S + y];
      }
      mass.swap(next);
      discount *= gamma;
    }
  }

  // d pi(a|x) / d logit_b = pi(a)(1{a=b} - pi(b)), so the a-sum collapses to pi(b) A(x, b).
  sol.gradient.assign(mdp.n_observations * A, 0.0);
  const StateId x0 = mdp.initial_state;
  for (StateId x = 0; x < S; ++x) {
    const double w = sol.d(x0, x);
    if (w == 0.0) continue;
    const ObsId o = mdp.observation_of[x];
    for (ActionId b = 0; b < A; ++b) sol.gradient[o * A + b] += w * pi[x * A + b] * sol.A[x * A + b];
  }
  return sol;
}

double LagDistributions::p(std::size_t k, StateId x, ActionId a, StateId y) const {
  return given_action[std::min(k, depth)][(x * n_actions + a) * n_states + y];
}

double LagDistributions::p(std::size_t k, StateId x, StateId y) const {
  return marginal[std::min(k, depth)][x * n_states + y];
}

LagDistributions forward_distributions(const TabularMDP& mdp, const SoftmaxPolicy& policy) {
  const auto depths = termination_depths(mdp);
  const auto pi = state_policy(mdp, policy);
  const std::size_t S = mdp.n_states;
  const std::size_t A = mdp.n_actions;

  LagDistributions lags;
  lags.n_states = S;
  lags.n_actions = A;
  lags.depth = std::max<std::size_t>(1, *std::max_element(depths.begin(), depths.end()));

  std::vector<double> M(S * S, 0.0);
  for (StateId x = 0; x < S; ++x)
    for (ActionId a = 0; a < A; ++a)
      for (StateId y = 0; y < S; ++y) M[x * S + y] += pi[x * A + a] * mdp.p(x, a, y);

  lags.given_action.assign(lags.depth + 1, std::vector<double>(S * A * S, 0.0));
  lags.marginal.assign(lags.depth + 1, std::vector<double>(S * S, 0.0));
  for (StateId x = 0; x < S; ++x)
    for (ActionId a = 0; a < A; ++a) {
      lags.given_action[0][(x * A + a) * S + x] = 1.0;
      for (StateId y = 0; y < S; ++y) lags.given_action[1][(x * A + a) * S + y] = mdp.p(x, a, y);
    }
  for (std::size_t k = 1; k < lags.depth; ++k) {
    const auto& cur = lags.given_action[k];
    auto& nxt = lags.given_action[k + 1];
    for (std::size_t row = 0; row < S * A; ++row)
      for (StateId z = 0; z < S; ++z) {
        const double m = cur[row * S + z];
        if (m == 0.0) continue;
        for (StateId y = 0; y < S; ++y) nxt[row * S + y] += m * M[z * S + y];
      }
  }
  for (std::size_t k = 0; k <= lags.depth; ++k)
    for (StateId x = 0; x < S; ++x)
      for (ActionId a = 0; a < A; ++a)
        for (StateId y = 0; y < S; ++y)
          lags.marginal[k][x * S + y] += pi[x * A + a] * lags.given_action[k][(x * A + a) * S + y];
  return lags;
}

HindsightMatrix::HindsightMatrix(std::size_t n_sources, std::size_t n_targets, std::size_t n_actions)
    : n_sources_(n_sources), n_targets_(n_targets), n_actions_(n_actions),
      h_(n_sources * n_targets * n_actions, kNaN) {}

bool HindsightMatrix::defined(std::size_t x, std::size_t y) const { return !std::isnan((*this)(x, y, 0)); }

double HindsightMatrix::operator()(std::size_t x, std::size_t y, ActionId a) const {
  if (x >= n_sources_ || y >= n_targets_ || a >= n_actions_) throw std::out_of_range("hindsight index out of range");
  return h_[(x * n_targets_ + y) * n_actions_ + a];
}

double& HindsightMatrix::at(std::size_t x, std::size_t y, ActionId a) {
  if (x >= n_sources_ || y >= n_targets_ || a >= n_actions_) throw std::out_of_range("hindsight index out of range");
  return h_[(x * n_targets_ + y) * n_actions_ + a];
}

std::vector<double> truncated_geometric_weights(double beta, std::size_t K) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  if (K == 0) throw ConfigError("lag truncation must be at least 1");
  std::vector<double> w(K + 1, 0.0);
  for (std::size_t k = 1; k < K; ++k) w[k] = std::pow(beta, static_cast<double>(k - 1)) * (1.0 - beta);
  w[K] = std::pow(beta, static_cast<double>(K - 1));
  return w;
}

HindsightMatrix hindsight_at_lag(const LagDistributions& lags, const std::vector<double>& pi, std::size_t k) {
  std::vector<double> w(k + 1, 0.0);
  w[k] = 1.0;
  return mixed_hindsight(lags, pi, w);
}

HindsightMatrix mixed_hindsight(const LagDistributions& lags, const std::vector<double>& pi,
                                const std::vector<double>& weights) {
  const std::size_t S = lags.n_states;
  const std::size_t A = lags.n_actions;
  if (pi.size() != S * A) throw ConfigError("policy table does not match the lag distributions");
  HindsightMatrix h(S, S, A);
  for (StateId x = 0; x < S; ++x)
    for (StateId y = 0; y < S; ++y) {
      double den = 0.0;
      for (std::size_t k = 0; k < weights.size(); ++k) den += weights[k] * lags.p(k, x, y);
      if (!(den > 0.0)) continue;
      for (ActionId a = 0; a < A; ++a) {
        double num = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) num += weights[k] * lags.p(k, x, a, y);
        h.at(x, y, a) = pi[x * A + a] * num / den;
      }
    }
  return h;
}

ExactHindsight exact_state_hindsight(const TabularMDP& mdp, const SoftmaxPolicy& policy, std::size_t k_max,
                                     double beta, std::size_t T) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  const auto pi = state_policy(mdp, policy);
  require_positive(pi);
  ExactHindsight out;
  out.lags = forward_distributions(mdp, policy);
  for (std::size_t k = 0; k <= k_max; ++k) out.h_k.push_back(hindsight_at_lag(out.lags, pi, k));
  if (beta < 1.0) out.h_beta = mixed_hindsight(out.lags, pi, truncated_geometric_weights(beta, out.lags.depth));
  if (T >= 1) out.h_beta_T = mixed_hindsight(out.lags, pi, truncated_geometric_weights(beta, T));
  return out;
}

HindsightMatrix observation_hindsight(const TabularMDP& mdp, const SoftmaxPolicy& policy,
                                      const std::vector<double>& weights) {
  const auto pi = state_policy(mdp, policy);
  const auto sol = solve_values(mdp, policy);
  const auto lags = forward_distributions(mdp, policy);
  const std::size_t S = mdp.n_states;
  const std::size_t A = mdp.n_actions;
  const std::size_t O = mdp.n_observations;

  std::vector<double> num(O * O * A, 0.0), den(O * O, 0.0);
  for (StateId x = 0; x < S; ++x) {
    const double w = sol.d(mdp.initial_state, x);
    if (w == 0.0) continue;
    const ObsId ox = mdp.observation_of[x];
    for (StateId y = 0; y < S; ++y) {
      const ObsId oy = mdp.observation_of[y];
      for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) continue;
        den[ox * O + oy] += w * weights[k] * lags.p(k, x, y);
        for (ActionId a = 0; a < A; ++a)
          num[(ox * O + oy) * A + a] += w * weights[k] * pi[x * A + a] * lags.p(k, x, a, y);
      }
    }
  }
  HindsightMatrix h(O, O, A);
  for (ObsId ox = 0; ox < O; ++ox)
    for (ObsId oy = 0; oy < O; ++oy) {
      const double d = den[ox * O + oy];
      if (!(d > 0.0)) continue;
      for (ActionId a = 0; a < A; ++a) h.at(ox, oy, a) = num[(ox * O + oy) * A + a] / d;
    }
  return h;
}

std::int64_t return_key(double z) { return std::llround(z * 1e9); }

namespace {

double atom_prob(const Atoms& atoms, double z) {
  const auto key = return_key(z);
  for (const auto& [v, p] : atoms)
    if (return_key(v) == key) return p;
  return 0.0;
}

class AtomAccumulator {
 public:
  void add(double z, double p) {
    auto [it, inserted] = atoms_.try_emplace(return_key(z), z, 0.0);
    it->second.second += p;
  }
  Atoms finish() const {
    Atoms out;
    out.reserve(atoms_.size());
    for (const auto& [key, atom] : atoms_) out.push_back(atom);
    return out;
  }

 private:
  std::map<std::int64_t, std::pair<double, double>> atoms_;
};

}  // namespace

double ReturnDistribution::prob(StateId x, double z) const { return atom_prob(by_state.at(x), z); }

double ReturnDistribution::prob(StateId x, ActionId a, double z) const {
  if (a >= n_actions) throw std::out_of_range("action out of range");
  return atom_prob(by_action.at(x * n_actions + a), z);
}

double ReturnDistribution::h_z(StateId x, ActionId a, double z) const {
  const double pz = prob(x, z);
  if (!(pz > 0.0)) return kNaN;
  return pi.at(x * n_actions + a) * prob(x, a, z) / pz;
}

ReturnDistribution exact_return_distribution(const TabularMDP& mdp, const SoftmaxPolicy& policy) {
  if (mdp.n_states > kMaxEnumStates)
    throw InadmissibleError("return enumeration is capped at " + std::to_string(kMaxEnumStates) + " states");
  if (mdp.horizon > kMaxEnumHorizon)
    throw InadmissibleError("return enumeration is capped at horizon " + std::to_string(kMaxEnumHorizon));
  for (const auto& r : mdp.reward)
    if (!r.has_finite_support())
      throw InadmissibleError("rewards must have finite support; discretize Gaussian rewards first");
  const auto depths = termination_depths(mdp);
  const std::size_t S = mdp.n_states;
  const std::size_t A = mdp.n_actions;

  ReturnDistribution dist;
  dist.n_states = S;
  dist.n_actions = A;
  dist.pi = state_policy(mdp, policy);
  dist.by_state.assign(S, Atoms{});
  dist.by_action.assign(S * A, Atoms{});

  for (StateId x : by_depth(depths)) {
    if (mdp.absorbing[x]) {
      dist.by_state[x] = {{0.0, 1.0}};
      for (ActionId a = 0; a < A; ++a) dist.by_action[x * A + a] = {{0.0, 1.0}};
      continue;
    }
    AtomAccumulator state_acc;
    for (ActionId a = 0; a < A; ++a) {
      AtomAccumulator acc;
      for (const auto& [r, pr] : mdp.reward_spec(x, a).atoms()) {
        if (pr == 0.0) continue;
        for (StateId y = 0; y < S; ++y) {
          const double py = mdp.p(x, a, y);
          if (py == 0.0) continue;
          for (const auto& [z, pz] : dist.by_state[y]) acc.add(r + mdp.discount * z, pr * py * pz);
        }
      }
      dist.by_action[x * A + a] = acc.finish();
      for (const auto& [z, p] : dist.by_action[x * A + a]) state_acc.add(z, dist.pi[x * A + a] * p);
    }
    dist.by_state[x] = state_acc.finish();
  }
  return dist;
}

void load_state_hindsight(StateHindsightTable& table, const HindsightMatrix& h, const SoftmaxPolicy& policy) {
  const std::size_t O = table.n_observations();
  const std::size_t A = table.n_actions();
  if (h.n_sources() != O || h.n_targets() != O || h.n_actions() != A || policy.n_observations() != O ||
      policy.n_actions() != A)
    throw ConfigError("hindsight matrix does not match the table dimensions");
  std::vector<double> row(A);
  for (ObsId x = 0; x < O; ++x)
    for (ObsId y = 0; y < O; ++y) {
      if (!h.defined(x, y)) {
        table.set_logits(x, y, policy.logits(x));
        continue;
      }
      for (ActionId a = 0; a < A; ++a) {
        const double p = h(x, y, a);
        row[a] = p > 0.0 ? std::log(p) : kLogZero;
      }
      table.set_logits(x, y, row);
    }
}

void load_return_hindsight(ReturnHindsightTable& table, const ReturnDistribution& dist, const TabularMDP& mdp,
                           const SoftmaxPolicy& policy) {
  if (mdp.n_observations != mdp.n_states)
    throw ConfigError("loading exact return hindsight needs a fully observed MDP");
  for (StateId x = 0; x < mdp.n_states; ++x)
    if (mdp.observation_of[x] != x) throw ConfigError("loading exact return hindsight needs a fully observed MDP");
  const std::size_t A = mdp.n_actions;
  if (table.n_observations() != mdp.n_states || table.n_actions() != A || dist.n_states != mdp.n_states)
    throw ConfigError("return hindsight table does not match the MDP");

  const auto& binner = table.binner();
  const std::size_t B = binner.n_bins();
  std::vector<double> row(A);
  for (StateId x = 0; x < mdp.n_states; ++x) {
    std::vector<double> num(B * A, 0.0), den(B, 0.0);
    for (const auto& [z, pz] : dist.by_state[x]) den[binner.bin(z)] += pz;
    for (ActionId a = 0; a < A; ++a)
      for (const auto& [z, pz] : dist.by_action[x * A + a])
        num[binner.bin(z) * A + a] += dist.pi[x * A + a] * pz;
    for (std::size_t b = 0; b < B; ++b) {
      if (!(den[b] > 0.0)) {
        table.set_logits_in_bin(x, b, policy.logits(x));
        continue;
      }
      for (ActionId a = 0; a < A; ++a) {
        const double p = num[b * A + a] / den[b];
        row[a] = p > 0.0 ? std::log(p) : kLogZero;
      }
      table.set_logits_in_bin(x, b, row);
    }
  }
}

}  // namespace hca
