#include "hca/identities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "hca/errors.hpp"
#include "hca/oracle.hpp"

namespace hca {

const std::vector<Identity>& all_identities() {
  static const std::vector<Identity> ids{
      Identity::QStateLag,          Identity::AdvantageStateLag, Identity::QStateGeometric,
      Identity::AdvantageStateGeometric, Identity::QStateBootstrapped, Identity::VStateLag,
      Identity::VReturn,            Identity::AdvantageReturn,   Identity::QReturn,
      Identity::GradientAllActions, Identity::GradientReturn,    Identity::GradientReturnBaseline};
  return ids;
}

std::string_view to_string(Identity id) {
  switch (id) {
    case Identity::QStateLag:
      return "q_state_lag";
    case Identity::AdvantageStateLag:
      return "adv_state_lag";
    case Identity::QStateGeometric:
      return "q_state_geometric";
    case Identity::AdvantageStateGeometric:
      return "adv_state_geometric";
    case Identity::QStateBootstrapped:
      return "q_state_bootstrapped";
    case Identity::VStateLag:
      return "v_state_lag";
    case Identity::VReturn:
      return "v_return";
    case Identity::AdvantageReturn:
      return "adv_return";
    case Identity::QReturn:
      return "q_return";
    case Identity::GradientAllActions:
      return "grad_all_actions";
    case Identity::GradientReturn:
      return "grad_return";
    case Identity::GradientReturnBaseline:
      return "grad_return_baseline";
  }
  return "unknown";
}

Identity parse_identity(std::string_view name) {
  for (Identity id : all_identities())
    if (to_string(id) == name) return id;
  throw ConfigError("unknown identity '" + std::string(name) + "'");
}

namespace {

struct Context {
  const TabularMDP& mdp;
  const SoftmaxPolicy& policy;
  OracleSolution sol;
  std::vector<double> pi;
  std::vector<double> r_pi;
  std::size_t S;
  std::size_t A;
  double gamma;

  Context(const TabularMDP& m, const SoftmaxPolicy& p)
      : mdp(m), policy(p), sol(solve_values(m, p)), pi(state_policy(m, p)), S(m.n_states), A(m.n_actions),
        gamma(m.discount) {
    for (double v : pi)
      if (!(v > 0.0)) throw InadmissibleError("policy must be strictly positive (pi(a|x) > 0)");
    r_pi.assign(S, 0.0);
    for (StateId x = 0; x < S; ++x) {
      if (mdp.absorbing[x]) continue;
      for (ActionId a = 0; a < A; ++a) r_pi[x] += pi[x * A + a] * mdp.mean_reward(x, a);
    }
  }

  double p(StateId x, ActionId a) const { return pi[x * A + a]; }
};

class Tracker {
 public:
  void compare(double lhs, double rhs) {
    max_ = std::max(max_, std::isfinite(lhs - rhs) ? std::abs(lhs - rhs) : HUGE_VAL);
    ++n_;
  }
  IdentityReport report(Identity which, double tolerance) const {
    return {which, max_, n_, n_ > 0 && max_ < tolerance};
  }

 private:
  double max_ = 0.0;
  std::size_t n_ = 0;
};

double checked(const HindsightMatrix& h, StateId x, StateId y, ActionId a) {
  const double v = h(x, y, a);
  if (std::isnan(v)) throw InadmissibleError("hindsight is undefined at a state reached with positive probability");
  return v;
}

void require_discount_below_one(const Context& c) {
  if (!(c.gamma < 1.0))
    throw InadmissibleError("beta = gamma must be below 1 for the geometric hindsight distribution");
}

/// sum_{k=1}^{K} g^k sum_y P_k(y|x) h(a|x,y,k)/pi(a|x) r_pi(y), with h chosen per lag.
double state_hindsight_sum(const Context& c, const LagDistributions& lags, StateId x, ActionId a, std::size_t K,
                           const std::function<const HindsightMatrix&(std::size_t)>& h_at) {
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t k = 1; k <= K; ++k) {
    discount *= c.gamma;
    const auto& h = h_at(k);
    for (StateId y = 0; y < c.S; ++y) {
      const double w = lags.p(k, x, y);
      if (w == 0.0 || c.r_pi[y] == 0.0) continue;
      total += discount * w * checked(h, x, y, a) / c.p(x, a) * c.r_pi[y];
    }
  }
  return total;
}

IdentityReport q_or_advantage_state(Identity which, const Context& c, double tolerance) {
  const bool geometric = which == Identity::QStateGeometric || which == Identity::AdvantageStateGeometric;
  const bool advantage = which == Identity::AdvantageStateLag || which == Identity::AdvantageStateGeometric;
  if (geometric) require_discount_below_one(c);
  const auto lags = forward_distributions(c.mdp, c.policy);
  std::vector<HindsightMatrix> h_k;
  HindsightMatrix h_beta;
  if (geometric) {
    h_beta = mixed_hindsight(lags, c.pi, truncated_geometric_weights(c.gamma, lags.depth));
  } else {
    for (std::size_t k = 0; k <= lags.depth; ++k) h_k.push_back(hindsight_at_lag(lags, c.pi, k));
  }
  auto h_at = [&](std::size_t k) -> const HindsightMatrix& { return geometric ? h_beta : h_k[k]; };

  Tracker t;
  for (StateId x = 0; x < c.S; ++x) {
    if (c.mdp.absorbing[x]) continue;
    double future_pi = 0.0;
    if (advantage) {
      // sum_{k>=1} g^k E_x[R_k], the subtracted "-1" part of the ratio.
      double discount = 1.0;
      for (std::size_t k = 1; k <= lags.depth; ++k) {
        discount *= c.gamma;
        for (StateId y = 0; y < c.S; ++y) future_pi += discount * lags.p(k, x, y) * c.r_pi[y];
      }
    }
    for (ActionId a = 0; a < c.A; ++a) {
      const double weighted = state_hindsight_sum(c, lags, x, a, lags.depth, h_at);
      const double r = c.mdp.mean_reward(x, a);
      if (advantage)
        t.compare(c.sol.adv(x, a), r - c.r_pi[x] + weighted - future_pi);
      else
        t.compare(c.sol.q(x, a), r + weighted);
    }
  }
  return t.report(which, tolerance);
}

IdentityReport q_state_bootstrapped(const Context& c, double tolerance) {
  const auto lags = forward_distributions(c.mdp, c.policy);
  Tracker t;
  // At g = 1 the lag weights collapse onto T and leave the earlier lags
  // without hindsight, so only the one-step form is well posed.
  const std::size_t T_max = c.gamma < 1.0 ? lags.depth : 1;
  for (std::size_t T = 1; T <= T_max; ++T) {
    const auto h = mixed_hindsight(lags, c.pi, truncated_geometric_weights(c.gamma, T));
    for (StateId x = 0; x < c.S; ++x) {
      if (c.mdp.absorbing[x]) continue;
      for (ActionId a = 0; a < c.A; ++a) {
        double rhs = c.mdp.mean_reward(x, a) +
                     state_hindsight_sum(c, lags, x, a, T - 1, [&](std::size_t) -> const HindsightMatrix& { return h; });
        const double gT = std::pow(c.gamma, static_cast<double>(T));
        for (StateId y = 0; y < c.S; ++y) {
          const double w = lags.p(T, x, y);
          if (w == 0.0 || c.sol.V[y] == 0.0) continue;
          rhs += gT * w * checked(h, x, y, a) / c.p(x, a) * c.sol.V[y];
        }
        t.compare(c.sol.q(x, a), rhs);
      }
    }
  }
  return t.report(Identity::QStateBootstrapped, tolerance);
}

IdentityReport v_state_lag(const Context& c, double tolerance) {
  const auto lags = forward_distributions(c.mdp, c.policy);
  std::vector<HindsightMatrix> h_k;
  for (std::size_t k = 0; k <= lags.depth; ++k) h_k.push_back(hindsight_at_lag(lags, c.pi, k));
  Tracker t;
  for (StateId x = 0; x < c.S; ++x) {
    if (c.mdp.absorbing[x]) continue;
    for (ActionId a = 0; a < c.A; ++a) {
      double rhs = c.r_pi[x];
      double discount = 1.0;
      for (std::size_t k = 1; k <= lags.depth; ++k) {
        discount *= c.gamma;
        for (StateId y = 0; y < c.S; ++y) {
          if (lags.p(k, x, y) > 0.0 && lags.p(k, x, a, y) == 0.0)
            throw InadmissibleError("every state reachable under pi must stay reachable after the fixed first action");
          const double w = lags.p(k, x, a, y);
          if (w == 0.0 || c.r_pi[y] == 0.0) continue;
          rhs += discount * w * c.p(x, a) / checked(h_k[k], x, y, a) * c.r_pi[y];
        }
      }
      t.compare(c.sol.V[x], rhs);
    }
  }
  return t.report(Identity::VStateLag, tolerance);
}

void require_return_support(const Context& c, const ReturnDistribution& dist) {
  for (StateId x = 0; x < c.S; ++x) {
    if (c.mdp.absorbing[x]) continue;
    for (ActionId a = 0; a < c.A; ++a)
      for (const auto& [z, pz] : dist.by_state[x])
        if (pz > 0.0 && !(dist.prob(x, a, z) > 0.0))
          throw InadmissibleError("h_z(a|x,z) must be positive for every return z reachable under pi");
  }
}

/// E_{x,a}[(1 - pi/h_z) Z] from the exact return distribution.
double return_advantage(const Context& c, const ReturnDistribution& dist, StateId x, ActionId a) {
  double total = 0.0;
  for (const auto& [z, pz] : dist.by_action[x * c.A + a]) total += pz * (1.0 - c.p(x, a) / dist.h_z(x, a, z)) * z;
  return total;
}

IdentityReport return_identities(Identity which, const Context& c, double tolerance) {
  const auto dist = exact_return_distribution(c.mdp, c.policy);
  if (which != Identity::QReturn) require_return_support(c, dist);
  Tracker t;
  for (StateId x = 0; x < c.S; ++x) {
    if (c.mdp.absorbing[x]) continue;
    for (ActionId a = 0; a < c.A; ++a) {
      double rhs = 0.0;
      switch (which) {
        case Identity::VReturn:
          for (const auto& [z, pz] : dist.by_action[x * c.A + a]) rhs += pz * z * c.p(x, a) / dist.h_z(x, a, z);
          t.compare(c.sol.V[x], rhs);
          break;
        case Identity::AdvantageReturn:
          t.compare(c.sol.adv(x, a), return_advantage(c, dist, x, a));
          break;
        default:
          for (const auto& [z, pz] : dist.by_state[x]) rhs += pz * z * dist.h_z(x, a, z) / c.p(x, a);
          t.compare(c.sol.q(x, a), rhs);
          break;
      }
    }
  }
  return t.report(which, tolerance);
}

/// sum_x d(x0, x) sum_b pi(b|x) (c(x, b) - sum_a pi(a|x) c(x, a)) per observation.
std::vector<double> all_actions_gradient(const Context& c, const std::vector<double>& coeffs) {
  std::vector<double> grad(c.mdp.n_observations * c.A, 0.0);
  for (StateId x = 0; x < c.S; ++x) {
    const double w = c.sol.d(c.mdp.initial_state, x);
    if (w == 0.0) continue;
    double mean = 0.0;
    for (ActionId a = 0; a < c.A; ++a) mean += c.p(x, a) * coeffs[x * c.A + a];
    const ObsId o = c.mdp.observation_of[x];
    for (ActionId b = 0; b < c.A; ++b) grad[o * c.A + b] += w * c.p(x, b) * (coeffs[x * c.A + b] - mean);
  }
  return grad;
}

IdentityReport compare_gradient(Identity which, const Context& c, const std::vector<double>& rhs, double tolerance) {
  Tracker t;
  for (std::size_t i = 0; i < rhs.size(); ++i) t.compare(c.sol.gradient[i], rhs[i]);
  return t.report(which, tolerance);
}

IdentityReport gradient_all_actions(const Context& c, double tolerance) {
  require_discount_below_one(c);
  const auto lags = forward_distributions(c.mdp, c.policy);
  const auto h_beta = mixed_hindsight(lags, c.pi, truncated_geometric_weights(c.gamma, lags.depth));
  std::vector<double> qx(c.S * c.A, 0.0);
  for (StateId x = 0; x < c.S; ++x) {
    if (c.mdp.absorbing[x]) continue;
    for (ActionId a = 0; a < c.A; ++a)
      qx[x * c.A + a] = c.mdp.mean_reward(x, a) +
                        state_hindsight_sum(c, lags, x, a, lags.depth,
                                            [&](std::size_t) -> const HindsightMatrix& { return h_beta; });
  }
  return compare_gradient(Identity::GradientAllActions, c, all_actions_gradient(c, qx), tolerance);
}

IdentityReport gradient_return(const Context& c, double tolerance) {
  const auto dist = exact_return_distribution(c.mdp, c.policy);
  require_return_support(c, dist);
  // E[grad log pi(a) A^z] = sum_a pi(a)(1{a=b} - pi(b)) E_{x,a}[A^z], the all-actions form with c = E_{x,a}[A^z].
  std::vector<double> coeffs(c.S * c.A, 0.0);
  for (StateId x = 0; x < c.S; ++x) {
    if (c.mdp.absorbing[x]) continue;
    for (ActionId a = 0; a < c.A; ++a) coeffs[x * c.A + a] = return_advantage(c, dist, x, a);
  }
  return compare_gradient(Identity::GradientReturn, c, all_actions_gradient(c, coeffs), tolerance);
}

struct PathStep {
  StateId x;
  ActionId a;
  double r;
};

void enumerate_paths(const Context& c, const ReturnDistribution& dist, StateId x, double prob,
                     std::vector<PathStep>& path, std::vector<double>& grad) {
  if (c.mdp.absorbing[x] || path.size() == c.mdp.horizon) {
    double z = 0.0;
    for (std::size_t s = path.size(); s-- > 0;) {
      z = path[s].r + c.gamma * z;
      const auto& st = path[s];
      const double baseline = c.p(st.x, st.a) / dist.h_z(st.x, st.a, z) * z;
      const double coeff = prob * std::pow(c.gamma, static_cast<double>(s)) * (z - baseline);
      const ObsId o = c.mdp.observation_of[st.x];
      for (ActionId b = 0; b < c.A; ++b)
        grad[o * c.A + b] += coeff * ((b == st.a ? 1.0 : 0.0) - c.p(st.x, b));
    }
    return;
  }
  for (ActionId a = 0; a < c.A; ++a) {
    const double pa = prob * c.p(x, a);
    for (const auto& [r, pr] : c.mdp.reward_spec(x, a).atoms()) {
      if (pr == 0.0) continue;
      for (StateId y = 0; y < c.S; ++y) {
        const double py = c.mdp.p(x, a, y);
        if (py == 0.0) continue;
        path.push_back({x, a, r});
        enumerate_paths(c, dist, y, pa * pr * py, path, grad);
        path.pop_back();
      }
    }
  }
}

IdentityReport gradient_return_baseline(const Context& c, double tolerance) {
  const auto dist = exact_return_distribution(c.mdp, c.policy);
  require_return_support(c, dist);
  std::vector<double> grad(c.mdp.n_observations * c.A, 0.0);
  std::vector<PathStep> path;
  enumerate_paths(c, dist, c.mdp.initial_state, 1.0, path, grad);
  return compare_gradient(Identity::GradientReturnBaseline, c, grad, tolerance);
}

}  // namespace

IdentityReport verify_identity(Identity which, const TabularMDP& mdp, const SoftmaxPolicy& policy,
                               double tolerance) {
  const Context c(mdp, policy);
  switch (which) {
    case Identity::QStateLag:
    case Identity::AdvantageStateLag:
    case Identity::QStateGeometric:
    case Identity::AdvantageStateGeometric:
      return q_or_advantage_state(which, c, tolerance);
    case Identity::QStateBootstrapped:
      return q_state_bootstrapped(c, tolerance);
    case Identity::VStateLag:
      return v_state_lag(c, tolerance);
    case Identity::VReturn:
    case Identity::AdvantageReturn:
    case Identity::QReturn:
      return return_identities(which, c, tolerance);
    case Identity::GradientAllActions:
      return gradient_all_actions(c, tolerance);
    case Identity::GradientReturn:
      return gradient_return(c, tolerance);
    case Identity::GradientReturnBaseline:
      return gradient_return_baseline(c, tolerance);
  }
  throw ConfigError("unknown identity");
}

std::vector<SuiteRow> run_identity_suite(std::uint64_t family_seed, std::size_t n_mdps,
                                         const std::vector<double>& gammas, double tolerance) {
  std::vector<SuiteRow> rows;
  for (Identity id : all_identities()) rows.push_back({id, 0, 0, 0.0, false});
  for (std::size_t i = 0; i < n_mdps; ++i) {
    for (double gamma : gammas) {
      const auto member = random_family_member(family_seed, i, gamma);
      for (auto& row : rows) {
        try {
          const auto rep = verify_identity(row.which, member.mdp, member.policy, tolerance);
          ++row.n_checked;
          row.max_discrepancy = std::max(row.max_discrepancy, rep.max_discrepancy);
        } catch (const InadmissibleError&) {
          ++row.n_skipped;
        }
      }
    }
  }
  for (auto& row : rows) row.passed = row.n_checked > 0 && row.max_discrepancy < tolerance;
  return rows;
}

}  // namespace hca
