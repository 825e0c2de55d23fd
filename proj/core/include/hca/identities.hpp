#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hca/mdp.hpp"
#include "hca/policy.hpp"

namespace hca {

/// Exact hindsight identities. Each compares a quantity from backward
/// induction with the same quantity rebuilt from hindsight distributions.
enum class Identity {
  QStateLag,             // Q = r + E_x[sum_{k>=1} g^k h_k/pi R_k]
  AdvantageStateLag,     // A = r - r_pi + E_x[sum_{k>=1} (h_k/pi - 1) g^k R_k]
  QStateGeometric,       // as QStateLag with h_beta, beta = g < 1
  AdvantageStateGeometric,
  QStateBootstrapped,    // T-step form with h_{beta,T} and a V(X_T) bootstrap
  VStateLag,             // V = r_pi + E_{x,a}[sum_{k>=1} g^k pi/h_k R_k]
  VReturn,               // V = E_{x,a}[Z pi/h_z]
  AdvantageReturn,       // A = E_{x,a}[(1 - pi/h_z) Z]
  QReturn,               // Q = E_x[Z h_z/pi]
  GradientAllActions,    // grad V = E[sum_k g^k sum_a grad pi(a|X_k) Q^x(X_k, a)]
  GradientReturn,        // grad V = E[sum_k g^k grad log pi(A_k|X_k) A^z(X_k, A_k)]
  GradientReturnBaseline // grad V = E[sum_s g^s grad log pi(A_s|X_s) (Z_s - b_s)], by trajectory enumeration
};

const std::vector<Identity>& all_identities();
std::string_view to_string(Identity id);
Identity parse_identity(std::string_view name);

struct IdentityReport {
  Identity which = Identity::QStateLag;
  double max_discrepancy = 0.0;
  std::size_t n_compared = 0;
  bool passed = false;
};

/// Evaluates both sides exactly. Throws InadmissibleError naming the
/// violated precondition when the identity does not apply to this MDP.
IdentityReport verify_identity(Identity which, const TabularMDP& mdp, const SoftmaxPolicy& policy,
                               double tolerance = 1e-9);

struct FamilyMember {
  TabularMDP mdp;
  SoftmaxPolicy policy;
};

/// Random layered acyclic MDP with 3..6 states (one absorbing), 2..3
/// actions, finite rewards and horizon equal to the number of layers. Every
/// action shares a state's successor set and reward atoms with positive,
/// action-specific probabilities. The policy has random logits.
FamilyMember random_family_member(std::uint64_t family_seed, std::size_t index, double gamma);

struct SuiteRow {
  Identity which = Identity::QStateLag;
  std::size_t n_checked = 0;
  std::size_t n_skipped = 0;
  double max_discrepancy = 0.0;
  bool passed = false;
};

/// Runs every identity on n_mdps family members at each discount.
/// Inadmissible combinations are counted as skipped.
std::vector<SuiteRow> run_identity_suite(std::uint64_t family_seed, std::size_t n_mdps,
                                         const std::vector<double>& gammas, double tolerance = 1e-9);

}  // namespace hca
