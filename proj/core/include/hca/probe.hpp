#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "hca/agents.hpp"
#include "hca/mdp.hpp"
#include "hca/policy.hpp"
#include "hca/rng.hpp"

namespace hca {

enum class ProbeMethod { Oracle, StateHCA, ReturnHCA, BaselinePG, MonteCarloPG };

std::string_view to_string(ProbeMethod method);
ProbeMethod parse_probe_method(std::string_view name);

/// Advantage estimates A(x_0, a) for every action a at the initial state
/// under a fixed policy. The method's estimators start cold (hindsight
/// tables equal to pi) and are trained online over n_rollouts episodes; the
/// policy never moves. The rollouts are then scored with the final
/// estimators.
///
/// StateHCA averages Q^x(x_0, a) - sum_b pi(b) Q^x(x_0, b) over rollouts.
/// The sampled-action methods average their advantage over the rollouts
/// whose first action was a (0 when a never occurred). Oracle is the exact
/// advantage and consumes no randomness.
std::vector<double> estimate_advantage_probe(const TabularMDP& mdp, const SoftmaxPolicy& policy,
                                             ProbeMethod method, std::size_t n_rollouts, const AgentConfig& cfg,
                                             RunStreams& rng);

}  // namespace hca
