#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hca/rng.hpp"

namespace hca {

using ObsId = std::size_t;
using StateId = std::size_t;
using ActionId = std::size_t;

/// Numerically stable softmax of a logit row.
std::vector<double> softmax(std::span<const double> logits);

/// Tabular softmax policy: one row of action logits per observation.
class SoftmaxPolicy {
 public:
  SoftmaxPolicy() = default;
  SoftmaxPolicy(std::size_t n_observations, std::size_t n_actions);

  std::size_t n_observations() const { return n_observations_; }
  std::size_t n_actions() const { return n_actions_; }

  std::span<const double> logits(ObsId obs) const;
  std::span<double> logits(ObsId obs);
  void set_logits(ObsId obs, std::span<const double> row);

  /// pi(.|obs). Strictly positive for finite logits, sums to 1.
  std::vector<double> probs(ObsId obs) const;
  double prob(ObsId obs, ActionId action) const;

  ActionId sample(ObsId obs, Engine& engine) const;

  /// Ascent step on sum_a pi(a|obs) * coeffs[a]:
  ///   logit[b] += lr * pi(b) * (coeffs[b] - sum_c pi(c) coeffs[c]).
  void grad_step(ObsId obs, std::span<const double> coeffs, double lr);

  /// Ascent step on coeff * log pi(action|obs):
  ///   logit[b] += lr * coeff * (1{b = action} - pi(b)).
  void log_grad_step(ObsId obs, ActionId action, double coeff, double lr);

  const std::vector<double>& raw() const { return logits_; }

  friend bool operator==(const SoftmaxPolicy&, const SoftmaxPolicy&) = default;

 private:
  void check_obs(ObsId obs) const;

  std::size_t n_observations_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> logits_;
};

}  // namespace hca
