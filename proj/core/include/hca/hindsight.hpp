#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hca/policy.hpp"

namespace hca {

/// Learned h_beta(a | x, y): probability that action a was taken at x given
/// that y was reached later in the episode. One logit row per (x, y).
class StateHindsightTable {
 public:
  StateHindsightTable() = default;
  StateHindsightTable(std::size_t n_observations, std::size_t n_actions, double beta = 1.0);

  std::size_t n_observations() const { return n_observations_; }
  std::size_t n_actions() const { return n_actions_; }
  double beta() const { return beta_; }

  std::vector<double> probs(ObsId x, ObsId y) const;
  std::span<const double> logits(ObsId x, ObsId y) const;
  void set_logits(ObsId x, ObsId y, std::span<const double> row);

  /// One cross-entropy step toward label `action`:
  ///   logit[b] += lr * (1{b = action} - h(b | x, y)).
  void update(ObsId x, ObsId y, ActionId action, double lr);

  /// Sets every row (x, .) to the policy's logits at x, so h = pi and all
  /// ratios are 1.
  void reset_to_policy(const SoftmaxPolicy& policy);

  /// h(a | x, y) / pi(a | x).
  double ratio(const SoftmaxPolicy& policy, ActionId a, ObsId x, ObsId y) const;

 private:
  std::size_t offset(ObsId x, ObsId y) const;

  std::size_t n_observations_ = 0;
  std::size_t n_actions_ = 0;
  double beta_ = 1.0;
  std::vector<double> logits_;
};

/// Uniform clamped binning of scalar returns:
///   bin(z) = clamp(floor((z - lo) / (hi - lo) * n_bins), 0, n_bins - 1).
class ReturnBinner {
 public:
  ReturnBinner() = default;
  ReturnBinner(std::size_t n_bins, double lo, double hi);

  std::size_t n_bins() const { return n_bins_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t bin(double z) const;

 private:
  std::size_t n_bins_ = 1;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

/// Learned h_z(a | x, z) over binned returns.
class ReturnHindsightTable {
 public:
  static constexpr double kDefaultFloor = 1e-3;

  ReturnHindsightTable() = default;
  ReturnHindsightTable(std::size_t n_observations, std::size_t n_actions, ReturnBinner binner,
                       double floor = kDefaultFloor);

  std::size_t n_observations() const { return n_observations_; }
  std::size_t n_actions() const { return n_actions_; }
  const ReturnBinner& binner() const { return binner_; }
  double floor() const { return floor_; }

  std::vector<double> probs(ObsId x, double z) const;
  std::vector<double> probs_in_bin(ObsId x, std::size_t bin) const;
  void set_logits_in_bin(ObsId x, std::size_t bin, std::span<const double> row);

  /// Cross-entropy step on the row of bin(z), same rule as the state table.
  void update(ObsId x, double z, ActionId action, double lr);

  /// Sets every row (x, .) to the policy's logits at x.
  void reset_to_policy(const SoftmaxPolicy& policy);

  /// pi(a | x) / max(h_z(a | x, bin(z)), floor).
  double ratio(const SoftmaxPolicy& policy, ActionId a, ObsId x, double z) const;

 private:
  std::size_t offset(ObsId x, std::size_t bin) const;

  std::size_t n_observations_ = 0;
  std::size_t n_actions_ = 0;
  ReturnBinner binner_;
  double floor_ = kDefaultFloor;
  std::vector<double> logits_;
};

}  // namespace hca
