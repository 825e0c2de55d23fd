#include "hca/hindsight.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hca/errors.hpp"

namespace hca {

namespace {

void cross_entropy_step(std::span<double> row, ActionId label, double lr) {
  const auto h = softmax(row);
  for (std::size_t b = 0; b < row.size(); ++b) row[b] += lr * ((b == label ? 1.0 : 0.0) - h[b]);
}

}  // namespace

StateHindsightTable::StateHindsightTable(std::size_t n_observations, std::size_t n_actions, double beta)
    : n_observations_(n_observations),
      n_actions_(n_actions),
      beta_(beta),
      logits_(n_observations * n_observations * n_actions, 0.0) {
  if (n_actions == 0) throw ConfigError("StateHindsightTable: need at least one action");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("StateHindsightTable: beta outside [0, 1]");
}

std::size_t StateHindsightTable::offset(ObsId x, ObsId y) const {
  if (x >= n_observations_ || y >= n_observations_) {
    throw std::out_of_range("StateHindsightTable: observation pair (" + std::to_string(x) + ", " +
                            std::to_string(y) + ") out of range");
  }
  return (x * n_observations_ + y) * n_actions_;
}

std::span<const double> StateHindsightTable::logits(ObsId x, ObsId y) const {
  return {logits_.data() + offset(x, y), n_actions_};
}

std::vector<double> StateHindsightTable::probs(ObsId x, ObsId y) const { return softmax(logits(x, y)); }

void StateHindsightTable::set_logits(ObsId x, ObsId y, std::span<const double> row) {
  if (row.size() != n_actions_) throw ConfigError("StateHindsightTable: logit row has wrong width");
  std::copy(row.begin(), row.end(), logits_.begin() + static_cast<std::ptrdiff_t>(offset(x, y)));
}

void StateHindsightTable::update(ObsId x, ObsId y, ActionId action, double lr) {
  if (action >= n_actions_) throw std::out_of_range("StateHindsightTable: action out of range");
  cross_entropy_step({logits_.data() + offset(x, y), n_actions_}, action, lr);
}

void StateHindsightTable::reset_to_policy(const SoftmaxPolicy& policy) {
  if (policy.n_observations() != n_observations_ || policy.n_actions() != n_actions_)
    throw ConfigError("policy dimensions do not match the hindsight table");
  for (ObsId x = 0; x < n_observations_; ++x)
    for (ObsId y = 0; y < n_observations_; ++y) set_logits(x, y, policy.logits(x));
}

double StateHindsightTable::ratio(const SoftmaxPolicy& policy, ActionId a, ObsId x, ObsId y) const {
  return probs(x, y).at(a) / policy.prob(x, a);
}

ReturnBinner::ReturnBinner(std::size_t n_bins, double lo, double hi) : n_bins_(n_bins), lo_(lo), hi_(hi) {
  if (n_bins == 0) throw ConfigError("ReturnBinner: n_bins must be >= 1");
  if (!(lo < hi)) throw ConfigError("ReturnBinner: need lo < hi");
}

std::size_t ReturnBinner::bin(double z) const {
  const double scaled = std::floor((z - lo_) / (hi_ - lo_) * static_cast<double>(n_bins_));
  if (!(scaled > 0.0)) return 0;  // also catches NaN
  if (scaled >= static_cast<double>(n_bins_ - 1)) return n_bins_ - 1;
  return static_cast<std::size_t>(scaled);
}

ReturnHindsightTable::ReturnHindsightTable(std::size_t n_observations, std::size_t n_actions, ReturnBinner binner,
                                           double floor)
    : n_observations_(n_observations),
      n_actions_(n_actions),
      binner_(binner),
      floor_(floor),
      logits_(n_observations * binner.n_bins() * n_actions, 0.0) {
  if (n_actions == 0) throw ConfigError("ReturnHindsightTable: need at least one action");
  if (!(floor > 0.0 && floor < 1.0)) throw ConfigError("ReturnHindsightTable: floor must lie in (0, 1)");
}

std::size_t ReturnHindsightTable::offset(ObsId x, std::size_t bin) const {
  if (x >= n_observations_ || bin >= binner_.n_bins()) {
    throw std::out_of_range("ReturnHindsightTable: (observation " + std::to_string(x) + ", bin " +
                            std::to_string(bin) + ") out of range");
  }
  return (x * binner_.n_bins() + bin) * n_actions_;
}

std::vector<double> ReturnHindsightTable::probs_in_bin(ObsId x, std::size_t bin) const {
  return softmax(std::span<const double>(logits_.data() + offset(x, bin), n_actions_));
}

std::vector<double> ReturnHindsightTable::probs(ObsId x, double z) const { return probs_in_bin(x, binner_.bin(z)); }

void ReturnHindsightTable::set_logits_in_bin(ObsId x, std::size_t bin, std::span<const double> row) {
  if (row.size() != n_actions_) throw ConfigError("ReturnHindsightTable: logit row has wrong width");
  std::copy(row.begin(), row.end(), logits_.begin() + static_cast<std::ptrdiff_t>(offset(x, bin)));
}

void ReturnHindsightTable::update(ObsId x, double z, ActionId action, double lr) {
  if (action >= n_actions_) throw std::out_of_range("ReturnHindsightTable: action out of range");
  cross_entropy_step({logits_.data() + offset(x, binner_.bin(z)), n_actions_}, action, lr);
}

void ReturnHindsightTable::reset_to_policy(const SoftmaxPolicy& policy) {
  if (policy.n_observations() != n_observations_ || policy.n_actions() != n_actions_)
    throw ConfigError("policy dimensions do not match the hindsight table");
  for (ObsId x = 0; x < n_observations_; ++x)
    for (std::size_t b = 0; b < binner_.n_bins(); ++b) set_logits_in_bin(x, b, policy.logits(x));
}

double ReturnHindsightTable::ratio(const SoftmaxPolicy& policy, ActionId a, ObsId x, double z) const {
  const double h = probs(x, z).at(a);
  return policy.prob(x, a) / std::max(h, floor_);
}

}  // namespace hca
