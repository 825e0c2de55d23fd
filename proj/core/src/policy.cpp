#include "hca/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hca/errors.hpp"

namespace hca {

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

SoftmaxPolicy::SoftmaxPolicy(std::size_t n_observations, std::size_t n_actions)
    : n_observations_(n_observations),
      n_actions_(n_actions),
      logits_(n_observations * n_actions, 0.0) {
  if (n_actions == 0) throw ConfigError("SoftmaxPolicy: need at least one action");
}

void SoftmaxPolicy::check_obs(ObsId obs) const {
  if (obs >= n_observations_) {
    throw std::out_of_range("SoftmaxPolicy: observation " + std::to_string(obs) +
                            " out of range (" + std::to_string(n_observations_) + ")");
  }
}

std::span<const double> SoftmaxPolicy::logits(ObsId obs) const {
  check_obs(obs);
  return {logits_.data() + obs * n_actions_, n_actions_};
}

std::span<double> SoftmaxPolicy::logits(ObsId obs) {
  check_obs(obs);
  return {logits_.data() + obs * n_actions_, n_actions_};
}

void SoftmaxPolicy::set_logits(ObsId obs, std::span<const double> row) {
  if (row.size() != n_actions_) throw ConfigError("SoftmaxPolicy: logit row has wrong width");
  std::copy(row.begin(), row.end(), logits(obs).begin());
}

std::vector<double> SoftmaxPolicy::probs(ObsId obs) const { return softmax(logits(obs)); }

double SoftmaxPolicy::prob(ObsId obs, ActionId action) const {
  if (action >= n_actions_) throw std::out_of_range("SoftmaxPolicy: action out of range");
  return probs(obs)[action];
}

ActionId SoftmaxPolicy::sample(ObsId obs, Engine& engine) const {
  const auto p = probs(obs);
  const double u = uniform01(engine);
  double acc = 0.0;
  for (std::size_t a = 0; a + 1 < p.size(); ++a) {
    acc += p[a];
    if (u < acc) return a;
  }
  return p.size() - 1;
}

void SoftmaxPolicy::grad_step(ObsId obs, std::span<const double> coeffs, double lr) {
  if (coeffs.size() != n_actions_) throw ConfigError("grad_step: coefficient width mismatch");
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw NumericError("grad_step: non-finite coefficient");
  }
  const auto p = probs(obs);
  double mean = 0.0;
  for (std::size_t a = 0; a < n_actions_; ++a) mean += p[a] * coeffs[a];
  auto row = logits(obs);
  for (std::size_t b = 0; b < n_actions_; ++b) row[b] += lr * p[b] * (coeffs[b] - mean);
}

void SoftmaxPolicy::log_grad_step(ObsId obs, ActionId action, double coeff, double lr) {
  if (action >= n_actions_) throw std::out_of_range("log_grad_step: action out of range");
  if (!std::isfinite(coeff)) throw NumericError("log_grad_step: non-finite coefficient");
  const auto p = probs(obs);
  auto row = logits(obs);
  for (std::size_t b = 0; b < n_actions_; ++b) {
    row[b] += lr * coeff * ((b == action ? 1.0 : 0.0) - p[b]);
  }
}

}  // namespace hca
