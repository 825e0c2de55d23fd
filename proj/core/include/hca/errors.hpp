#pragma once

#include <stdexcept>
#include <string>

namespace hca {

/// Malformed model, mismatched dimensions, or an invalid experiment setup.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite inputs to a numeric update.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An exact computation was asked for on a model that violates its
/// precondition. The message names the precondition.
class InadmissibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hca
