#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "opirl/numcore/autodiff.hpp"

namespace opirl {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Optimizer state. Moments are keyed by parameter name and created lazily.
struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  std::map<std::string, Matrix> first_moment;
  std::map<std::string, Matrix> second_moment;

  AdamState() = default;
  explicit AdamState(AdamOptions opts) : options(opts) {}
};

/// One bias-corrected Adam update using each parameter's accumulated gradient.
/// Throws ContractError when a parameter carries no gradient of its own shape.
void adam_step(std::span<ad::Parameter* const> params, AdamState& state);

}  // namespace opirl
