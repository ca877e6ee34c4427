#include "opirl/envs/line_env.hpp"

#include <algorithm>
#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl {

LineEnv::LineEnv(LineConfig config) : config_(config) {
  if (!(config_.max_speed > 0.0)) throw ContractError("line-1d: max speed must be positive");
  if (config_.horizon < 1) throw ContractError("line-1d: horizon must be at least 1");
}

Vector LineEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  x_ = config_.start + config_.reset_noise * uni(rng);
  t_ = 0;
  done_ = false;
  return Vector::Constant(1, x_);
}

StepResult LineEnv::step(const Vector& action) {
  if (done_) throw ContractError("line-1d: step called on a finished episode; call reset first");
  if (action.size() != 1) {
    throw DimensionError("line-1d: action has " + std::to_string(action.size()) + " entries, expected 1");
  }
  if (!std::isfinite(action[0])) throw ContractError("line-1d: non-finite action");
  x_ = std::clamp(x_ + config_.max_speed * std::clamp(action[0], -1.0, 1.0), -1.0, 1.0);
  ++t_;
  StepResult out;
  out.observation = Vector::Constant(1, x_);
  out.reward = 1.0 - std::abs(x_ - config_.goal) / 2.0;
  out.truncated = t_ >= config_.horizon;
  done_ = out.truncated;
  return out;
}

double LineEnv::optimal_return() const {
  const double d0 = std::abs(config_.goal - config_.start);
  double total = 0.0;
  for (int t = 1; t <= config_.horizon; ++t) total += 1.0 - std::max(d0 - config_.max_speed * t, 0.0) / 2.0;
  return total;
}

}  // namespace opirl
