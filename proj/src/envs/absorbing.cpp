#include "opirl/envs/absorbing.hpp"

#include "opirl/numcore/errors.hpp"

namespace opirl {

AbsorbingWrapper::AbsorbingWrapper(std::unique_ptr<Environment> inner) : inner_(std::move(inner)) {
  if (!inner_) throw ContractError("AbsorbingWrapper: null environment");
}

AbsorbingWrapper::AbsorbingWrapper(const AbsorbingWrapper& other)
    : inner_(other.inner_->clone()), absorbed_(other.absorbed_), done_(other.done_), t_(other.t_) {}

Vector AbsorbingWrapper::absorbing_observation() const {
  Vector obs = Vector::Zero(observation_dim());
  obs[obs.size() - 1] = 1.0;
  return obs;
}

Vector AbsorbingWrapper::real_observation(const Vector& inner_obs) const {
  Vector obs(inner_obs.size() + 1);
  obs << inner_obs, 0.0;
  return obs;
}

Vector AbsorbingWrapper::reset(std::uint64_t seed) {
  absorbed_ = false;
  done_ = false;
  t_ = 0;
  return real_observation(inner_->reset(seed));
}

StepResult AbsorbingWrapper::step(const Vector& action) {
  if (done_) throw ContractError(inner_->id() + ": step called on a finished episode; call reset first");
  if (action.size() != action_dim()) {
    throw DimensionError(inner_->id() + ": action has " + std::to_string(action.size()) + " entries, expected " +
                         std::to_string(action_dim()));
  }
  ++t_;
  StepResult out;
  if (absorbed_) {
    out.observation = absorbing_observation();
  } else {
    StepResult inner = inner_->step(action);
    out.reward = inner.reward;
    out.success = inner.success;
    if (inner.terminated) {
      absorbed_ = true;
      out.observation = absorbing_observation();
    } else {
      out.observation = real_observation(inner.observation);
    }
  }
  out.truncated = t_ >= horizon();
  done_ = out.truncated;
  return out;
}

}  // namespace opirl
