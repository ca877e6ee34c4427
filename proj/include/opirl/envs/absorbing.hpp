#pragma once

#include "opirl/envs/environment.hpp"

namespace opirl {

/// Adds an indicator dimension (0 real, 1 absorbing). When the inner episode
/// terminates before the horizon, that step and every later one lead to the
/// absorbing state with zero reward until T; the wrapper itself never reports
/// termination, so learners keep bootstrapping through absorbing transitions.
class AbsorbingWrapper final : public Environment {
 public:
  explicit AbsorbingWrapper(std::unique_ptr<Environment> inner);
  AbsorbingWrapper(const AbsorbingWrapper& other);

  std::string id() const override { return inner_->id(); }
  Index observation_dim() const override { return inner_->observation_dim() + 1; }
  Index action_dim() const override { return inner_->action_dim(); }
  int horizon() const override { return inner_->horizon(); }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  bool done() const override { return done_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<AbsorbingWrapper>(*this); }

  bool absorbed() const { return absorbed_; }
  Environment& inner() { return *inner_; }

  Vector absorbing_observation() const;
  Vector real_observation(const Vector& inner_obs) const;

 private:
  std::unique_ptr<Environment> inner_;
  bool absorbed_ = false;
  bool done_ = true;
  int t_ = 0;
};

inline bool is_absorbing(const Vector& obs) { return obs.size() > 0 && obs[obs.size() - 1] == 1.0; }

}  // namespace opirl
