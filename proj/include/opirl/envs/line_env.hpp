#pragma once

#include "opirl/envs/environment.hpp"

namespace opirl {

struct LineConfig {
  double start = 0.0;
  double goal = 0.5;
  double max_speed = 0.1;
  int horizon = 20;
  double reset_noise = 0.0;
};

/// One-dimensional point on [-1, 1] with reward 1 - |x' - goal| / 2 per step.
/// Never terminates; episodes end at the horizon.
class LineEnv final : public Environment {
 public:
  explicit LineEnv(LineConfig config = {});

  std::string id() const override { return "line-1d"; }
  Index observation_dim() const override { return 1; }
  Index action_dim() const override { return 1; }
  int horizon() const override { return config_.horizon; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  bool done() const override { return done_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<LineEnv>(*this); }

  /// Return of moving at full speed towards the goal and staying there, which
  /// attains the per-step distance lower bound max(d0 - v t, 0) at every step.
  double optimal_return() const;

 private:
  LineConfig config_;
  double x_ = 0.0;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace opirl
