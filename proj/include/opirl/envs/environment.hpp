#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "opirl/numcore/matrix.hpp"

namespace opirl {

struct StepResult {
  Vector observation;
  double reward = 0.0;
  /// The episode reached a terminal state; no bootstrapping past this step.
  bool terminated = false;
  /// The horizon T was reached.
  bool truncated = false;
  /// The underlying task's goal was reached on this step (also set by the
  /// absorbing wrapper, which itself never terminates).
  bool success = false;
};

/// Episodic environment with continuous observations and actions.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual Index observation_dim() const = 0;
  virtual Index action_dim() const = 0;
  virtual int horizon() const = 0;

  /// Starts a new episode; the initial observation is a function of the seed alone.
  virtual Vector reset(std::uint64_t seed) = 0;

  /// Throws ContractError when the episode is already over or before reset().
  virtual StepResult step(const Vector& action) = 0;

  virtual bool done() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

struct EnvOptions {
  /// PointMaze only: half-width of a uniform band of goal x-positions; 0 fixes the goal.
  double goal_band = 0.0;
  /// Wrap the environment with absorbing-state semantics.
  bool absorbing = false;
};

/// "pointmaze-left", "pointmaze-right", "line-1d" or "tabular:<file>".
std::unique_ptr<Environment> make_env(const std::string& id, const EnvOptions& options = {});

}  // namespace opirl
