#pragma once

#include <Eigen/Dense>

#include "opirl/envs/environment.hpp"

namespace opirl {

enum class BarrierSide { Left, Right };

struct PointMazeConfig {
  BarrierSide side = BarrierSide::Left;
  Eigen::Vector2d start{0.0, -0.8};
  Eigen::Vector2d goal{0.0, 0.8};
  double goal_radius = 0.1;
  Eigen::Vector2d barrier_a{-1.0, 0.0};
  Eigen::Vector2d barrier_b{0.2, 0.0};
  double max_speed = 0.1;
  double dt = 1.0;
  int horizon = 100;
  double reset_noise = 0.05;
  double goal_band = 0.0;

  /// Barrier of half-width 0.6 along y = 0, attached to the left wall.
  static PointMazeConfig left();
  /// Mirror image: the barrier is attached to the right wall.
  static PointMazeConfig right();

  void validate() const;
};

/// Point mass in [-1, 1]^2 that must reach the goal around a barrier.
///
/// Actions are velocities in [-1, 1]^2 scaled by max_speed. A move that would
/// cross the barrier stops just short of it; walls clamp the position.
/// Reward is -|position - goal|; reaching the goal radius terminates.
class PointMaze final : public Environment {
 public:
  explicit PointMaze(PointMazeConfig config);

  std::string id() const override;
  /// Position, followed by the goal position when the goal is randomised.
  Index observation_dim() const override { return config_.goal_band > 0.0 ? 4 : 2; }
  Index action_dim() const override { return 2; }
  int horizon() const override { return config_.horizon; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  bool done() const override { return done_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PointMaze>(*this); }

  const PointMazeConfig& config() const { return config_; }
  const Eigen::Vector2d& position() const { return position_; }
  const Eigen::Vector2d& goal() const { return goal_; }
  Vector observation() const;

  /// Resulting position of moving from `from` towards `to`, honouring walls and barrier.
  Eigen::Vector2d move(const Eigen::Vector2d& from, const Eigen::Vector2d& to) const;

 private:
  PointMazeConfig config_;
  Eigen::Vector2d position_ = Eigen::Vector2d::Zero();
  Eigen::Vector2d goal_ = Eigen::Vector2d::Zero();
  int t_ = 0;
  bool started_ = false;
  bool done_ = true;
};

/// Whether segments p0-p1 and q0-q1 share a point.
bool segments_intersect(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1, const Eigen::Vector2d& q0,
                        const Eigen::Vector2d& q1);

}  // namespace opirl
