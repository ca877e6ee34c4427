#include "opirl/envs/point_maze.hpp"

#include <cmath>
#include <numbers>

#include "opirl/numcore/errors.hpp"

namespace opirl {

namespace {

// Positions stop this far (perpendicular) short of the barrier line.
constexpr double kBarrierMargin = 1e-6;

double cross(const Eigen::Vector2d& u, const Eigen::Vector2d& v) { return u.x() * v.y() - u.y() * v.x(); }

}  // namespace

PointMazeConfig PointMazeConfig::left() {
  PointMazeConfig c;
  c.side = BarrierSide::Left;
  c.barrier_a = {-1.0, 0.0};
  c.barrier_b = {0.2, 0.0};
  return c;
}

PointMazeConfig PointMazeConfig::right() {
  PointMazeConfig c;
  c.side = BarrierSide::Right;
  c.barrier_a = {-0.2, 0.0};
  c.barrier_b = {1.0, 0.0};
  return c;
}

void PointMazeConfig::validate() const {
  if (!(goal_radius > 0.0)) throw ContractError("PointMaze: goal radius must be positive");
  if (!((barrier_b - barrier_a).norm() > 0.0)) throw ContractError("PointMaze: barrier has zero length");
  if (!(max_speed > 0.0) || !(dt > 0.0)) throw ContractError("PointMaze: max speed and time step must be positive");
  if (horizon < 1) throw ContractError("PointMaze: horizon must be at least 1");
  if (reset_noise < 0.0 || goal_band < 0.0) throw ContractError("PointMaze: noise widths must be non-negative");
}

bool segments_intersect(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1, const Eigen::Vector2d& q0,
                        const Eigen::Vector2d& q1) {
  const Eigen::Vector2d d = p1 - p0;
  const Eigen::Vector2d e = q1 - q0;
  const double o1 = cross(e, p0 - q0);
  const double o2 = cross(e, p1 - q0);
  const double o3 = cross(d, q0 - p0);
  const double o4 = cross(d, q1 - p0);
  auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& x) {
    return std::min(a.x(), b.x()) <= x.x() && x.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= x.y() &&
           x.y() <= std::max(a.y(), b.y());
  };
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
  if (o1 == 0 && on_segment(q0, q1, p0)) return true;
  if (o2 == 0 && on_segment(q0, q1, p1)) return true;
  if (o3 == 0 && on_segment(p0, p1, q0)) return true;
  if (o4 == 0 && on_segment(p0, p1, q1)) return true;
  return false;
}

PointMaze::PointMaze(PointMazeConfig config) : config_(std::move(config)) {
  config_.validate();
  goal_ = config_.goal;
}

std::string PointMaze::id() const {
  return config_.side == BarrierSide::Left ? "pointmaze-left" : "pointmaze-right";
}

Vector PointMaze::observation() const {
  Vector obs(observation_dim());
  obs.head<2>() = position_;
  if (obs.size() == 4) obs.tail<2>() = goal_;
  return obs;
}

Vector PointMaze::reset(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  // Uniform over the disc of radius reset_noise.
  const double r = config_.reset_noise * std::sqrt(uni(rng));
  const double angle = 2.0 * std::numbers::pi * uni(rng);
  position_ = config_.start + r * Eigen::Vector2d(std::cos(angle), std::sin(angle));
  goal_ = config_.goal;
  if (config_.goal_band > 0.0) goal_.x() += config_.goal_band * (2.0 * uni(rng) - 1.0);
  t_ = 0;
  started_ = true;
  done_ = false;
  return observation();
}

Eigen::Vector2d PointMaze::move(const Eigen::Vector2d& from, const Eigen::Vector2d& to) const {
  const Eigen::Vector2d target = to.cwiseMax(-1.0).cwiseMin(1.0);
  const Eigen::Vector2d d = target - from;
  if (d.squaredNorm() == 0.0) return from;

  const Eigen::Vector2d& a = config_.barrier_a;
  const Eigen::Vector2d e = config_.barrier_b - a;
  const double len_e = e.norm();
  // Signed distances of both endpoints to the barrier line.
  const double s0 = cross(e, from - a) / len_e;
  const double s1 = cross(e, target - a) / len_e;
  if ((s0 > 0 && s1 > 0) || (s0 < 0 && s1 < 0)) return target;

  if (s0 == s1) {
    // Motion along the barrier line: blocked if it overlaps the segment.
    const double u0 = (from - a).dot(e) / (len_e * len_e);
    const double u1 = (target - a).dot(e) / (len_e * len_e);
    return (std::max(u0, u1) < 0.0 || std::min(u0, u1) > 1.0) ? target : from;
  }
  const double t = s0 / (s0 - s1);
  const Eigen::Vector2d hit = from + t * d;
  const double u = (hit - a).dot(e) / (len_e * len_e);
  if (u < 0.0 || u > 1.0) return target;

  if (std::abs(s0) <= kBarrierMargin) return from;
  const double t_stop = (std::abs(s0) - kBarrierMargin) / std::abs(s0 - s1);
  return from + t_stop * d;
}

StepResult PointMaze::step(const Vector& action) {
  if (!started_ || done_) throw ContractError("PointMaze: step called on a finished episode; call reset first");
  if (action.size() != 2) {
    throw DimensionError("PointMaze: action has " + std::to_string(action.size()) + " entries, expected 2");
  }
  if (!action.allFinite()) throw ContractError("PointMaze: non-finite action");
  const Eigen::Vector2d velocity = config_.max_speed * action.cwiseMax(-1.0).cwiseMin(1.0);
  position_ = move(position_, position_ + velocity * config_.dt);
  ++t_;

  StepResult out;
  const double distance = (position_ - goal_).norm();
  out.reward = -distance;
  out.terminated = distance <= config_.goal_radius;
  out.success = out.terminated;
  out.truncated = t_ >= config_.horizon;
  out.observation = observation();
  done_ = out.terminated || out.truncated;
  return out;
}

}  // namespace opirl
