#pragma once

#include <span>
#include <vector>

#include "opirl/numcore/matrix.hpp"

namespace opirl {

struct Transition {
  Vector state;
  Vector action;
  /// Cached reward at insertion time; learners recompute rewards when sampling.
  double reward = 0.0;
  Vector next_state;
  bool terminated = false;
  bool truncated = false;
};

/// Transitions stacked row-wise.
struct Batch {
  Matrix states;
  Matrix actions;
  Vector rewards;
  Matrix next_states;
  /// 1 where bootstrapping from next_state is allowed, 0 at terminal transitions.
  Vector continues;

  Index size() const { return states.rows(); }
};

/// Fixed-capacity ring buffer sampled uniformly with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(Index capacity, Index obs_dim, Index act_dim);

  /// ContractError on dimension mismatch, non-finite values or actions outside [-1, 1].
  void push(Transition t);

  std::vector<Index> sample_indices(Index n, Rng& rng) const;
  Batch sample(Index n, Rng& rng) const;
  Batch gather(std::span<const Index> indices) const;

  /// Retained transitions by age: 0 is the oldest still stored.
  const Transition& at(Index i) const;
  std::vector<Transition> snapshot() const;
  Batch all() const;

  Index size() const { return static_cast<Index>(items_.size()); }
  Index capacity() const { return capacity_; }
  std::int64_t total_pushed() const { return total_; }
  Index obs_dim() const { return obs_dim_; }
  Index act_dim() const { return act_dim_; }
  bool empty() const { return items_.empty(); }

 private:
  Index capacity_;
  Index obs_dim_;
  Index act_dim_;
  std::vector<Transition> items_;
  Index cursor_ = 0;
  std::int64_t total_ = 0;
};

/// Observations returned by reset, together with the first action taken.
class InitialStateBuffer {
 public:
  explicit InitialStateBuffer(Index obs_dim) : obs_dim_(obs_dim) {}

  void push(const Vector& observation, const Vector& first_action);
  Matrix sample_states(Index n, Rng& rng) const;

  Index size() const { return static_cast<Index>(states_.size()); }
  const Vector& state(Index i) const { return states_.at(static_cast<std::size_t>(i)); }
  const Vector& first_action(Index i) const { return actions_.at(static_cast<std::size_t>(i)); }

 private:
  Index obs_dim_;
  std::vector<Vector> states_;
  std::vector<Vector> actions_;
};

}  // namespace opirl
