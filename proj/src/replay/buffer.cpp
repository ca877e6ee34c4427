#include "opirl/replay/buffer.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"

namespace opirl {

ReplayBuffer::ReplayBuffer(Index capacity, Index obs_dim, Index act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity < 1) throw ContractError("replay buffer capacity must be at least 1");
  items_.reserve(static_cast<std::size_t>(std::min<Index>(capacity, 1 << 20)));
}

void ReplayBuffer::push(Transition t) {
  if (t.state.size() != obs_dim_ || t.next_state.size() != obs_dim_ || t.action.size() != act_dim_) {
    throw ContractError("transition shapes (state " + std::to_string(t.state.size()) + ", action " +
                        std::to_string(t.action.size()) + ", next " + std::to_string(t.next_state.size()) +
                        ") do not match buffer (" + std::to_string(obs_dim_) + ", " + std::to_string(act_dim_) + ")");
  }
  if (!t.state.allFinite() || !t.next_state.allFinite() || !t.action.allFinite() || !std::isfinite(t.reward)) {
    throw ContractError("transition holds a non-finite value");
  }
  if (t.action.size() > 0 && t.action.cwiseAbs().maxCoeff() > 1.0) {
    throw ContractError("transition action outside [-1, 1]");
  }
  ++total_;
  if (size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[static_cast<std::size_t>(cursor_)] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<Index> ReplayBuffer::sample_indices(Index n, Rng& rng) const {
  if (empty()) throw ContractError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<Index> pick(0, size() - 1);
  std::vector<Index> out(static_cast<std::size_t>(n));
  for (auto& i : out) i = pick(rng);
  return out;
}

Batch ReplayBuffer::sample(Index n, Rng& rng) const {
  const auto idx = sample_indices(n, rng);
  return gather(idx);
}

Batch ReplayBuffer::gather(std::span<const Index> indices) const {
  const Index n = static_cast<Index>(indices.size());
  Batch b{Matrix(n, obs_dim_), Matrix(n, act_dim_), Vector(n), Matrix(n, obs_dim_), Vector(n)};
  for (Index r = 0; r < n; ++r) {
    const Transition& t = items_.at(static_cast<std::size_t>(indices[static_cast<std::size_t>(r)]));
    b.states.row(r) = t.state.transpose();
    b.actions.row(r) = t.action.transpose();
    b.rewards[r] = t.reward;
    b.next_states.row(r) = t.next_state.transpose();
    b.continues[r] = t.terminated ? 0.0 : 1.0;
  }
  return b;
}

const Transition& ReplayBuffer::at(Index i) const {
  if (i < 0 || i >= size()) throw ContractError("replay index out of range");
  // Once full, the cursor points at the oldest entry.
  const Index physical = size() < capacity_ ? i : (cursor_ + i) % capacity_;
  return items_[static_cast<std::size_t>(physical)];
}

std::vector<Transition> ReplayBuffer::snapshot() const {
  std::vector<Transition> out;
  out.reserve(items_.size());
  for (Index i = 0; i < size(); ++i) out.push_back(at(i));
  return out;
}

Batch ReplayBuffer::all() const {
  std::vector<Index> idx(items_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Index>(i);
  return gather(idx);
}

void InitialStateBuffer::push(const Vector& observation, const Vector& first_action) {
  if (observation.size() != obs_dim_) throw ContractError("initial state has the wrong dimension");
  states_.push_back(observation);
  actions_.push_back(first_action);
}

Matrix InitialStateBuffer::sample_states(Index n, Rng& rng) const {
  if (states_.empty()) throw ContractError("cannot sample from an empty initial-state buffer");
  std::uniform_int_distribution<std::size_t> pick(0, states_.size() - 1);
  Matrix out(n, obs_dim_);
  for (Index r = 0; r < n; ++r) out.row(r) = states_[pick(rng)].transpose();
  return out;
}

}  // namespace opirl
