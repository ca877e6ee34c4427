#pragma once

#include <filesystem>
#include <string>

#include "opirl/envs/pipeline.hpp"
#include "opirl/irl/discriminator.hpp"

namespace opirl {

/// Frozen snapshot of the learned reward r(s, a) with the observation
/// pipeline it was trained behind. Later discriminator updates never reach it.
class RewardHandle {
 public:
  RewardHandle(const Discriminator& d, ObservationPipeline pipeline, std::string env_id);

  /// Rewards for raw environment observations.
  Vector operator()(const Matrix& raw_states, const Matrix& actions) const;
  /// Rewards for observations already passed through the pipeline.
  Vector evaluate_processed(const Matrix& states, const Matrix& actions) const;

  const ObservationPipeline& pipeline() const { return pipeline_; }
  const std::string& env_id() const { return env_id_; }
  /// Raw environment observation size (without the absorbing indicator).
  Index env_obs_dim() const { return reward_.input_dim() - act_dim_ - (absorbing_ ? 1 : 0); }
  Index act_dim() const { return act_dim_; }
  bool absorbing() const { return absorbing_; }

  void save(const std::filesystem::path& path) const;
  static RewardHandle load(const std::filesystem::path& path);

 private:
  RewardHandle(Mlp reward, Index act_dim, bool absorbing, ObservationPipeline pipeline, std::string env_id);

  Mlp reward_;
  Index act_dim_;
  bool absorbing_;
  ObservationPipeline pipeline_;
  std::string env_id_;
};

}  // namespace opirl
