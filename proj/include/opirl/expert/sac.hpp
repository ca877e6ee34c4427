#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "opirl/envs/environment.hpp"
#include "opirl/envs/pipeline.hpp"
#include "opirl/expert/policy.hpp"
#include "opirl/expert/rollout.hpp"
#include "opirl/numcore/adam.hpp"
#include "opirl/numcore/metrics.hpp"
#include "opirl/replay/buffer.hpp"

namespace opirl {

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;
  Index batch_size = 256;
  std::vector<Index> hidden{256, 256};
  /// Defaults to -dim(A).
  std::optional<double> target_entropy;
  double initial_alpha = 0.1;
  std::int64_t total_steps = 30000;
  /// Uniformly random actions before learning starts.
  std::int64_t warmup_steps = 1000;
  int updates_per_step = 1;
  std::int64_t eval_interval = 5000;
  int eval_episodes = 20;
  /// 0 means twice the total number of steps.
  std::int64_t buffer_capacity = 0;

  /// ContractError naming the offending field.
  void validate() const;
};

/// Twin-critic soft actor-critic with a learned temperature.
class SacAgent {
 public:
  SacAgent(Index obs_dim, Index act_dim, const SacConfig& config, Rng& init_rng);

  struct Stats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha = 0.0;
    double entropy = 0.0;
    double q_mean = 0.0;
  };

  /// One gradient step on critics, actor and temperature, then Polyak
  /// averaging of the target critics. Rewards are taken from the batch.
  Stats update(const Batch& batch, Rng& rng);

  /// r + gamma * continue * (min of target critics at (s', a') - alpha * log pi(a'|s')).
  Vector target_values(const Batch& batch, const Matrix& next_actions, const Vector& next_log_probs) const;

  double alpha() const;
  double target_entropy() const { return target_entropy_; }

  SquashedGaussianPolicy& policy() { return policy_; }
  const SquashedGaussianPolicy& policy() const { return policy_; }
  Mlp& critic(int i) { return i == 0 ? q1_ : q2_; }
  Mlp& target_critic(int i) { return i == 0 ? q1_target_ : q2_target_; }

 private:
  SacConfig config_;
  double target_entropy_;
  SquashedGaussianPolicy policy_;
  Mlp q1_, q2_, q1_target_, q2_target_;
  ad::Parameter log_alpha_;
  AdamState actor_opt_, critic_opt_, alpha_opt_;
};

/// Rewards recomputed when a batch is sampled, from stored (pipeline-mapped) states and actions.
using BatchRewardFn = std::function<Vector(const Matrix& states, const Matrix& actions)>;

struct SacHooks {
  /// Applied to every observation before it is stored or fed to a network.
  ObservationPipeline pipeline;
  /// Replaces the environment reward for learning when set.
  BatchRewardFn reward;
  /// Called after every periodic evaluation.
  std::function<void(std::int64_t step, const EvalResult&)> on_eval;
};

struct SacRun {
  SquashedGaussianPolicy policy;
  MetricsTable metrics;
  EvalResult final_eval;
};

/// Columns of the SAC training curve.
std::vector<std::string> sac_metric_columns();

/// Trains on a copy of env. Evaluation uses the deterministic policy and the
/// environment's ground-truth reward. Throws NumericalError on a non-finite loss.
SacRun train_sac(const Environment& env, const SacConfig& config, std::uint64_t seed, const SacHooks& hooks = {});

}  // namespace opirl
