#include "opirl/agent/transfer.hpp"

#include "opirl/envs/absorbing.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

namespace {

std::unique_ptr<Environment> prepare_env(const Environment& env, bool absorbing) {
  if (!absorbing) return env.clone();
  return std::make_unique<AbsorbingWrapper>(env.clone());
}

}  // namespace

SacRun transfer_reward(const RewardHandle& reward, const Environment& target, const SacConfig& config,
                       std::uint64_t seed, const SacHooks& hooks) {
  if (reward.env_obs_dim() != target.observation_dim() || reward.act_dim() != target.action_dim()) {
    throw SchemaError("reward learned on '" + reward.env_id() + "' (obs " + std::to_string(reward.env_obs_dim()) +
                      ", act " + std::to_string(reward.act_dim()) + ") does not fit '" + target.id() + "' (obs " +
                      std::to_string(target.observation_dim()) + ", act " + std::to_string(target.action_dim()) +
                      ")");
  }
  auto env = prepare_env(target, reward.absorbing());
  SacHooks h = hooks;
  h.pipeline = reward.pipeline();
  h.reward = [&reward](const Matrix& states, const Matrix& actions) {
    return reward.evaluate_processed(states, actions);
  };
  return train_sac(*env, config, seed, h);
}

EvalResult evaluate_policy_transfer(const SquashedGaussianPolicy& policy, const ObservationPipeline& pipeline,
                                    const Environment& target, int episodes, std::uint64_t seed) {
  auto env = prepare_env(target, pipeline.absorbing);
  if (env->observation_dim() != policy.obs_dim() || env->action_dim() != policy.act_dim()) {
    throw SchemaError("policy (obs " + std::to_string(policy.obs_dim()) + ") does not fit '" + target.id() + "'");
  }
  return evaluate_policy(*env, policy, pipeline, episodes, seed, true);
}

}  // namespace opirl
