#pragma once

#include <cstdint>

#include "opirl/envs/environment.hpp"
#include "opirl/expert/sac.hpp"
#include "opirl/irl/reward_handle.hpp"

namespace opirl {

/// Trains a fresh SAC agent on `target` (unwrapped) with the frozen learned
/// reward in place of the environment's. The handle's observation pipeline
/// and absorbing convention carry over. Evaluation uses the target's
/// ground-truth reward. SchemaError naming both environments when the
/// handle's dimensions do not fit.
SacRun transfer_reward(const RewardHandle& reward, const Environment& target, const SacConfig& config,
                       std::uint64_t seed, const SacHooks& hooks = {});

/// Evaluates a policy unchanged on another environment.
EvalResult evaluate_policy_transfer(const SquashedGaussianPolicy& policy, const ObservationPipeline& pipeline,
                                    const Environment& target, int episodes, std::uint64_t seed);

}  // namespace opirl
