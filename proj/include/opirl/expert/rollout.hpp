#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opirl/envs/environment.hpp"
#include "opirl/envs/pipeline.hpp"
#include "opirl/expert/policy.hpp"
#include "opirl/replay/trajectory.hpp"

namespace opirl {

struct EvalResult {
  std::vector<double> returns;
  double mean = 0.0;
  double stddev = 0.0;
  double success_rate = 0.0;
};

/// Runs one episode from reset(seed). Observations recorded are the
/// environment's own; the policy sees them through the pipeline. A null
/// action_rng gives the deterministic policy.
Episode rollout_episode(Environment& env, const SquashedGaussianPolicy& policy, const ObservationPipeline& pipeline,
                        std::uint64_t reset_seed, Rng* action_rng, bool* success = nullptr);

/// Ground-truth returns over `episodes` episodes on a copy of env.
EvalResult evaluate_policy(const Environment& env, const SquashedGaussianPolicy& policy,
                           const ObservationPipeline& pipeline, int episodes, std::uint64_t seed,
                           bool deterministic = true);

/// Demonstration episodes for `collect`; dimensions are checked against env.
TrajectorySet collect_trajectories(const Environment& env, const SquashedGaussianPolicy& policy, int episodes,
                                   std::uint64_t seed, bool deterministic);

}  // namespace opirl
