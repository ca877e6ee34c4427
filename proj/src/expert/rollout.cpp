#include "opirl/expert/rollout.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/seeding.hpp"

namespace opirl {

Episode rollout_episode(Environment& env, const SquashedGaussianPolicy& policy, const ObservationPipeline& pipeline,
                        std::uint64_t reset_seed, Rng* action_rng, bool* success) {
  Episode ep;
  Vector obs = env.reset(reset_seed);
  ep.observations.push_back(obs);
  bool reached = false;
  while (!env.done()) {
    const Vector action = policy.act(pipeline.apply(obs), action_rng);
    const StepResult r = env.step(action);
    ep.actions.push_back(action);
    ep.rewards.push_back(r.reward);
    ep.observations.push_back(r.observation);
    reached = reached || r.success;
    ep.terminated = r.terminated;
    obs = r.observation;
  }
  if (success) *success = reached;
  return ep;
}

EvalResult evaluate_policy(const Environment& env, const SquashedGaussianPolicy& policy,
                           const ObservationPipeline& pipeline, int episodes, std::uint64_t seed, bool deterministic) {
  if (episodes < 1) throw ContractError("evaluation needs at least one episode");
  auto local = env.clone();
  Rng action_rng(derive_seed(seed, "eval-actions"));
  EvalResult out;
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    bool success = false;
    const Episode ep = rollout_episode(*local, policy, pipeline, derive_seed(seed + static_cast<std::uint64_t>(e), "eval-reset"),
                                       deterministic ? nullptr : &action_rng, &success);
    out.returns.push_back(ep.total_return());
    successes += success;
  }
  double sum = 0.0;
  for (double r : out.returns) sum += r;
  out.mean = sum / episodes;
  double sq = 0.0;
  for (double r : out.returns) sq += (r - out.mean) * (r - out.mean);
  out.stddev = std::sqrt(sq / episodes);
  out.success_rate = static_cast<double>(successes) / episodes;
  return out;
}

TrajectorySet collect_trajectories(const Environment& env, const SquashedGaussianPolicy& policy, int episodes,
                                   std::uint64_t seed, bool deterministic) {
  if (episodes < 1) throw ContractError("collect needs at least one episode");
  if (policy.obs_dim() != env.observation_dim() || policy.act_dim() != env.action_dim()) {
    throw SchemaError("policy expects obs/act dims " + std::to_string(policy.obs_dim()) + "/" +
                      std::to_string(policy.act_dim()) + " but " + env.id() + " has " +
                      std::to_string(env.observation_dim()) + "/" + std::to_string(env.action_dim()));
  }
  auto local = env.clone();
  Rng action_rng(derive_seed(seed, "collect-actions"));
  TrajectorySet set;
  set.obs_dim = env.observation_dim();
  set.act_dim = env.action_dim();
  set.env_id = env.id();
  const ObservationPipeline identity;
  for (int e = 0; e < episodes; ++e) {
    set.episodes.push_back(rollout_episode(*local, policy, identity,
                                           derive_seed(seed + static_cast<std::uint64_t>(e), "collect-reset"),
                                           deterministic ? nullptr : &action_rng));
  }
  return set;
}

}  // namespace opirl
