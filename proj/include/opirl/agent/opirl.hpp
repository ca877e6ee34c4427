#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "opirl/divergence/pnorm.hpp"
#include "opirl/envs/environment.hpp"
#include "opirl/envs/pipeline.hpp"
#include "opirl/expert/policy.hpp"
#include "opirl/expert/rollout.hpp"
#include "opirl/irl/discriminator.hpp"
#include "opirl/irl/reward_handle.hpp"
#include "opirl/numcore/adam.hpp"
#include "opirl/numcore/metrics.hpp"
#include "opirl/replay/buffer.hpp"
#include "opirl/replay/trajectory.hpp"

namespace opirl {

/// Where behaviour-cloning targets are drawn from.
enum class BcSource { Replay, Expert };

const char* bc_source_name(BcSource s);
BcSource parse_bc_source(const std::string& name);

struct OpirlConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-5;
  double critic_lr = 1e-3;
  double disc_lr = 1e-5;
  double temperature_lr = 3e-4;
  /// Weight of the objective's gradient in the policy step.
  double actor_j_weight = 1e-3;
  /// Weight of the behaviour-cloning gradient; defaults to 1 / batch_size.
  std::optional<double> bc_weight;
  /// Share of the live critic in the bootstrapped next-state value.
  double target_mix = 0.05;
  double gp_weight = 10.0;
  double divergence_p = 1.5;
  double divergence_c = 2.0 / 3.0;
  Index batch_size = 256;
  std::vector<Index> hidden{256, 256};
  std::vector<Index> reward_hidden{64, 64};
  std::vector<Index> potential_hidden{64, 64};
  /// Defaults to -dim(A).
  std::optional<double> target_entropy;
  double initial_eta = 0.1;
  std::int64_t total_steps = 50000;
  std::int64_t warmup_steps = 1000;
  int irl_steps = 1;
  int rl_steps = 1;
  std::int64_t eval_interval = 5000;
  int eval_episodes = 20;
  /// 0 means twice the total number of steps.
  std::int64_t buffer_capacity = 0;
  bool use_bc = true;
  bool use_qfilter = true;
  BcSource bc_source = BcSource::Replay;
  bool absorbing = true;
  /// Standardise observations with statistics of the demonstrations.
  bool normalize_observations = true;
  /// Ends training at the first evaluation whose mean return reaches this value.
  std::optional<double> stop_at_return;

  double effective_bc_weight() const { return bc_weight.value_or(1.0 / static_cast<double>(batch_size)); }
  PNormGenerator generator() const { return PNormGenerator(divergence_p, divergence_c); }
  /// ContractError naming the offending field.
  void validate() const;
};

/// Learned entropy weight, kept in log space so it stays positive.
class Temperature {
 public:
  Temperature(double initial, double target_entropy, double learning_rate);

  double eta() const;
  double log_eta() const { return log_eta_.value(0, 0); }
  double target_entropy() const { return target_entropy_; }
  /// d/d(log eta) of -log_eta * (mean_log_pi + target), log pi held fixed.
  double gradient(double mean_log_pi) const { return -(mean_log_pi + target_entropy_); }
  void update(double mean_log_pi);

 private:
  ad::Parameter log_eta_;
  double target_entropy_;
  AdamState opt_;
};

/// Pieces of the residual
///   delta = r - eta log pi(a'|s') + gamma c [mix Q(s',a') + (1 - mix) Qbar(s',a')] - Q(s,a)
/// with c = 0 on terminal transitions. Every Var is an n x 1 column.
struct ResidualTerms {
  ad::Var reward;
  ad::Var q;
  ad::Var next_q;
  ad::Var next_target_q;
  ad::Var next_log_pi;
  Vector continues;
};

ad::Var bellman_residual(ad::Tape& tape, const ResidualTerms& t, double eta, double gamma, double target_mix);

/// (1 - gamma) mean Q(s0, a0) + mean f*(delta).
ad::Var opirl_objective(ad::Var initial_q, ad::Var residual, const PNormGenerator& gen, double gamma);

struct ObjectiveParts {
  ad::Var objective;
  ad::Var residual;
  ad::Var initial_q;
  /// log pi(a'|s') of the freshly drawn next actions.
  ad::Var next_log_pi;
};

/// Builds the objective for a replay batch (rewards already filled in) and a
/// set of initial states. Next actions and initial actions are drawn with
/// reparameterised noise, so the graph reaches the policy through both.
ObjectiveParts build_objective(ad::Tape& tape, SquashedGaussianPolicy& policy, Mlp& critic, Mlp& target_critic,
                               const Batch& batch, const Matrix& initial_states, double eta, double gamma,
                               double target_mix, const PNormGenerator& gen, Rng& rng);

struct BcLoss {
  ad::Var loss;
  /// Rows whose filter was open.
  Index open = 0;
};

/// mean_i m_i |tanh(mu(s_i)) - a_i|^2 with m_i = 1 when Q(s_i, tanh(mu(s_i))) <= Q(s_i, a_i)
/// (every m_i = 1 without the filter). Absorbing rows carry no action
/// information and are always masked out when `absorbing` is set.
BcLoss bc_qfilter_loss(ad::Tape& tape, SquashedGaussianPolicy& policy, const Mlp& critic, const Matrix& states,
                       const Matrix& actions, bool use_filter, bool absorbing = false);

/// Policy, critic with its Polyak target, temperature and discriminator
/// together with their optimisers.
class OpirlLearner {
 public:
  OpirlLearner(Index obs_dim, Index act_dim, const OpirlConfig& config, Rng& init_rng);

  struct Stats {
    double critic_j = 0.0;
    double policy_j = 0.0;
    double bc_loss = 0.0;
    double eta = 0.0;
    double q_mean = 0.0;
  };

  /// One discriminator step. log pi of both batches comes from the current
  /// policy; it is zero on absorbing rows, where actions are meaningless.
  double discriminator_step(const Batch& expert, const Batch& agent, Rng& rng);

  /// One critic step (descending the objective), one policy step (ascending
  /// it, plus the cloning term when `bc` is given), one temperature step and
  /// a Polyak update of the target critic.
  Stats rl_step(const Batch& batch, const Matrix& initial_states, const Batch* bc, Rng& rng);

  /// Tape-free log pi with the absorbing convention of discriminator_step.
  Vector discriminator_log_pi(const Matrix& states, const Matrix& actions) const;

  SquashedGaussianPolicy& policy() { return policy_; }
  const SquashedGaussianPolicy& policy() const { return policy_; }
  Mlp& critic() { return critic_; }
  Mlp& target_critic() { return target_critic_; }
  Discriminator& discriminator() { return disc_; }
  const Discriminator& discriminator() const { return disc_; }
  const Temperature& temperature() const { return temperature_; }
  const OpirlConfig& config() const { return config_; }

 private:
  OpirlConfig config_;
  PNormGenerator gen_;
  SquashedGaussianPolicy policy_;
  Mlp critic_;
  Mlp target_critic_;
  Discriminator disc_;
  Temperature temperature_;
  AdamState actor_opt_, critic_opt_, disc_opt_;
};

/// Columns of the OPIRL training curve.
std::vector<std::string> opirl_metric_columns();

struct OpirlHooks {
  std::function<void(std::int64_t step, const EvalResult&)> on_eval;
};

struct OpirlRun {
  SquashedGaussianPolicy policy;
  RewardHandle reward;
  ObservationPipeline pipeline;
  MetricsTable metrics;
  EvalResult final_eval;
  std::int64_t steps_run = 0;
};

/// Learns a reward and a policy from demonstrations on `env` (unwrapped; the
/// absorbing wrapper is added when configured). Evaluation uses the
/// deterministic policy and the ground-truth reward. Throws SchemaError when
/// the demonstrations do not fit env and NumericalError naming the step and
/// loss when a loss stops being finite.
OpirlRun train_opirl(const Environment& env, const TrajectorySet& demos, const OpirlConfig& config,
                     std::uint64_t seed, const OpirlHooks& hooks = {});

}  // namespace opirl
