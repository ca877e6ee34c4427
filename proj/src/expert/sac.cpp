#include "opirl/expert/sac.hpp"

#include <cmath>

#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/seeding.hpp"

namespace opirl {

void SacConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("SAC config: ") + what);
  };
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(actor_lr > 0.0 && critic_lr > 0.0 && alpha_lr > 0.0, "learning rates must be positive");
  require(batch_size >= 1, "batch size must be positive");
  require(!hidden.empty(), "at least one hidden layer is required");
  require(initial_alpha > 0.0, "initial alpha must be positive");
  require(total_steps >= 1 && warmup_steps >= 0 && updates_per_step >= 0, "step counts must be non-negative");
  require(eval_interval >= 1 && eval_episodes >= 1, "evaluation cadence must be positive");
  require(buffer_capacity >= 0, "buffer capacity must be non-negative");
}

SacAgent::SacAgent(Index obs_dim, Index act_dim, const SacConfig& config, Rng& init_rng)
    : config_(config),
      target_entropy_(config.target_entropy.value_or(-static_cast<double>(act_dim))),
      policy_(obs_dim, act_dim, config.hidden, init_rng),
      q1_(Mlp::make("q1", obs_dim + act_dim, config.hidden, 1, init_rng)),
      q2_(Mlp::make("q2", obs_dim + act_dim, config.hidden, 1, init_rng)),
      q1_target_(q1_),
      q2_target_(q2_),
      log_alpha_{"log_alpha", Matrix::Constant(1, 1, std::log(config.initial_alpha)), Matrix::Zero(1, 1)},
      actor_opt_(AdamOptions{.learning_rate = config.actor_lr}),
      critic_opt_(AdamOptions{.learning_rate = config.critic_lr}),
      alpha_opt_(AdamOptions{.learning_rate = config.alpha_lr}) {
  config_.validate();
}

double SacAgent::alpha() const { return std::exp(log_alpha_.value(0, 0)); }

namespace {

Matrix join(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

Vector SacAgent::target_values(const Batch& batch, const Matrix& next_actions, const Vector& next_log_probs) const {
  const Matrix sa = join(batch.next_states, next_actions);
  const Vector q = q1_target_.predict(sa).col(0).cwiseMin(q2_target_.predict(sa).col(0));
  return batch.rewards + config_.gamma * batch.continues.cwiseProduct(q - alpha() * next_log_probs);
}

SacAgent::Stats SacAgent::update(const Batch& batch, Rng& rng) {
  Stats stats;
  stats.alpha = alpha();

  // Critics.
  const auto [next_actions, next_log_probs] = policy_.sample(batch.next_states, rng);
  const Vector y = target_values(batch, next_actions, next_log_probs);
  {
    ad::Tape tape;
    ad::Var sa = tape.constant(join(batch.states, batch.actions));
    ad::Var target = tape.constant(y);
    ad::Var q1 = q1_.forward(tape, sa);
    ad::Var q2 = q2_.forward(tape, sa);
    ad::Var loss = ad::mean(ad::square(q1 - target)) + ad::mean(ad::square(q2 - target));
    stats.critic_loss = loss.item();
    stats.q_mean = q1.value().mean();
    q1_.zero_grad();
    q2_.zero_grad();
    tape.backward(loss);
    std::vector<ad::Parameter*> params = q1_.parameter_ptrs();
    for (auto* p : q2_.parameter_ptrs()) params.push_back(p);
    adam_step(params, critic_opt_);
  }

  // Actor and temperature.
  double mean_log_prob = 0.0;
  {
    ad::Tape tape;
    ad::Var s = tape.constant(batch.states);
    SquashedGaussianPolicy::Sample sample = policy_.rsample(tape, s, rng);
    ad::Var sa = ad::concat_cols(s, sample.action);
    ad::Var q1 = q1_.forward(tape, sa);
    ad::Var q2 = q2_.forward(tape, sa);
    const Matrix pick_first = (q1.value().array() <= q2.value().array()).cast<double>().matrix();
    ad::Var q_min = tape.constant(pick_first) * q1 + tape.constant(1.0 - pick_first.array()) * q2;
    ad::Var loss = ad::mean(stats.alpha * sample.log_prob - q_min);
    stats.actor_loss = loss.item();
    mean_log_prob = sample.log_prob.value().mean();
    policy_.net().zero_grad();
    tape.backward(loss);
    const auto params = policy_.net().parameter_ptrs();
    adam_step(params, actor_opt_);
  }
  stats.entropy = -mean_log_prob;
  // d/d(log alpha) of -log_alpha * (log pi + target entropy), log pi held fixed.
  log_alpha_.grad(0, 0) = -(mean_log_prob + target_entropy_);
  ad::Parameter* alpha_param = &log_alpha_;
  adam_step(std::span<ad::Parameter* const>(&alpha_param, 1), alpha_opt_);

  q1_target_.polyak_update(q1_, config_.tau);
  q2_target_.polyak_update(q2_, config_.tau);
  return stats;
}

std::vector<std::string> sac_metric_columns() {
  return {"step",        "episode-return-mean", "episode-return-std", "critic-loss", "actor-loss",
          "alpha",       "entropy",             "q-mean",             "success-rate"};
}

SacRun train_sac(const Environment& env_proto, const SacConfig& config, std::uint64_t seed, const SacHooks& hooks) {
  config.validate();
  auto env = env_proto.clone();
  Rng init_rng(derive_seed(seed, "sac-init"));
  Rng act_rng(derive_seed(seed, "sac-act"));
  Rng sample_rng(derive_seed(seed, "sac-sample"));
  Rng update_rng(derive_seed(seed, "sac-update"));
  const std::uint64_t reset_base = derive_seed(seed, "sac-reset");
  const std::uint64_t eval_seed = derive_seed(seed, "sac-eval");

  const Index obs_dim = env->observation_dim();
  const Index act_dim = env->action_dim();
  SacAgent agent(obs_dim, act_dim, config, init_rng);
  const Index capacity = config.buffer_capacity > 0 ? config.buffer_capacity : 2 * config.total_steps;
  ReplayBuffer buffer(capacity, obs_dim, act_dim);

  SacRun run;
  run.metrics = MetricsTable(sac_metric_columns());
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::uint64_t episode = 0;
  Vector obs = env->reset(reset_base + episode);

  SacAgent::Stats acc;
  int acc_count = 0;
  for (std::int64_t step = 1; step <= config.total_steps; ++step) {
    const Vector state = hooks.pipeline.apply(obs);
    Vector action(act_dim);
    if (step <= config.warmup_steps) {
      for (Index i = 0; i < act_dim; ++i) action[i] = uniform(act_rng);
    } else {
      action = agent.policy().act(state, &act_rng);
    }
    const StepResult r = env->step(action);
    buffer.push({state, action, r.reward, hooks.pipeline.apply(r.observation), r.terminated, r.truncated});
    obs = r.observation;
    if (env->done()) obs = env->reset(reset_base + ++episode);

    if (step > config.warmup_steps && buffer.size() >= std::min<Index>(config.batch_size, capacity)) {
      for (int u = 0; u < config.updates_per_step; ++u) {
        Batch batch = buffer.sample(config.batch_size, sample_rng);
        if (hooks.reward) batch.rewards = hooks.reward(batch.states, batch.actions);
        const SacAgent::Stats s = agent.update(batch, update_rng);
        if (!std::isfinite(s.critic_loss) || !std::isfinite(s.actor_loss)) {
          throw NumericalError("SAC diverged at step " + std::to_string(step) + ": " +
                               (std::isfinite(s.critic_loss) ? "actor" : "critic") + " loss is not finite");
        }
        acc.critic_loss += s.critic_loss;
        acc.actor_loss += s.actor_loss;
        acc.entropy += s.entropy;
        acc.q_mean += s.q_mean;
        ++acc_count;
      }
    }

    if (step % config.eval_interval == 0 || step == config.total_steps) {
      const EvalResult eval =
          evaluate_policy(*env, agent.policy(), hooks.pipeline, config.eval_episodes, eval_seed, true);
      const double n = acc_count > 0 ? acc_count : std::nan("");
      run.metrics.add_row({{"step", static_cast<double>(step)},
                           {"episode-return-mean", eval.mean},
                           {"episode-return-std", eval.stddev},
                           {"critic-loss", acc.critic_loss / n},
                           {"actor-loss", acc.actor_loss / n},
                           {"alpha", agent.alpha()},
                           {"entropy", acc.entropy / n},
                           {"q-mean", acc.q_mean / n},
                           {"success-rate", eval.success_rate}});
      acc = {};
      acc_count = 0;
      if (hooks.on_eval) hooks.on_eval(step, eval);
      run.final_eval = eval;
    }
  }
  run.policy = agent.policy();
  return run;
}

}  // namespace opirl
