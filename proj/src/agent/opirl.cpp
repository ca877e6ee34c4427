#include "opirl/agent/opirl.hpp"

#include <cmath>

#include "opirl/envs/absorbing.hpp"
#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/seeding.hpp"

namespace opirl {

const char* bc_source_name(BcSource s) { return s == BcSource::Replay ? "replay" : "expert"; }

BcSource parse_bc_source(const std::string& name) {
  if (name == "replay") return BcSource::Replay;
  if (name == "expert") return BcSource::Expert;
  throw ContractError("bc_source must be 'replay' or 'expert', got '" + name + "'");
}

void OpirlConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractError(std::string("OPIRL config: ") + what);
  };
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(actor_lr > 0.0 && critic_lr > 0.0 && disc_lr > 0.0 && temperature_lr > 0.0,
          "learning rates must be positive");
  require(actor_j_weight >= 0.0, "actor_j_weight must be non-negative");
  require(!bc_weight || *bc_weight >= 0.0, "bc_weight must be non-negative");
  require(target_mix >= 0.0 && target_mix <= 1.0, "target_mix must lie in [0, 1]");
  require(gp_weight >= 0.0, "gp_weight must be non-negative");
  require(divergence_p > 1.0 && divergence_c > 0.0, "divergence generator needs p > 1 and c > 0");
  require(batch_size >= 1, "batch size must be positive");
  require(initial_eta > 0.0, "initial eta must be positive");
  require(total_steps >= 1 && warmup_steps >= 0 && irl_steps >= 0 && rl_steps >= 0,
          "step counts must be non-negative");
  require(eval_interval >= 1 && eval_episodes >= 1, "evaluation cadence must be positive");
  require(buffer_capacity >= 0, "buffer capacity must be non-negative");
}

Temperature::Temperature(double initial, double target_entropy, double learning_rate)
    : log_eta_{"log_eta", Matrix::Constant(1, 1, std::log(initial)), Matrix::Zero(1, 1)},
      target_entropy_(target_entropy),
      opt_(AdamOptions{.learning_rate = learning_rate}) {
  if (!(initial > 0.0)) throw ContractError("temperature must start positive");
}

double Temperature::eta() const { return std::exp(log_eta_.value(0, 0)); }

void Temperature::update(double mean_log_pi) {
  log_eta_.grad(0, 0) = gradient(mean_log_pi);
  ad::Parameter* p = &log_eta_;
  adam_step(std::span<ad::Parameter* const>(&p, 1), opt_);
}

ad::Var bellman_residual(ad::Tape& tape, const ResidualTerms& t, double eta, double gamma, double target_mix) {
  ad::Var next_value = target_mix * t.next_q + (1.0 - target_mix) * t.next_target_q;
  ad::Var bootstrap = gamma * (tape.constant(Matrix(t.continues)) * next_value);
  return t.reward - eta * t.next_log_pi + bootstrap - t.q;
}

ad::Var opirl_objective(ad::Var initial_q, ad::Var residual, const PNormGenerator& gen, double gamma) {
  return (1.0 - gamma) * ad::mean(initial_q) + ad::mean(gen.conjugate(residual));
}

ObjectiveParts build_objective(ad::Tape& tape, SquashedGaussianPolicy& policy, Mlp& critic, Mlp& target_critic,
                               const Batch& batch, const Matrix& initial_states, double eta, double gamma,
                               double target_mix, const PNormGenerator& gen, Rng& rng) {
  if (initial_states.rows() == 0) throw ContractError("initial-state set is empty");
  if (batch.size() == 0) throw ContractError("replay batch is empty");
  ad::Var s = tape.constant(batch.states);
  ad::Var s_next = tape.constant(batch.next_states);
  ad::Var s0 = tape.constant(initial_states);
  SquashedGaussianPolicy::Sample next = policy.rsample(tape, s_next, rng);
  SquashedGaussianPolicy::Sample init = policy.rsample(tape, s0, rng);
  ResidualTerms terms{tape.constant(Matrix(batch.rewards)),
                      critic.forward(tape, ad::concat_cols(s, tape.constant(batch.actions))),
                      critic.forward(tape, ad::concat_cols(s_next, next.action)),
                      target_critic.forward(tape, ad::concat_cols(s_next, next.action)),
                      next.log_prob,
                      batch.continues};
  ad::Var initial_q = critic.forward(tape, ad::concat_cols(s0, init.action));
  ad::Var residual = bellman_residual(tape, terms, eta, gamma, target_mix);
  return {opirl_objective(initial_q, residual, gen, gamma), residual, initial_q, next.log_prob};
}

namespace {

Matrix join(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

BcLoss bc_qfilter_loss(ad::Tape& tape, SquashedGaussianPolicy& policy, const Mlp& critic, const Matrix& states,
                       const Matrix& actions, bool use_filter, bool absorbing) {
  if (states.rows() != actions.rows() || states.rows() == 0) {
    throw DimensionError("cloning batch needs matching, non-empty states and actions");
  }
  ad::Var mean_action = policy.mean_action(tape, tape.constant(states));
  Vector mask = Vector::Ones(states.rows());
  if (use_filter) {
    const Vector q_policy = critic.predict(join(states, mean_action.value())).col(0);
    const Vector q_data = critic.predict(join(states, actions)).col(0);
    for (Index i = 0; i < mask.size(); ++i) mask[i] = q_policy[i] <= q_data[i] ? 1.0 : 0.0;
  }
  if (absorbing) {
    for (Index i = 0; i < mask.size(); ++i) {
      if (states(i, states.cols() - 1) == 1.0) mask[i] = 0.0;
    }
  }
  ad::Var gap = ad::row_sum(ad::square(mean_action - tape.constant(actions)));
  BcLoss out{ad::mean(tape.constant(Matrix(mask)) * gap), static_cast<Index>(mask.sum())};
  return out;
}

OpirlLearner::OpirlLearner(Index obs_dim, Index act_dim, const OpirlConfig& config, Rng& init_rng)
    : config_(config),
      gen_(config.generator()),
      policy_(obs_dim, act_dim, config.hidden, init_rng),
      critic_(Mlp::make("critic", obs_dim + act_dim, config.hidden, 1, init_rng)),
      target_critic_(critic_),
      disc_(obs_dim, act_dim, config.gamma, config.reward_hidden, config.potential_hidden, init_rng, config.absorbing),
      temperature_(config.initial_eta, config.target_entropy.value_or(-static_cast<double>(act_dim)),
                   config.temperature_lr),
      actor_opt_(AdamOptions{.learning_rate = config.actor_lr}),
      critic_opt_(AdamOptions{.learning_rate = config.critic_lr}),
      disc_opt_(AdamOptions{.learning_rate = config.disc_lr}) {
  config_.validate();
}

Vector OpirlLearner::discriminator_log_pi(const Matrix& states, const Matrix& actions) const {
  Vector lp = policy_.log_prob(states, actions);
  if (config_.absorbing) {
    for (Index i = 0; i < states.rows(); ++i) {
      if (states(i, states.cols() - 1) == 1.0) lp[i] = 0.0;
    }
  }
  return lp;
}

double OpirlLearner::discriminator_step(const Batch& expert, const Batch& agent, Rng& rng) {
  auto label = [&](const Batch& b) {
    return LabeledBatch{b.states, b.actions, b.next_states, discriminator_log_pi(b.states, b.actions), std::nullopt};
  };
  return disc_update(disc_, disc_opt_, label(expert), label(agent), config_.gp_weight, rng);
}

OpirlLearner::Stats OpirlLearner::rl_step(const Batch& batch, const Matrix& initial_states, const Batch* bc,
                                          Rng& rng) {
  Stats stats;
  stats.eta = temperature_.eta();
  ad::Tape tape;
  ObjectiveParts parts = build_objective(tape, policy_, critic_, target_critic_, batch, initial_states, stats.eta,
                                         config_.gamma, config_.target_mix, gen_, rng);
  policy_.net().zero_grad();
  critic_.zero_grad();
  target_critic_.zero_grad();
  tape.backward(parts.objective);
  stats.critic_j = parts.objective.item();
  stats.policy_j = -config_.actor_j_weight * stats.critic_j;
  stats.q_mean = parts.initial_q.value().mean();

  auto policy_params = policy_.net().parameter_ptrs();
  for (auto* p : policy_params) p->grad *= -config_.actor_j_weight;
  if (bc != nullptr) {
    ad::Tape bc_tape;
    BcLoss l = bc_qfilter_loss(bc_tape, policy_, critic_, bc->states, bc->actions, config_.use_qfilter,
                               config_.absorbing);
    stats.bc_loss = l.loss.item();
    bc_tape.backward(config_.effective_bc_weight() * l.loss);
  }
  const auto critic_params = critic_.parameter_ptrs();
  adam_step(critic_params, critic_opt_);
  adam_step(policy_params, actor_opt_);
  temperature_.update(parts.next_log_pi.value().mean());
  target_critic_.polyak_update(critic_, config_.tau);
  return stats;
}

std::vector<std::string> opirl_metric_columns() {
  return {"step", "episode-return-mean", "episode-return-std", "disc-loss", "critic-J",
          "policy-J", "bc-loss", "eta", "q-mean", "success-rate"};
}

namespace {

std::unique_ptr<Environment> prepare_env(const Environment& env, bool absorbing) {
  if (!absorbing) return env.clone();
  return std::make_unique<AbsorbingWrapper>(env.clone());
}

ObservationPipeline demo_pipeline(const TrajectorySet& demos, bool absorbing, bool normalize) {
  ObservationPipeline pipeline;
  pipeline.absorbing = absorbing;
  if (normalize) {
    RunningNormalizer norm(demos.obs_dim);
    for (const Episode& ep : demos.episodes) {
      for (const Vector& o : ep.observations) norm.update(o);
    }
    norm.freeze();
    pipeline.normalizer = norm;
  }
  return pipeline;
}

void check_finite(double v, std::int64_t step, const char* name) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string(name) + " is not finite at step " + std::to_string(step));
  }
}

}  // namespace

OpirlRun train_opirl(const Environment& base_env, const TrajectorySet& demos, const OpirlConfig& config,
                     std::uint64_t seed, const OpirlHooks& hooks) {
  config.validate();
  if (demos.episodes.empty()) throw SchemaError("demonstration set is empty");
  if (demos.obs_dim != base_env.observation_dim() || demos.act_dim != base_env.action_dim()) {
    throw SchemaError("demonstrations from '" + demos.env_id + "' (obs " + std::to_string(demos.obs_dim) + ", act " +
                      std::to_string(demos.act_dim) + ") do not fit '" + base_env.id() + "' (obs " +
                      std::to_string(base_env.observation_dim()) + ", act " +
                      std::to_string(base_env.action_dim()) + ")");
  }
  auto env = prepare_env(base_env, config.absorbing);
  const ObservationPipeline pipeline = demo_pipeline(demos, config.absorbing, config.normalize_observations);

  Rng init_rng(derive_seed(seed, "opirl-init"));
  Rng act_rng(derive_seed(seed, "opirl-act"));
  Rng sample_rng(derive_seed(seed, "opirl-sample"));
  Rng update_rng(derive_seed(seed, "opirl-update"));
  Rng disc_rng(derive_seed(seed, "opirl-disc"));
  const std::uint64_t reset_base = derive_seed(seed, "opirl-reset");
  const std::uint64_t eval_seed = derive_seed(seed, "opirl-eval");

  const Index obs_dim = env->observation_dim();
  const Index act_dim = env->action_dim();
  OpirlLearner learner(obs_dim, act_dim, config, init_rng);

  std::vector<Transition> expert_transitions;
  for (const Episode& ep : demos.episodes) {
    for (Transition t : episode_transitions(ep, env->horizon(), config.absorbing)) {
      t.state = pipeline.apply(t.state);
      t.next_state = pipeline.apply(t.next_state);
      expert_transitions.push_back(std::move(t));
    }
  }
  ReplayBuffer expert_buffer(static_cast<Index>(expert_transitions.size()), obs_dim, act_dim);
  for (Transition& t : expert_transitions) expert_buffer.push(std::move(t));

  const Index capacity = config.buffer_capacity > 0 ? config.buffer_capacity : 2 * config.total_steps;
  ReplayBuffer buffer(capacity, obs_dim, act_dim);
  InitialStateBuffer initial(obs_dim);

  MetricsTable metrics(opirl_metric_columns());
  EvalResult final_eval;
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::uint64_t episode = 0;
  Vector obs = env->reset(reset_base + episode);
  bool episode_start = true;

  OpirlLearner::Stats acc;
  double disc_acc = 0.0;
  int rl_count = 0, disc_count = 0;
  std::int64_t step = 1;
  for (; step <= config.total_steps; ++step) {
    const Vector state = pipeline.apply(obs);
    Vector action(act_dim);
    if (step <= config.warmup_steps) {
      for (Index i = 0; i < act_dim; ++i) action[i] = uniform(act_rng);
    } else {
      action = learner.policy().act(state, &act_rng);
    }
    if (episode_start) {
      initial.push(state, action);
      episode_start = false;
    }
    const StepResult r = env->step(action);
    const double cached_reward =
        learner.discriminator().reward_values(state.transpose(), action.transpose())[0];
    buffer.push({state, action, cached_reward, pipeline.apply(r.observation), r.terminated, r.truncated});
    obs = r.observation;
    if (env->done()) {
      obs = env->reset(reset_base + ++episode);
      episode_start = true;
    }

    if (step > config.warmup_steps && buffer.size() >= std::min<Index>(config.batch_size, capacity)) {
      for (int k = 0; k < config.irl_steps; ++k) {
        const double loss = learner.discriminator_step(expert_buffer.sample(config.batch_size, sample_rng),
                                                       buffer.sample(config.batch_size, sample_rng), disc_rng);
        check_finite(loss, step, "disc-loss");
        disc_acc += loss;
        ++disc_count;
      }
      for (int k = 0; k < config.rl_steps; ++k) {
        Batch batch = buffer.sample(config.batch_size, sample_rng);
        batch.rewards = learner.discriminator().reward_values(batch.states, batch.actions);
        const Matrix s0 = initial.sample_states(config.batch_size, sample_rng);
        Batch expert_bc;
        const Batch* bc = nullptr;
        if (config.use_bc) {
          if (config.bc_source == BcSource::Expert) {
            expert_bc = expert_buffer.sample(config.batch_size, sample_rng);
            bc = &expert_bc;
          } else {
            bc = &batch;
          }
        }
        const OpirlLearner::Stats s = learner.rl_step(batch, s0, bc, update_rng);
        check_finite(s.critic_j, step, "critic-J");
        check_finite(s.bc_loss, step, "bc-loss");
        acc.critic_j += s.critic_j;
        acc.policy_j += s.policy_j;
        acc.bc_loss += s.bc_loss;
        acc.q_mean += s.q_mean;
        ++rl_count;
      }
    }

    if (step % config.eval_interval == 0 || step == config.total_steps) {
      const EvalResult eval = evaluate_policy(*env, learner.policy(), pipeline, config.eval_episodes, eval_seed, true);
      const double n = rl_count > 0 ? rl_count : std::nan("");
      const double nd = disc_count > 0 ? disc_count : std::nan("");
      metrics.add_row({{"step", static_cast<double>(step)},
                       {"episode-return-mean", eval.mean},
                       {"episode-return-std", eval.stddev},
                       {"disc-loss", disc_acc / nd},
                       {"critic-J", acc.critic_j / n},
                       {"policy-J", acc.policy_j / n},
                       {"bc-loss", acc.bc_loss / n},
                       {"eta", learner.temperature().eta()},
                       {"q-mean", acc.q_mean / n},
                       {"success-rate", eval.success_rate}});
      acc = {};
      disc_acc = 0.0;
      rl_count = disc_count = 0;
      final_eval = eval;
      if (hooks.on_eval) hooks.on_eval(step, eval);
      if (config.stop_at_return && eval.mean >= *config.stop_at_return) break;
    }
  }
  return OpirlRun{learner.policy(),
                  RewardHandle(learner.discriminator(), pipeline, base_env.id()),
                  pipeline,
                  std::move(metrics),
                  final_eval,
                  std::min(step, config.total_steps)};
}

}  // namespace opirl
