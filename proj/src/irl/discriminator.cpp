#include "opirl/irl/discriminator.hpp"

#include "opirl/numcore/errors.hpp"

namespace opirl {

Discriminator::Discriminator(Index obs_dim, Index act_dim, double gamma, const std::vector<Index>& reward_hidden,
                             const std::vector<Index>& potential_hidden, Rng& rng, bool absorbing)
    : Discriminator(Mlp::make("reward", obs_dim + act_dim, reward_hidden, 1, rng),
                    Mlp::make("potential", obs_dim, potential_hidden, 1, rng), gamma, absorbing) {}

Discriminator::Discriminator(Mlp reward, Mlp potential, double gamma, bool absorbing)
    : reward_(std::move(reward)), potential_(std::move(potential)), gamma_(gamma), absorbing_(absorbing) {
  if (reward_.output_dim() != 1 || potential_.output_dim() != 1) {
    throw ContractError("discriminator networks must have a single output");
  }
  if (reward_.input_dim() <= potential_.input_dim()) {
    throw DimensionError("reward network input (" + std::to_string(reward_.input_dim()) +
                         ") must exceed the potential's state input (" + std::to_string(potential_.input_dim()) + ")");
  }
}

Matrix Discriminator::action_mask(const Matrix& states) const {
  Matrix mask = Matrix::Ones(states.rows(), 1);
  if (absorbing_) {
    for (Index i = 0; i < states.rows(); ++i) {
      if (states(i, states.cols() - 1) == 1.0) mask(i, 0) = 0.0;
    }
  }
  return mask;
}

ad::Var Discriminator::reward(ad::Tape& tape, ad::Var states, ad::Var actions) {
  if (absorbing_) actions = actions * tape.constant(action_mask(states.value()));
  return reward_.forward(tape, ad::concat_cols(states, actions));
}

ad::Var Discriminator::potential(ad::Tape& tape, ad::Var states) { return potential_.forward(tape, states); }

ad::Var Discriminator::shaped(ad::Tape& tape, ad::Var states, ad::Var actions, ad::Var next_states) {
  return reward(tape, states, actions) + gamma_ * potential(tape, next_states) - potential(tape, states);
}

ad::Var Discriminator::logit(ad::Tape& tape, ad::Var states, ad::Var actions, ad::Var next_states,
                             const Vector& log_pi) {
  if (log_pi.size() != states.rows()) throw DimensionError("log-pi column does not match the batch");
  return shaped(tape, states, actions, next_states) - tape.constant(Matrix(log_pi));
}

Vector Discriminator::reward_values(const Matrix& states, const Matrix& actions) const {
  Matrix sa(states.rows(), states.cols() + actions.cols());
  Matrix a = actions;
  if (absorbing_) a.array().colwise() *= action_mask(states).col(0).array();
  sa << states, a;
  return reward_.predict(sa).col(0);
}

Vector Discriminator::logit_values(const Matrix& states, const Matrix& actions, const Matrix& next_states,
                                   const Vector& log_pi) const {
  return reward_values(states, actions) + gamma_ * potential_.predict(next_states).col(0) -
         potential_.predict(states).col(0) - log_pi;
}

ad::Var Discriminator::input_gradient_norm(ad::Tape& tape, const Matrix& states, const Matrix& actions,
                                           const Matrix& next_states) {
  const Index ds = states.cols(), da = actions.cols();
  const Matrix mask = action_mask(states);
  Matrix sa(states.rows(), ds + da);
  sa << states, (actions.array().colwise() * mask.col(0).array()).matrix();
  ad::Var grad_r = reward_.input_gradient(tape, tape.constant(sa));
  ad::Var grad_s = ad::slice_cols(grad_r, 0, ds) - potential_.input_gradient(tape, tape.constant(states));
  ad::Var grad_a = ad::slice_cols(grad_r, ds, da) * tape.constant(mask);
  ad::Var grad_next = gamma_ * potential_.input_gradient(tape, tape.constant(next_states));
  ad::Var sq = ad::row_sum(ad::square(grad_s)) + ad::row_sum(ad::square(grad_a)) + ad::row_sum(ad::square(grad_next));
  return ad::sqrt(sq + 1e-12);
}

std::vector<ad::Parameter*> Discriminator::parameter_ptrs(bool include_potential) {
  std::vector<ad::Parameter*> out = reward_.parameter_ptrs();
  if (include_potential) {
    for (auto* p : potential_.parameter_ptrs()) out.push_back(p);
  }
  return out;
}

void Discriminator::zero_grad() {
  reward_.zero_grad();
  potential_.zero_grad();
}

ad::Var gradient_penalty(ad::Tape& tape, Discriminator& d, const Matrix& states, const Matrix& actions,
                         const Matrix& next_states) {
  return ad::mean(ad::square(d.input_gradient_norm(tape, states, actions, next_states) - 1.0));
}

namespace {

ad::Var weighted_mean(ad::Tape& tape, ad::Var column, const std::optional<Vector>& weights) {
  if (!weights) return ad::mean(column);
  if (weights->size() != column.rows()) throw DimensionError("sample weights do not match the batch");
  return ad::sum(tape.constant(Matrix(*weights)) * column);
}

void check_batch(const LabeledBatch& b, const char* side) {
  const Index n = b.states.rows();
  if (n == 0) throw ContractError(std::string(side) + " batch is empty");
  if (b.actions.rows() != n || b.next_states.rows() != n || b.log_pi.size() != n) {
    throw DimensionError(std::string(side) + " batch fields have different row counts");
  }
}

}  // namespace

DiscLossParts disc_loss(ad::Tape& tape, Discriminator& d, const LabeledBatch& expert, const LabeledBatch& agent,
                        double gp_weight, Rng& rng) {
  check_batch(expert, "expert");
  check_batch(agent, "agent");
  ad::Var le = d.logit(tape, tape.constant(expert.states), tape.constant(expert.actions),
                       tape.constant(expert.next_states), expert.log_pi);
  ad::Var la = d.logit(tape, tape.constant(agent.states), tape.constant(agent.actions),
                       tape.constant(agent.next_states), agent.log_pi);
  ad::Var expert_term = weighted_mean(tape, ad::log_sigmoid(le), expert.weights);
  ad::Var agent_term = weighted_mean(tape, ad::log_sigmoid(-la), agent.weights);
  DiscLossParts out;
  out.expert_term = -expert_term.item();
  out.agent_term = -agent_term.item();
  out.total = -expert_term - agent_term;
  if (gp_weight > 0.0) {
    const Index n = expert.states.rows();
    if (agent.states.rows() != n) throw ContractError("gradient penalty needs equally sized expert and agent batches");
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Vector u(n);
    for (Index i = 0; i < n; ++i) u[i] = uni(rng);
    auto mix = [&](const Matrix& x, const Matrix& y) -> Matrix {
      return (x.array().colwise() * u.array() + y.array().colwise() * (1.0 - u.array())).matrix();
    };
    ad::Var gp = gradient_penalty(tape, d, mix(expert.states, agent.states), mix(expert.actions, agent.actions),
                                  mix(expert.next_states, agent.next_states));
    out.penalty = gp.item();
    out.total = out.total + gp_weight * gp;
  }
  return out;
}

double disc_update(Discriminator& d, AdamState& opt, const LabeledBatch& expert, const LabeledBatch& agent,
                   double gp_weight, Rng& rng, bool train_potential) {
  ad::Tape tape;
  DiscLossParts parts = disc_loss(tape, d, expert, agent, gp_weight, rng);
  d.zero_grad();
  tape.backward(parts.total);
  const auto params = d.parameter_ptrs(train_potential);
  adam_step(params, opt);
  return parts.total.item();
}

}  // namespace opirl
