#pragma once

#include <optional>

#include "opirl/numcore/adam.hpp"
#include "opirl/numcore/mlp.hpp"

namespace opirl {

/// Adversarial reward learner. The log-odds of "expert" for a transition is
///
///   logit(s, a, s') = r(s, a) + gamma g(s') - g(s) - log pi(a|s)
///
/// where r is the transferable reward and g a shaping potential used only
/// while training the classifier.
class Discriminator {
 public:
  Discriminator(Index obs_dim, Index act_dim, double gamma, const std::vector<Index>& reward_hidden,
                const std::vector<Index>& potential_hidden, Rng& rng, bool absorbing = false);
  Discriminator(Mlp reward, Mlp potential, double gamma, bool absorbing = false);

  /// With absorbing observations (indicator in the last column) the action
  /// input is zeroed, so r has a single value at the absorbing state.
  ad::Var reward(ad::Tape& tape, ad::Var states, ad::Var actions);
  ad::Var potential(ad::Tape& tape, ad::Var states);
  /// r(s, a) + gamma g(s') - g(s)
  ad::Var shaped(ad::Tape& tape, ad::Var states, ad::Var actions, ad::Var next_states);
  /// shaped - log pi, with log pi treated as data.
  ad::Var logit(ad::Tape& tape, ad::Var states, ad::Var actions, ad::Var next_states, const Vector& log_pi);

  Vector reward_values(const Matrix& states, const Matrix& actions) const;
  Vector logit_values(const Matrix& states, const Matrix& actions, const Matrix& next_states,
                      const Vector& log_pi) const;

  /// Per-row norm of the gradient of `shaped` with respect to the stacked
  /// input (s, a, s'), as graph nodes. Uses sqrt(sum + 1e-12).
  ad::Var input_gradient_norm(ad::Tape& tape, const Matrix& states, const Matrix& actions,
                              const Matrix& next_states);

  Mlp& reward_net() { return reward_; }
  const Mlp& reward_net() const { return reward_; }
  Mlp& potential_net() { return potential_; }
  std::vector<ad::Parameter*> parameter_ptrs(bool include_potential = true);
  void zero_grad();

  double gamma() const { return gamma_; }
  bool absorbing() const { return absorbing_; }
  Index obs_dim() const { return potential_.input_dim(); }
  Index act_dim() const { return reward_.input_dim() - potential_.input_dim(); }

 private:
  Matrix action_mask(const Matrix& states) const;

  Mlp reward_;
  Mlp potential_;
  double gamma_;
  bool absorbing_;
};

/// One side of the classification problem. Weights, when given, replace the
/// uniform 1/n average (they should sum to one).
struct LabeledBatch {
  Matrix states;
  Matrix actions;
  Matrix next_states;
  Vector log_pi;
  std::optional<Vector> weights;
};

struct DiscLossParts {
  ad::Var total;
  double expert_term = 0.0;
  double agent_term = 0.0;
  double penalty = 0.0;
};

/// -E_exp[log D] - E_agent[log(1 - D)] + gp_weight * penalty, written with
/// log-sigmoid so large logits never overflow. The penalty is evaluated on
/// per-sample interpolates of expert and agent inputs drawn with `rng`.
DiscLossParts disc_loss(ad::Tape& tape, Discriminator& d, const LabeledBatch& expert, const LabeledBatch& agent,
                        double gp_weight, Rng& rng);

/// Mean over rows of (||grad_x shaped(x)|| - 1)^2 at the given points.
ad::Var gradient_penalty(ad::Tape& tape, Discriminator& d, const Matrix& states, const Matrix& actions,
                         const Matrix& next_states);

/// Gradient step on the discriminator; returns the loss value.
double disc_update(Discriminator& d, AdamState& opt, const LabeledBatch& expert, const LabeledBatch& agent,
                   double gp_weight, Rng& rng, bool train_potential = true);

}  // namespace opirl
