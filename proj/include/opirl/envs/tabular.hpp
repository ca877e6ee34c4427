#pragma once

#include <filesystem>
#include <vector>

#include "opirl/divergence/discrete.hpp"
#include "opirl/envs/environment.hpp"

namespace opirl {

/// Finite MDP small enough for exact linear solves.
struct TabularMDP {
  static constexpr Index kMaxStates = 64;
  static constexpr Index kMaxActions = 8;

  Index n_states = 0;
  Index n_actions = 0;
  /// Row s * n_actions + a holds P(. | s, a).
  Matrix transition;
  /// n_states x n_actions.
  Matrix reward;
  Vector initial;
  double gamma = 0.9;

  double p(Index s, Index a, Index next) const { return transition(s * n_actions + a, next); }

  /// Throws ContractError naming the first violated constraint.
  void validate() const;

  /// Dirichlet(1) transitions and initial distribution, rewards uniform in [-1, 1].
  static TabularMDP random(Index n_states, Index n_actions, double gamma, Rng& rng);
};

/// Whitespace-separated: n-states n-actions, gamma, initial distribution,
/// then P rows ordered by (s, a) and the reward table row by state.
/// '#' starts a comment.
TabularMDP load_tabular_mdp(const std::filesystem::path& path);
void save_tabular_mdp(const std::filesystem::path& path, const TabularMDP& mdp);

/// State-to-state transition matrix under a stochastic policy (n_states x n_actions).
Matrix policy_transition(const TabularMDP& mdp, const Matrix& policy);

/// Normalised discounted state-action occupancy, solved exactly from
/// d = (1 - gamma) rho0 + gamma P_pi^T d.
Matrix occupancy(const TabularMDP& mdp, const Matrix& policy);

/// Q^pi of the (non-entropic) discounted return.
Matrix policy_q_values(const TabularMDP& mdp, const Matrix& policy);

/// Observations are one-hot states; the executed action is the argmax of the
/// action vector. Never terminates.
class TabularEnv final : public Environment {
 public:
  TabularEnv(TabularMDP mdp, std::string id, int horizon = 50);

  std::string id() const override { return id_; }
  Index observation_dim() const override { return mdp_.n_states; }
  Index action_dim() const override { return mdp_.n_actions; }
  int horizon() const override { return horizon_; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  bool done() const override { return done_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TabularEnv>(*this); }

  const TabularMDP& mdp() const { return mdp_; }
  Index state() const { return state_; }

 private:
  Vector one_hot(Index s) const;

  TabularMDP mdp_;
  std::string id_;
  int horizon_;
  Rng rng_;
  Index state_ = 0;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace opirl
