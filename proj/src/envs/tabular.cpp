#include "opirl/envs/tabular.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "opirl/numcore/checkpoint.hpp"
#include "opirl/numcore/errors.hpp"

namespace opirl {

namespace {

constexpr double kRowTolerance = 1e-12;

void check_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& row, const std::string& what) {
  if ((row.array() < 0.0).any()) throw ContractError(what + " has a negative entry");
  if (std::abs(row.sum() - 1.0) > kRowTolerance) {
    throw ContractError(what + " sums to " + format_double(row.sum()) + ", expected 1");
  }
}

Vector dirichlet(Index n, Rng& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = g(rng);
  return v / v.sum();
}

}  // namespace

void TabularMDP::validate() const {
  if (n_states < 1 || n_states > kMaxStates) {
    throw ContractError("tabular MDP: n-states must be in [1, " + std::to_string(kMaxStates) + "]");
  }
  if (n_actions < 1 || n_actions > kMaxActions) {
    throw ContractError("tabular MDP: n-actions must be in [1, " + std::to_string(kMaxActions) + "]");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ContractError("tabular MDP: gamma must lie in (0, 1)");
  if (transition.rows() != n_states * n_actions || transition.cols() != n_states) {
    throw DimensionError("tabular MDP: transition table is " + shape_string(transition));
  }
  if (reward.rows() != n_states || reward.cols() != n_actions) {
    throw DimensionError("tabular MDP: reward table is " + shape_string(reward));
  }
  if (initial.size() != n_states) throw DimensionError("tabular MDP: initial distribution has wrong size");
  if (!reward.allFinite()) throw ContractError("tabular MDP: non-finite reward");
  check_distribution(initial.transpose(), "tabular MDP: initial distribution");
  for (Index s = 0; s < n_states; ++s) {
    for (Index a = 0; a < n_actions; ++a) {
      check_distribution(transition.row(s * n_actions + a),
                         "tabular MDP: P(.|" + std::to_string(s) + "," + std::to_string(a) + ")");
    }
  }
}

TabularMDP TabularMDP::random(Index n_states, Index n_actions, double gamma, Rng& rng) {
  TabularMDP mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.transition.resize(n_states * n_actions, n_states);
  for (Index i = 0; i < mdp.transition.rows(); ++i) mdp.transition.row(i) = dirichlet(n_states, rng).transpose();
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  mdp.reward.resize(n_states, n_actions);
  for (Index i = 0; i < mdp.reward.size(); ++i) mdp.reward.data()[i] = uni(rng);
  mdp.initial = dirichlet(n_states, rng);
  mdp.validate();
  return mdp;
}

TabularMDP load_tabular_mdp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::pair<std::string, std::size_t>> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.emplace_back(tok, lineno);
  }
  std::size_t pos = 0;
  auto next = [&]() -> double {
    if (pos >= tokens.size()) throw ParseError(lineno, "unexpected end of tabular MDP file");
    const auto& [tok, at] = tokens[pos++];
    return parse_double(tok, at);
  };
  auto next_count = [&]() -> Index {
    const std::size_t at = pos < tokens.size() ? tokens[pos].second : lineno;
    const double v = next();
    if (v != std::floor(v) || v < 1) throw ParseError(at, "expected a positive integer count");
    return static_cast<Index>(v);
  };

  TabularMDP mdp;
  mdp.n_states = next_count();
  mdp.n_actions = next_count();
  if (mdp.n_states > TabularMDP::kMaxStates || mdp.n_actions > TabularMDP::kMaxActions) {
    throw SchemaError("tabular MDP exceeds " + std::to_string(TabularMDP::kMaxStates) + " states x " +
                      std::to_string(TabularMDP::kMaxActions) + " actions");
  }
  mdp.gamma = next();
  mdp.initial.resize(mdp.n_states);
  for (Index s = 0; s < mdp.n_states; ++s) mdp.initial[s] = next();
  mdp.transition.resize(mdp.n_states * mdp.n_actions, mdp.n_states);
  for (Index i = 0; i < mdp.transition.size(); ++i) mdp.transition.data()[i] = next();
  mdp.reward.resize(mdp.n_states, mdp.n_actions);
  for (Index i = 0; i < mdp.reward.size(); ++i) mdp.reward.data()[i] = next();
  if (pos != tokens.size()) throw ParseError(tokens[pos].second, "trailing data in tabular MDP file");
  mdp.validate();
  return mdp;
}

void save_tabular_mdp(const std::filesystem::path& path, const TabularMDP& mdp) {
  mdp.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  auto write_row = [&](const auto& row) {
    for (Index i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_double(row[i]);
    out << "\n";
  };
  out << "# n-states n-actions\n" << mdp.n_states << " " << mdp.n_actions << "\n";
  out << "# gamma\n" << format_double(mdp.gamma) << "\n";
  out << "# initial distribution\n";
  write_row(mdp.initial);
  out << "# P(s' | s, a), one row per (s, a)\n";
  for (Index i = 0; i < mdp.transition.rows(); ++i) write_row(mdp.transition.row(i));
  out << "# r(s, a), one row per state\n";
  for (Index s = 0; s < mdp.n_states; ++s) write_row(mdp.reward.row(s));
}

Matrix policy_transition(const TabularMDP& mdp, const Matrix& policy) {
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions) {
    throw DimensionError("policy " + shape_string(policy) + " does not match MDP (" +
                         std::to_string(mdp.n_states) + "x" + std::to_string(mdp.n_actions) + ")");
  }
  for (Index s = 0; s < mdp.n_states; ++s) check_distribution(policy.row(s), "policy row " + std::to_string(s));
  Matrix p_pi = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (Index s = 0; s < mdp.n_states; ++s) {
    for (Index a = 0; a < mdp.n_actions; ++a) p_pi.row(s) += policy(s, a) * mdp.transition.row(s * mdp.n_actions + a);
  }
  return p_pi;
}

Matrix occupancy(const TabularMDP& mdp, const Matrix& policy) {
  const Matrix p_pi = policy_transition(mdp, policy);
  const Matrix system = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * p_pi.transpose();
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw NumericalError("occupancy: singular linear system");
  const Vector d = lu.solve(((1.0 - mdp.gamma) * mdp.initial).eval());
  if (!d.allFinite()) throw NumericalError("occupancy: non-finite solution");
  Matrix rho(mdp.n_states, mdp.n_actions);
  for (Index s = 0; s < mdp.n_states; ++s) rho.row(s) = d[s] * policy.row(s);
  return rho;
}

Matrix policy_q_values(const TabularMDP& mdp, const Matrix& policy) {
  const Matrix p_pi = policy_transition(mdp, policy);
  const Vector r_pi = mdp.reward.cwiseProduct(policy).rowwise().sum();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * p_pi);
  if (!lu.isInvertible()) throw NumericalError("policy evaluation: singular linear system");
  const Vector v = lu.solve(r_pi);
  Matrix q(mdp.n_states, mdp.n_actions);
  for (Index s = 0; s < mdp.n_states; ++s) {
    for (Index a = 0; a < mdp.n_actions; ++a) {
      q(s, a) = mdp.reward(s, a) + mdp.gamma * mdp.transition.row(s * mdp.n_actions + a).dot(v.transpose());
    }
  }
  return q;
}

TabularEnv::TabularEnv(TabularMDP mdp, std::string id, int horizon)
    : mdp_(std::move(mdp)), id_(std::move(id)), horizon_(horizon) {
  mdp_.validate();
  if (horizon_ < 1) throw ContractError("tabular env: horizon must be at least 1");
}

Vector TabularEnv::one_hot(Index s) const {
  Vector v = Vector::Zero(mdp_.n_states);
  v[s] = 1.0;
  return v;
}

namespace {

Index sample_index(const Eigen::Ref<const Eigen::RowVectorXd>& probs, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  double acc = 0.0;
  Index last = 0;
  for (Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace

Vector TabularEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = sample_index(mdp_.initial.transpose(), rng_);
  t_ = 0;
  done_ = false;
  return one_hot(state_);
}

StepResult TabularEnv::step(const Vector& action) {
  if (done_) throw ContractError(id_ + ": step called on a finished episode; call reset first");
  if (action.size() != mdp_.n_actions) {
    throw DimensionError(id_ + ": action has " + std::to_string(action.size()) + " entries, expected " +
                         std::to_string(mdp_.n_actions));
  }
  Index a = 0;
  action.maxCoeff(&a);
  StepResult out;
  out.reward = mdp_.reward(state_, a);
  state_ = sample_index(mdp_.transition.row(state_ * mdp_.n_actions + a), rng_);
  ++t_;
  out.observation = one_hot(state_);
  out.truncated = t_ >= horizon_;
  done_ = out.truncated;
  return out;
}

}  // namespace opirl
