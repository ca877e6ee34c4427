#include "opirl/oracle/verify.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "opirl/divergence/discrete.hpp"
#include "opirl/envs/tabular.hpp"
#include "opirl/irl/discriminator.hpp"
#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/seeding.hpp"

namespace opirl {

void VerificationReport::record(const std::string& description, double left, double right, double instance_gap,
                                std::optional<double> instance_tolerance) {
  if (instances == 0 || instance_gap > gap || std::isnan(instance_gap)) {
    instance = description;
    lhs = left;
    rhs = right;
    gap = instance_gap;
  }
  ++instances;
  if (!(instance_gap <= instance_tolerance.value_or(tolerance))) ++violations;
}

void VerificationReport::finish() { passed = instances > 0 && violations == 0; }

namespace {

Vector dirichlet(Index n, Rng& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = g(rng);
  return v / v.sum();
}

// Mixed with the uniform distribution so every ratio between two draws stays below 2n.
Vector bounded_simplex(Index n, Rng& rng) {
  Vector v = 0.5 * dirichlet(n, rng) + Vector::Constant(n, 0.5 / static_cast<double>(n));
  return v / v.sum();
}

std::string describe(const char* label, int index) { return std::string(label) + " #" + std::to_string(index); }

}  // namespace

VerificationReport verify_kl_upper_bound(int trials, Rng& rng) {
  if (trials < 1) throw ContractError("verify_kl_upper_bound needs at least one trial");
  VerificationReport rep;
  rep.check = "kl-upper-bound";
  rep.tolerance = 0.0;
  const PNormGenerator half_square(2.0, 0.5);
  auto check = [&](const std::string& what, const DiscreteDist& p, const DiscreteDist& q) {
    const double kl = kl_discrete(p, q);
    const double df = f_div_discrete(half_square, p, q);
    rep.record(what, kl, df, std::max(0.0, kl - df));
  };
  const DiscreteDist same{0.2, 0.3, 0.5};
  check("P = Q", same, same);
  check("P = (1 - 1e-9, 1e-9), Q uniform", DiscreteDist{1.0 - 1e-9, 1e-9}, DiscreteDist{0.5, 0.5});
  for (int t = 0; t < trials; ++t) {
    check(describe("random 8-point pair", t), DiscreteDist(dirichlet(8, rng)), DiscreteDist(dirichlet(8, rng)));
  }
  rep.finish();
  return rep;
}

VerificationReport verify_kl_decomposition(int trials, Rng& rng) {
  if (trials < 1) throw ContractError("verify_kl_decomposition needs at least one trial");
  VerificationReport rep;
  rep.check = "kl-decomposition";
  rep.tolerance = 1e-12;
  auto check = [&](const std::string& what, const Vector& pi, const Vector& expert, const Vector& replay) {
    for (Index i = 0; i < pi.size(); ++i) {
      if (pi[i] > 0.0 && (expert[i] <= 0.0 || replay[i] <= 0.0)) {
        ++rep.skipped;
        rep.notes.push_back(what + ": skipped, supports differ");
        return;
      }
    }
    const DiscreteDist p(pi), e(expert), r(replay);
    double cross = 0.0;
    for (Index i = 0; i < pi.size(); ++i) {
      if (pi[i] > 0.0) cross += pi[i] * std::log(replay[i] / expert[i]);
    }
    const double left = kl_discrete(p, e);
    const double right = cross + kl_discrete(p, r);
    rep.record(what, left, right, std::abs(left - right));
  };
  const Vector a{{0.1, 0.6, 0.3}}, b{{0.4, 0.4, 0.2}}, c{{0.25, 0.25, 0.5}};
  check("replay = expert", a, b, b);
  check("pi = replay", c, b, c);
  for (int t = 0; t < trials; ++t) {
    check(describe("random 8-point triple", t), dirichlet(8, rng), dirichlet(8, rng), dirichlet(8, rng));
  }
  rep.finish();
  return rep;
}

namespace {

// min over the grid x = -20 + k * 1e-3 of -p x + r f*(x).
double grid_minimum(const PNormGenerator& gen, double p, double r) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 40000; ++k) {
    const double x = -20.0 + 1e-3 * k;
    best = std::min(best, -p * x + r * gen.conjugate(x));
  }
  return best;
}

}  // namespace

VerificationReport verify_variational_form(int instances, Rng& rng) {
  if (instances < 1) throw ContractError("verify_variational_form needs at least one instance");
  VerificationReport rep;
  rep.check = "variational-form";
  rep.tolerance = 1e-3;
  auto check = [&](const std::string& what, const PNormGenerator& gen, const Vector& pi, const Vector& replay) {
    double grid = 0.0, attained = 0.0;
    for (Index i = 0; i < pi.size(); ++i) {
      grid += grid_minimum(gen, pi[i], replay[i]);
      const double x_star = gen.derivative(pi[i] / replay[i]);
      attained += -pi[i] * x_star + replay[i] * gen.conjugate(x_star);
    }
    const double target = -f_div_discrete(gen, DiscreteDist(pi), DiscreteDist(replay));
    rep.record(what + " (grid)", grid, target, std::abs(grid - target));
    rep.record(what + " (x* = f'(ratio))", attained, target, std::abs(attained - target));
  };
  const Vector even{{0.3, 0.3, 0.4}};
  check("pi = R, p = 2, c = 1/2", PNormGenerator(2.0, 0.5), even, even);
  check("one-point space", PNormGenerator::default_generator(), Vector::Ones(1), Vector::Ones(1));
  for (int t = 0; t < instances; ++t) {
    const Index n = 2 + t % 7;
    check(describe("random pair", t), PNormGenerator::default_generator(), bounded_simplex(n, rng),
          bounded_simplex(n, rng));
  }
  rep.finish();
  return rep;
}

VerificationReport verify_telescoping(int instances, Rng& rng) {
  if (instances < 1) throw ContractError("verify_telescoping needs at least one instance");
  VerificationReport rep;
  rep.check = "telescoping";
  rep.tolerance = 1e-8;
  auto check = [&](const std::string& what, const TabularMDP& mdp, const Matrix& pi, const Matrix& q) {
    const Matrix occ = occupancy(mdp, pi);
    // (B Q)(s, a) = r(s, a) + gamma sum_{s', a'} P(s'|s,a) pi(a'|s') Q(s', a')
    const Vector next_value = (pi.array() * q.array()).rowwise().sum().matrix();
    double left = 0.0, right = 0.0;
    for (Index s = 0; s < mdp.n_states; ++s) {
      for (Index a = 0; a < mdp.n_actions; ++a) {
        const double backup = mdp.reward(s, a) + mdp.gamma * mdp.transition.row(s * mdp.n_actions + a).dot(next_value);
        left += occ(s, a) * (mdp.reward(s, a) - (backup - q(s, a)));
        right += (1.0 - mdp.gamma) * mdp.initial[s] * pi(s, a) * q(s, a);
      }
    }
    rep.record(what, left, right, std::abs(left - right));
  };

  // Two-state deterministic cycle 0 -> 1 -> 0 started in 0.
  TabularMDP cycle;
  cycle.n_states = 2;
  cycle.n_actions = 1;
  cycle.gamma = 0.5;
  cycle.transition = Matrix(2, 2);
  cycle.transition << 0, 1, 1, 0;
  cycle.reward = Matrix(2, 1);
  cycle.reward << 1.0, -2.0;
  cycle.initial = Vector{{1.0, 0.0}};
  const Matrix one = Matrix::Ones(2, 1);
  const Matrix occ = occupancy(cycle, one);
  const double hand_gap = std::max(std::abs(occ(0, 0) - 2.0 / 3.0), std::abs(occ(1, 0) - 1.0 / 3.0));
  rep.record("two-state cycle occupancy vs (2/3, 1/3)", occ(0, 0), 2.0 / 3.0, hand_gap);
  check("two-state cycle, gamma 0.5", cycle, one, Matrix(Matrix{{3.0}, {-1.5}}));

  TabularMDP zero = cycle;
  zero.reward.setZero();
  check("Q = 0, r = 0", zero, one, Matrix::Zero(2, 1));

  const double gammas[] = {0.5, 0.9, 0.99};
  std::uniform_int_distribution<int> states(2, 8), actions(2, 4);
  std::normal_distribution<double> normal(0.0, 10.0);
  for (int t = 0; t < instances; ++t) {
    const TabularMDP mdp = TabularMDP::random(states(rng), actions(rng), gammas[t % 3], rng);
    Matrix pi(mdp.n_states, mdp.n_actions), q(mdp.n_states, mdp.n_actions);
    for (Index s = 0; s < mdp.n_states; ++s) pi.row(s) = dirichlet(mdp.n_actions, rng).transpose();
    for (Index i = 0; i < q.size(); ++i) q.data()[i] = normal(rng);
    std::ostringstream what;
    what << "random MDP #" << t << " (" << mdp.n_states << "x" << mdp.n_actions << ", gamma " << mdp.gamma << ")";
    check(what.str(), mdp, pi, q);
  }
  rep.finish();
  return rep;
}

namespace {

struct RatioFit {
  Vector logit;
  std::vector<double> loss_trace;
};

// Classifier over one-hot states with a single zero action; the policy is
// uniform on [-1, 1], so log pi = -log 2 everywhere. Expectations are exact.
RatioFit fit_ratio(const Vector& expert_mass, const Vector& replay_mass, std::uint64_t seed) {
  const Index n = expert_mass.size();
  Rng rng(seed);
  Discriminator d(n, 1, 0.99, {64}, {64}, rng);
  AdamState opt(AdamOptions{.learning_rate = 1e-2});
  const Matrix states = Matrix::Identity(n, n);
  const Vector log_pi = Vector::Constant(n, -std::log(2.0));
  const LabeledBatch e{states, Matrix::Zero(n, 1), states, log_pi, expert_mass};
  const LabeledBatch r{states, Matrix::Zero(n, 1), states, log_pi, replay_mass};
  RatioFit fit;
  for (int step = 0; step < 3000; ++step) {
    const double loss = disc_update(d, opt, e, r, 0.0, rng);
    if (step % 500 == 0) fit.loss_trace.push_back(loss);
  }
  fit.logit = d.logit_values(states, e.actions, states, log_pi);
  return fit;
}

}  // namespace

VerificationReport verify_discriminator_optimum(std::uint64_t seed) {
  VerificationReport rep;
  rep.check = "discriminator-optimum";
  rep.tolerance = 0.1;
  auto check = [&](const std::string& what, const Vector& expert, const Vector& replay, double tolerance) {
    const RatioFit fit = fit_ratio(expert, replay, derive_seed(seed, what));
    double worst = 0.0, left = 0.0, right = 0.0;
    for (Index i = 0; i < expert.size(); ++i) {
      if (expert[i] < 0.05 && replay[i] < 0.05) continue;
      const double target = std::log(expert[i] / replay[i]);
      const double err = std::abs(fit.logit[i] - target);
      if (err >= worst) {
        worst = err;
        left = fit.logit[i];
        right = target;
      }
    }
    rep.record(what, left, right, worst, tolerance);
    if (worst > tolerance) {
      std::ostringstream trace;
      trace << what << ": loss trace";
      for (double l : fit.loss_trace) trace << " " << l;
      rep.notes.push_back(trace.str());
    }
  };
  check("identical distributions", Vector::Constant(4, 0.25), Vector::Constant(4, 0.25), 0.05);
  check("two-point ratio 2", Vector{{2.0 / 3.0, 1.0 / 3.0}}, Vector{{1.0 / 3.0, 2.0 / 3.0}}, 0.1);
  Rng rng(derive_seed(seed, "discriminator-optimum-pair"));
  check("random 8-point pair", bounded_simplex(8, rng), bounded_simplex(8, rng), 0.1);
  rep.finish();
  return rep;
}

std::vector<VerificationReport> verify_all(std::uint64_t seed) {
  Rng kl_rng(derive_seed(seed, "kl-upper-bound"));
  Rng dec_rng(derive_seed(seed, "kl-decomposition"));
  Rng var_rng(derive_seed(seed, "variational-form"));
  Rng tel_rng(derive_seed(seed, "telescoping"));
  return {verify_kl_upper_bound(1000, kl_rng), verify_kl_decomposition(1000, dec_rng),
          verify_variational_form(50, var_rng), verify_telescoping(200, tel_rng),
          verify_discriminator_optimum(derive_seed(seed, "discriminator-optimum"))};
}

void print_report_table(std::ostream& out, const std::vector<VerificationReport>& reports) {
  out << std::left << std::setw(24) << "check" << std::setw(10) << "result" << std::setw(11) << "instances"
      << std::setw(14) << "max gap" << std::setw(12) << "tolerance" << "worst instance\n";
  for (const auto& r : reports) {
    std::ostringstream gap, tol;
    gap << std::setprecision(3) << r.gap;
    tol << std::setprecision(3) << r.tolerance;
    out << std::left << std::setw(24) << r.check << std::setw(10) << (r.passed ? "pass" : "FAIL") << std::setw(11)
        << r.instances << std::setw(14) << gap.str() << std::setw(12) << tol.str() << r.instance << "\n";
    for (const auto& n : r.notes) out << "    " << n << "\n";
  }
}

void write_report_json(const std::filesystem::path& path, const std::vector<VerificationReport>& reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) {
    doc.push_back({{"check", r.check},
                   {"instance", r.instance},
                   {"lhs", r.lhs},
                   {"rhs", r.rhs},
                   {"gap", r.gap},
                   {"tolerance", r.tolerance},
                   {"instances", r.instances},
                   {"violations", r.violations},
                   {"skipped", r.skipped},
                   {"notes", r.notes},
                   {"passed", r.passed}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

}  // namespace opirl
