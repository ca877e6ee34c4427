#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "opirl/envs/line_env.hpp"
#include "opirl/envs/point_maze.hpp"
#include "opirl/envs/tabular.hpp"
#include "opirl/expert/policy.hpp"
#include "opirl/expert/rollout.hpp"
#include "opirl/expert/sac.hpp"
#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/gradcheck.hpp"
#include "opirl/replay/trajectory.hpp"

namespace opirl {
namespace {

SacConfig desk_config(std::int64_t steps) {
  SacConfig c;
  c.hidden = {64, 64};
  c.batch_size = 64;
  c.total_steps = steps;
  c.eval_interval = steps;
  return c;
}

// Single-observation policy whose heads are constant: mean mu, log-std ls.
SquashedGaussianPolicy constant_policy(double mu, double log_std) {
  Rng rng(0);
  SquashedGaussianPolicy policy(1, 1, {4}, rng);
  for (auto& p : policy.net().parameters()) p.value.setZero();
  policy.net().bias(1).value << mu, log_std;
  return policy;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("opirl_expert_test_" + name);
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(SampleAction, TinyStdIsDeterministicTanhMean) {
  const SquashedGaussianPolicy policy = constant_policy(0.7, -10.0);
  Rng rng(1);
  const Matrix obs = Matrix::Zero(100, 1);
  const auto [actions, log_probs] = policy.sample(obs, rng);
  EXPECT_LT((actions.array() - std::tanh(0.7)).abs().maxCoeff(), 1e-4);
  EXPECT_NEAR(policy.deterministic(obs)(0, 0), std::tanh(0.7), 1e-15);
  EXPECT_TRUE(log_probs.allFinite());
}

TEST(SampleAction, LogStdIsClamped) {
  const SquashedGaussianPolicy wide = constant_policy(0.0, 50.0);
  const SquashedGaussianPolicy narrow = constant_policy(0.0, -50.0);
  const Matrix obs = Matrix::Zero(1, 1);
  const Matrix a = Matrix::Constant(1, 1, 0.3);
  EXPECT_NEAR(wide.log_prob(obs, a)[0], constant_policy(0.0, 2.0).log_prob(obs, a)[0], 1e-12);
  EXPECT_NEAR(narrow.log_prob(obs, Matrix::Zero(1, 1))[0],
              constant_policy(0.0, -10.0).log_prob(obs, Matrix::Zero(1, 1))[0], 1e-12);
}

TEST(SampleAction, SymmetricPolicyHasZeroMeanAction) {
  const SquashedGaussianPolicy policy = constant_policy(0.0, 0.0);
  Rng rng(2);
  const auto [actions, log_probs] = policy.sample(Matrix::Zero(100000, 1), rng);
  EXPECT_LT(std::abs(actions.mean()), 0.02);
  EXPECT_LT(actions.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_TRUE(log_probs.allFinite());
}

TEST(SampleAction, LogDensityMatchesHistogram) {
  const SquashedGaussianPolicy policy = constant_policy(0.4, -0.5);
  Rng rng(3);
  const int n = 1000000;
  const int bins = 100;
  const auto [actions, log_probs] = policy.sample(Matrix::Zero(n, 1), rng);
  std::vector<double> counts(bins, 0.0);
  for (Index i = 0; i < n; ++i) {
    const int b = std::min(bins - 1, static_cast<int>((actions(i, 0) + 1.0) / 2.0 * bins));
    counts[static_cast<std::size_t>(b)] += 1.0;
  }
  // Model mass per bin by Simpson integration of exp(log_prob).
  double kl = 0.0;
  const double width = 2.0 / bins;
  for (int b = 0; b < bins; ++b) {
    const double lo = -1.0 + b * width;
    const int pieces = 20;
    double mass = 0.0;
    for (int k = 0; k <= pieces; ++k) {
      const double x = std::clamp(lo + width * k / pieces, -1.0 + 1e-9, 1.0 - 1e-9);
      const double w = (k == 0 || k == pieces) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      mass += w * std::exp(policy.log_prob(Matrix::Zero(1, 1), Matrix::Constant(1, 1, x))[0]);
    }
    mass *= width / pieces / 3.0;
    const double p = counts[static_cast<std::size_t>(b)] / n;
    if (p > 0.0) kl += p * std::log(p / std::max(mass, 1e-300));
  }
  EXPECT_LT(kl, 0.01);
}

TEST(SampleAction, TapeSampleMatchesTapeFreeDensity) {
  Rng rng(4);
  SquashedGaussianPolicy policy(3, 2, {8, 8}, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix obs(5, 3);
  for (Index i = 0; i < obs.size(); ++i) obs.data()[i] = normal(rng);
  const Matrix noise = policy.standard_noise(5, rng);
  ad::Tape tape;
  const auto s = policy.rsample(tape, tape.constant(obs), noise);
  const Vector tape_free = policy.log_prob(obs, s.action.value());
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(s.log_prob.value()(i, 0), tape_free[i], 1e-6);
}

TEST(SampleAction, ReparameterisedGradientsMatchFiniteDifferences) {
  Rng rng(5);
  SquashedGaussianPolicy policy(3, 2, {8}, rng, "pi");
  for (auto& p : policy.net().parameters()) {
    for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = 0.3 * std::normal_distribution<double>()(rng);
  }
  Matrix obs = Matrix::Random(4, 3);
  const Matrix noise = policy.standard_noise(4, rng);
  auto params = policy.net().parameter_ptrs();
  const double err = finite_diff_check(params, [&](ad::Tape& tape) {
    const auto s = policy.rsample(tape, tape.constant(obs), noise);
    return ad::sum(s.log_prob) + ad::sum(s.action);
  }, 1e-5);
  EXPECT_LT(err, 1e-4);
}

TEST(SacAgent, TargetUsesMinimumOfTwinCritics) {
  Rng rng(6);
  SacConfig config = desk_config(10);
  SacAgent agent(2, 1, config, rng);
  for (int i = 0; i < 2; ++i) {
    Mlp& t = agent.target_critic(i);
    const std::size_t last = t.num_layers() - 1;
    t.weight(last).value.setZero();
    t.bias(last).value.setConstant(i == 0 ? 3.0 : -2.0);
  }
  Batch batch{Matrix::Zero(3, 2), Matrix::Zero(3, 1), Vector::Constant(3, 0.5), Matrix::Zero(3, 2),
              (Vector(3) << 1.0, 1.0, 0.0).finished()};
  const Vector log_probs = Vector::Constant(3, -1.0);
  const Vector y = agent.target_values(batch, Matrix::Zero(3, 1), log_probs);
  const double soft = -2.0 + agent.alpha();
  EXPECT_NEAR(y[0], 0.5 + config.gamma * soft, 1e-12);
  EXPECT_NEAR(y[1], 0.5 + config.gamma * soft, 1e-12);
  EXPECT_NEAR(y[2], 0.5, 1e-12);
}

TEST(SacConfig, RejectsInvalidValues) {
  SacConfig c;
  c.gamma = 1.0;
  EXPECT_THROW(c.validate(), ContractError);
  c = SacConfig{};
  c.actor_lr = 0.0;
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(TrainExpert, LineTaskNearOptimal) {
  LineEnv env;
  const SacRun run = train_sac(env, desk_config(5000), 1);
  EXPECT_GE(run.final_eval.mean, 0.95 * env.optimal_return());
  EXPECT_EQ(run.metrics.columns, sac_metric_columns());
}

TEST(TrainExpert, TemperatureDrivesEntropyToTarget) {
  LineEnv env;
  SacConfig config = desk_config(25000);
  config.eval_interval = 1000;
  const SacRun run = train_sac(env, config, 2);
  const auto entropy = run.metrics.column("entropy");
  // Average over the last 3000 steps.
  const double late = (entropy[entropy.size() - 1] + entropy[entropy.size() - 2] + entropy[entropy.size() - 3]) / 3;
  EXPECT_LT(std::abs(late - (-1.0)), 0.3) << late;
}

TEST(TrainExpert, MyopicBanditPicksBestActionPerState) {
  Rng rng(7);
  TabularMDP mdp = TabularMDP::random(3, 3, 0.5, rng);
  mdp.reward << 1.0, 0.0, -1.0,  //
      -1.0, 1.0, 0.0,            //
      0.0, -1.0, 1.0;
  TabularEnv env(mdp, "tabular:bandit", 10);
  SacConfig config = desk_config(4000);
  config.gamma = 0.0;
  const SacRun run = train_sac(env, config, 3);
  for (Index s = 0; s < 3; ++s) {
    Index best = 0;
    run.policy.deterministic(Matrix::Identity(3, 3).row(s)).row(0).maxCoeff(&best);
    EXPECT_EQ(best, s);
  }
}

TEST(TrainExpert, PointMazeLeftExpertSucceedsAndCollectsConsistentDemos) {
  PointMaze env(PointMazeConfig::left());
  for (std::uint64_t seed : {1, 2, 3}) {
    const SacRun run = train_sac(env, desk_config(30000), seed);
    EXPECT_GE(run.final_eval.success_rate, 0.95) << "seed " << seed;
    const TrajectorySet demos = collect_trajectories(env, run.policy, 16, seed, true);
    double total = 0.0;
    for (const Episode& ep : demos.episodes) {
      EXPECT_LE(ep.length(), 100);
      total += ep.total_return();
    }
    const double mean = total / 16.0;
    EXPECT_LE(std::abs(mean - run.final_eval.mean), 0.1 * std::abs(run.final_eval.mean)) << "seed " << seed;
  }
}

TEST(Collect, OneEpisodeGivesOneLineAndIsReproducible) {
  Rng rng(8);
  PointMaze env(PointMazeConfig::left());
  SquashedGaussianPolicy policy(2, 2, {16}, rng);
  const auto a = temp_file("a.jsonl"), b = temp_file("b.jsonl");
  save_trajectories(a, collect_trajectories(env, policy, 1, 42, true));
  save_trajectories(b, collect_trajectories(env, policy, 1, 42, true));
  const std::string text = read_all(a);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text, read_all(b));
  EXPECT_EQ(load_trajectories(a).episodes.size(), 1u);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Collect, DimensionMismatchIsSchemaError) {
  Rng rng(9);
  SquashedGaussianPolicy policy(3, 2, {16}, rng);
  EXPECT_THROW(collect_trajectories(PointMaze(PointMazeConfig::left()), policy, 1, 0, true), SchemaError);
}

TEST(PolicyCheckpoint, RoundTripsWithPipeline) {
  Rng rng(10);
  SquashedGaussianPolicy policy(2, 2, {8}, rng);
  ObservationPipeline pipeline;
  pipeline.absorbing = true;
  RunningNormalizer norm(2);
  norm.update(Vector::Constant(2, 1.0));
  norm.update(Vector::Constant(2, 3.0));
  norm.freeze();
  pipeline.normalizer = norm;
  const auto path = temp_file("policy.txt");
  save_policy(path, policy, pipeline, {{"env-id", "pointmaze-left"}});
  ObservationPipeline back_pipe;
  std::map<std::string, std::string> meta;
  const SquashedGaussianPolicy back = load_policy(path, &back_pipe, &meta);
  EXPECT_EQ(meta.at("env-id"), "pointmaze-left");
  EXPECT_TRUE(back_pipe.absorbing);
  ASSERT_TRUE(back_pipe.normalizer.has_value());
  const Vector probe = (Vector(3) << 0.5, 2.5, 0.0).finished();
  EXPECT_EQ(back_pipe.apply(probe), pipeline.apply(probe));
  const Matrix obs = Matrix::Random(4, 2);
  EXPECT_EQ(back.deterministic(obs), policy.deterministic(obs));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace opirl
