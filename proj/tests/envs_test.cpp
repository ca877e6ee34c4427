#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "opirl/envs/absorbing.hpp"
#include "opirl/envs/line_env.hpp"
#include "opirl/envs/normalizer.hpp"
#include "opirl/envs/point_maze.hpp"
#include "opirl/envs/tabular.hpp"
#include "opirl/numcore/errors.hpp"
#include "test_util.hpp"

namespace opirl {
namespace {

using testing::random_simplex;

Vector vec2(double x, double y) { return (Vector(2) << x, y).finished(); }

// Independent crossing test for a horizontal barrier on y = 0 spanning [x0, x1].
bool crosses_horizontal(const Eigen::Vector2d& p, const Eigen::Vector2d& q, double x0, double x1) {
  if (q.y() == 0.0 && q.x() >= x0 && q.x() <= x1) return true;
  if ((p.y() < 0.0) == (q.y() < 0.0) || p.y() == 0.0) return false;
  const double t = p.y() / (p.y() - q.y());
  const double x = p.x() + t * (q.x() - p.x());
  return x >= x0 && x <= x1;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("opirl_envs_test_" + name);
}

TEST(PointMazeReset, DeterministicGivenSeed) {
  PointMaze a(PointMazeConfig::left());
  PointMaze b(PointMazeConfig::left());
  const Vector first = a.reset(7);
  EXPECT_EQ(first, a.reset(7));
  EXPECT_EQ(first, b.reset(7));
  EXPECT_NE(first, a.reset(8));
}

TEST(PointMazeReset, ZeroNoiseStartsAtStart) {
  PointMazeConfig config = PointMazeConfig::left();
  config.reset_noise = 0.0;
  PointMaze env(config);
  EXPECT_EQ(env.reset(3), vec2(0.0, -0.8));
}

TEST(PointMazeReset, NoiseIsCentredWithinRadius) {
  PointMaze env(PointMazeConfig::right());
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const Vector obs = env.reset(seed);
    EXPECT_LE((obs - vec2(0.0, -0.8)).norm(), 0.05 + 1e-15);
    sum += obs;
  }
  EXPECT_LT((sum / 10000.0 - Eigen::Vector2d(0.0, -0.8)).norm(), 0.01);
}

TEST(PointMazeReset, GoalBandAddsGoalToObservation) {
  PointMazeConfig config = PointMazeConfig::left();
  config.goal_band = 0.3;
  PointMaze env(config);
  const Vector obs = env.reset(11);
  ASSERT_EQ(obs.size(), 4);
  EXPECT_LE(std::abs(obs[2]), 0.3);
  EXPECT_EQ(obs[3], 0.8);
}

TEST(PointMazeStep, ZeroActionKeepsPosition) {
  PointMaze env(PointMazeConfig::left());
  const Vector start = env.reset(1);
  const StepResult r = env.step(vec2(0.0, 0.0));
  EXPECT_EQ(r.observation, start);
  EXPECT_DOUBLE_EQ(r.reward, -(start - vec2(0.0, 0.8)).norm());
  EXPECT_FALSE(r.terminated);
  EXPECT_FALSE(r.truncated);
}

TEST(PointMazeStep, ActionsAreScaledAndClipped) {
  PointMazeConfig config = PointMazeConfig::left();
  config.reset_noise = 0.0;
  PointMaze env(config);
  env.reset(0);
  const StepResult r = env.step(vec2(5.0, 0.5));
  EXPECT_NEAR(r.observation[0], 0.1, 1e-15);
  EXPECT_NEAR(r.observation[1], -0.75, 1e-15);
}

TEST(PointMazeStep, MotionIntoBarrierStopsOnNearSide) {
  for (PointMazeConfig config : {PointMazeConfig::left(), PointMazeConfig::right()}) {
    config.reset_noise = 0.0;
    config.start = {config.side == BarrierSide::Left ? -0.5 : 0.5, -0.25};
    PointMaze env(config);
    env.reset(0);
    for (int t = 0; t < 10; ++t) {
      const StepResult r = env.step(vec2(0.0, 1.0));
      EXPECT_LT(r.observation[1], 0.0);
    }
    EXPECT_NEAR(env.position().y(), 0.0, 1e-5);
    EXPECT_EQ(env.position().x(), config.start.x());
  }
}

TEST(PointMazeStep, StraightLineControllerReachesGoalWithoutBarrier) {
  PointMazeConfig config = PointMazeConfig::left();
  config.barrier_a = {-1.0, -1.0};
  config.barrier_b = {-0.9, -1.0};
  config.reset_noise = 0.0;
  PointMaze env(config);
  Vector obs = env.reset(0);
  const int bound = static_cast<int>(std::ceil((config.goal - config.start).norm() / (config.max_speed * config.dt)));
  int steps = 0;
  bool reached = false;
  while (!env.done()) {
    const Vector to_goal = vec2(0.0, 0.8) - obs;
    const StepResult r = env.step(to_goal / std::max(to_goal.norm(), config.max_speed) * 1.0);
    obs = r.observation;
    ++steps;
    if (r.terminated) {
      reached = true;
      break;
    }
  }
  EXPECT_TRUE(reached);
  EXPECT_LE(steps, bound);
}

TEST(PointMazeStep, TruncatesAtHorizonAndRejectsFurtherSteps) {
  PointMaze env(PointMazeConfig::left());
  env.reset(2);
  StepResult r;
  for (int t = 0; t < 100; ++t) {
    ASSERT_FALSE(env.done());
    r = env.step(vec2(-1.0, 0.0));
  }
  EXPECT_TRUE(r.truncated);
  EXPECT_FALSE(r.terminated);
  EXPECT_THROW(env.step(vec2(0.0, 0.0)), ContractError);
}

TEST(PointMazeStep, RejectsWrongActionSize) {
  PointMaze env(PointMazeConfig::left());
  env.reset(0);
  EXPECT_THROW(env.step(Vector::Zero(3)), DimensionError);
  PointMaze fresh(PointMazeConfig::left());
  EXPECT_THROW(fresh.step(vec2(0.0, 0.0)), ContractError);
}

TEST(PointMazeConfig, RejectsDegenerateGeometry) {
  PointMazeConfig config = PointMazeConfig::left();
  config.barrier_b = config.barrier_a;
  EXPECT_THROW(PointMaze{config}, ContractError);
  config = PointMazeConfig::left();
  config.goal_radius = 0.0;
  EXPECT_THROW(PointMaze{config}, ContractError);
  config = PointMazeConfig::left();
  config.horizon = 0;
  EXPECT_THROW(PointMaze{config}, ContractError);
}

TEST(SegmentsIntersect, Examples) {
  using V = Eigen::Vector2d;
  EXPECT_TRUE(segments_intersect(V(0, -1), V(0, 1), V(-1, 0), V(1, 0)));
  EXPECT_FALSE(segments_intersect(V(2, -1), V(2, 1), V(-1, 0), V(1, 0)));
  EXPECT_TRUE(segments_intersect(V(1, -1), V(1, 1), V(-1, 0), V(1, 0)));
  EXPECT_FALSE(segments_intersect(V(0, 0.1), V(0, 1), V(-1, 0), V(1, 0)));
  EXPECT_TRUE(segments_intersect(V(-2, 0), V(0, 0), V(-1, 0), V(1, 0)));
}

TEST(PointMazeInvariants, RandomRolloutsStayInArenaAndNeverCrossBarrier) {
  Rng rng(29);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (PointMazeConfig config : {PointMazeConfig::left(), PointMazeConfig::right()}) {
    const double x0 = config.barrier_a.x(), x1 = config.barrier_b.x();
    for (int rollout = 0; rollout < 50000; ++rollout) {
      config.start = {uni(rng), uni(rng)};
      if (std::abs(config.start.y()) < 1e-3) config.start.y() = 0.5;
      PointMaze env(config);
      Eigen::Vector2d prev = env.reset(rng());
      const Eigen::Vector2d drift(uni(rng), uni(rng));
      for (int t = 0; t < 20 && !env.done(); ++t) {
        const Vector action = drift + Eigen::Vector2d(noise(rng), noise(rng));
        const Eigen::Vector2d next = env.step(action).observation;
        ASSERT_LE(next.cwiseAbs().maxCoeff(), 1.0);
        ASSERT_FALSE(crosses_horizontal(prev, next, x0, x1)) << prev.transpose() << " -> " << next.transpose();
        ASSERT_FALSE(prev != next && segments_intersect(prev, next, config.barrier_a, config.barrier_b));
        prev = next;
      }
    }
  }
}

TEST(LineEnv, OptimalReturnMatchesHandComputation) {
  // Distances 0.4, 0.3, 0.2, 0.1 then 0 for the remaining 16 steps.
  EXPECT_NEAR(LineEnv().optimal_return(), 19.5, 1e-12);
  LineEnv env;
  Vector obs = env.reset(0);
  double total = 0.0;
  while (!env.done()) {
    const StepResult r = env.step(Vector::Constant(1, (0.5 - obs[0]) / 0.1));
    total += r.reward;
    obs = r.observation;
  }
  EXPECT_NEAR(total, 19.5, 1e-12);
}

TEST(Absorbing, NonTerminatingRolloutKeepsIndicatorZero) {
  AbsorbingWrapper env(std::make_unique<LineEnv>());
  ASSERT_EQ(env.observation_dim(), 2);
  EXPECT_EQ(env.reset(0)[1], 0.0);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(env.step(Vector::Constant(1, 0.3)).observation[1], 0.0);
}

TEST(Absorbing, TerminationLeadsToAbsorbingUntilHorizon) {
  PointMazeConfig config = PointMazeConfig::left();
  config.reset_noise = 0.0;
  config.start = {0.0, 0.6};
  config.horizon = 10;
  AbsorbingWrapper env(std::make_unique<PointMaze>(config));
  env.reset(0);
  EXPECT_FALSE(env.step(vec2(0.0, 0.5)).success);
  StepResult hit = env.step(vec2(0.0, 1.0));
  EXPECT_TRUE(hit.success);
  EXPECT_FALSE(hit.terminated);
  EXPECT_EQ(hit.observation, env.absorbing_observation());
  EXPECT_LT(hit.reward, 0.0);
  int absorbing_steps = 0;
  while (!env.done()) {
    const StepResult r = env.step(vec2(-1.0, 1.0));
    EXPECT_EQ(r.observation, env.absorbing_observation());
    EXPECT_EQ(r.reward, 0.0);
    EXPECT_FALSE(r.terminated);
    ++absorbing_steps;
  }
  EXPECT_EQ(absorbing_steps, 8);
}

TEST(Absorbing, TruncationDoesNotEnterAbsorbingState) {
  AbsorbingWrapper env(std::make_unique<PointMaze>(PointMazeConfig::left()));
  env.reset(0);
  StepResult r;
  while (!env.done()) r = env.step(vec2(-1.0, -1.0));
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.observation[2], 0.0);
}

TEST(Absorbing, AbsorbingSourcesAlwaysHaveAbsorbingDestinations) {
  Rng rng(31);
  std::normal_distribution<double> noise(0.0, 0.3);
  AbsorbingWrapper env(std::make_unique<PointMaze>(PointMazeConfig::right()));
  std::vector<std::pair<Vector, Vector>> transitions;
  int episodes_absorbed = 0;
  for (int ep = 0; ep < 200; ++ep) {
    Vector obs = env.reset(rng());
    while (!env.done()) {
      // Waypoint controller around the right-hand barrier.
      const Eigen::Vector2d pos = obs.head<2>();
      const Eigen::Vector2d target = pos.y() < 0.0 && pos.x() > -0.3 ? Eigen::Vector2d(-0.35, 0.05)
                                                                      : Eigen::Vector2d(0.0, 0.8);
      Eigen::Vector2d dir = (target - pos).normalized();
      const Vector next = env.step(dir + Eigen::Vector2d(noise(rng), noise(rng))).observation;
      transitions.emplace_back(obs, next);
      obs = next;
    }
    episodes_absorbed += env.absorbed();
  }
  EXPECT_GT(episodes_absorbed, 100);
  for (const auto& [from, to] : transitions) {
    if (is_absorbing(from)) EXPECT_TRUE(is_absorbing(to));
  }
}

TEST(Absorbing, PreservesRewardStreamWithoutEarlyTermination) {
  LineEnv plain;
  AbsorbingWrapper wrapped(std::make_unique<LineEnv>());
  plain.reset(5);
  wrapped.reset(5);
  Rng rng(37);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  while (!plain.done()) {
    const Vector a = Vector::Constant(1, uni(rng));
    const double r_plain = plain.step(a).reward;
    const double r_wrapped = wrapped.step(a).reward;
    EXPECT_EQ(std::bit_cast<std::uint64_t>(r_plain), std::bit_cast<std::uint64_t>(r_wrapped));
  }
  EXPECT_TRUE(wrapped.done());
}

TabularMDP two_state_cycle() {
  TabularMDP mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.gamma = 0.5;
  mdp.transition = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  mdp.reward = Matrix::Zero(2, 1);
  mdp.initial = (Vector(2) << 1, 0).finished();
  return mdp;
}

TEST(Occupancy, SingleStateSingleAction) {
  TabularMDP mdp;
  mdp.n_states = 1;
  mdp.n_actions = 1;
  mdp.gamma = 0.9;
  mdp.transition = Matrix::Ones(1, 1);
  mdp.reward = Matrix::Zero(1, 1);
  mdp.initial = Vector::Ones(1);
  EXPECT_NEAR(occupancy(mdp, Matrix::Ones(1, 1))(0, 0), 1.0, 1e-15);
}

TEST(Occupancy, DeterministicCycle) {
  // (1 - g) sum_k g^{2k} = 0.5 / 0.75 for the starting state.
  const double by_series = 0.5 / (1.0 - 0.25);
  const Matrix rho = occupancy(two_state_cycle(), Matrix::Ones(2, 1));
  EXPECT_NEAR(rho(0, 0), by_series, 1e-14);
  EXPECT_NEAR(rho(0, 0), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(rho(1, 0), 1.0 / 3.0, 1e-14);
}

Matrix random_policy(Index n_states, Index n_actions, Rng& rng) {
  Matrix pi(n_states, n_actions);
  for (Index s = 0; s < n_states; ++s) pi.row(s) = random_simplex(n_actions, rng).transpose();
  return pi;
}

TEST(Occupancy, MatchesTruncatedPowerSeries) {
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const TabularMDP mdp = TabularMDP::random(5, 3, 0.9, rng);
    const Matrix pi = random_policy(5, 3, rng);
    const Matrix p_pi_t = policy_transition(mdp, pi).transpose();
    Vector state_dist = mdp.initial;
    Vector d = Vector::Zero(5);
    double discount = 1.0;
    for (int t = 0; t < 1000000; ++t) {
      d += discount * state_dist;
      discount *= mdp.gamma;
      state_dist = p_pi_t * state_dist;
    }
    d *= 1.0 - mdp.gamma;
    const Matrix rho = occupancy(mdp, pi);
    for (Index s = 0; s < 5; ++s) {
      for (Index a = 0; a < 3; ++a) EXPECT_NEAR(rho(s, a), d[s] * pi(s, a), 1e-6);
    }
  }
}

TEST(Occupancy, IsProbabilityDistribution) {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n_s = 2 + trial % 30, n_a = 1 + trial % 8;
    const TabularMDP mdp = TabularMDP::random(n_s, n_a, 0.5 + 0.49 * (trial % 7) / 6.0, rng);
    const Matrix rho = occupancy(mdp, random_policy(n_s, n_a, rng));
    EXPECT_GE(rho.minCoeff(), 0.0);
    EXPECT_NEAR(rho.sum(), 1.0, 1e-10);
  }
}

TEST(Occupancy, RejectsInvalidPolicy) {
  const TabularMDP mdp = two_state_cycle();
  EXPECT_THROW(occupancy(mdp, Matrix::Constant(2, 1, 0.5)), ContractError);
  EXPECT_THROW(occupancy(mdp, Matrix::Ones(3, 1)), DimensionError);
}

TEST(PolicyQValues, SatisfyBellmanEquation) {
  Rng rng(47);
  const TabularMDP mdp = TabularMDP::random(6, 3, 0.8, rng);
  const Matrix pi = random_policy(6, 3, rng);
  const Matrix q = policy_q_values(mdp, pi);
  const Vector v = q.cwiseProduct(pi).rowwise().sum();
  for (Index s = 0; s < 6; ++s) {
    for (Index a = 0; a < 3; ++a) {
      EXPECT_NEAR(q(s, a), mdp.reward(s, a) + mdp.gamma * mdp.transition.row(s * 3 + a).dot(v.transpose()), 1e-12);
    }
  }
}

TEST(TabularMDP, ValidationRejectsBadTables) {
  TabularMDP mdp = two_state_cycle();
  mdp.gamma = 1.0;
  EXPECT_THROW(mdp.validate(), ContractError);
  mdp = two_state_cycle();
  mdp.transition(0, 1) = 0.9;
  EXPECT_THROW(mdp.validate(), ContractError);
  mdp = two_state_cycle();
  mdp.n_states = 65;
  EXPECT_THROW(mdp.validate(), ContractError);
}

TEST(TabularFile, RoundTripsExactly) {
  Rng rng(53);
  const TabularMDP mdp = TabularMDP::random(4, 2, 0.95, rng);
  const auto path = temp_file("roundtrip.mdp");
  save_tabular_mdp(path, mdp);
  const TabularMDP back = load_tabular_mdp(path);
  EXPECT_EQ(back.n_states, 4);
  EXPECT_EQ(back.n_actions, 2);
  EXPECT_EQ(back.gamma, mdp.gamma);
  EXPECT_EQ(back.transition, mdp.transition);
  EXPECT_EQ(back.reward, mdp.reward);
  EXPECT_EQ(back.initial, mdp.initial);
  std::filesystem::remove(path);
}

TEST(TabularFile, ReportsLineOfBadToken) {
  const auto path = temp_file("bad.mdp");
  {
    std::ofstream out(path);
    out << "# header\n2 1\n0.5\n1 0\n0 1\n1 oops\n0 0\n";
  }
  try {
    load_tabular_mdp(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 6u);
  }
  {
    std::ofstream out(path);
    out << "2 1\n0.5\n1 0\n0 1\n";
  }
  EXPECT_THROW(load_tabular_mdp(path), ParseError);
  std::filesystem::remove(path);
}

TEST(TabularEnv, EmpiricalTransitionsMatchTable) {
  Rng rng(59);
  const TabularMDP mdp = TabularMDP::random(3, 2, 0.9, rng);
  TabularEnv env(mdp, "tabular:test", 1);
  Matrix counts = Matrix::Zero(3, 3);
  Vector action = (Vector(2) << 0.1, 0.7).finished();
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const Index s = [&] {
      Index idx = 0;
      env.reset(static_cast<std::uint64_t>(i)).maxCoeff(&idx);
      return idx;
    }();
    Index next = 0;
    env.step(action).observation.maxCoeff(&next);
    counts(s, next) += 1.0;
  }
  for (Index s = 0; s < 3; ++s) {
    const double total = counts.row(s).sum();
    ASSERT_GT(total, 1000.0);
    for (Index next = 0; next < 3; ++next) EXPECT_NEAR(counts(s, next) / total, mdp.p(s, 1, next), 0.01);
  }
}

TEST(Registry, BuildsEnvironmentsById) {
  EXPECT_EQ(make_env("pointmaze-left")->id(), "pointmaze-left");
  EXPECT_EQ(make_env("pointmaze-right")->id(), "pointmaze-right");
  EXPECT_EQ(make_env("line-1d")->observation_dim(), 1);
  EXPECT_EQ(make_env("line-1d", {.absorbing = true})->observation_dim(), 2);
  EXPECT_EQ(make_env("pointmaze-left", {.goal_band = 0.2})->observation_dim(), 4);
  const auto path = temp_file("registry.mdp");
  Rng rng(61);
  save_tabular_mdp(path, TabularMDP::random(3, 2, 0.9, rng));
  const auto env = make_env("tabular:" + path.string());
  EXPECT_EQ(env->observation_dim(), 3);
  EXPECT_EQ(env->action_dim(), 2);
  std::filesystem::remove(path);
  EXPECT_THROW(make_env("cartpole"), ConfigError);
}

TEST(Normalizer, SingleSampleNormalizesToZero) {
  RunningNormalizer n(3);
  const Vector x = (Vector(3) << 1.0, -2.0, 5.0).finished();
  n.update(x);
  EXPECT_EQ(n.normalize(x), Vector::Zero(3));
}

TEST(Normalizer, ConstantStreamHasZeroVariance) {
  RunningNormalizer n(2);
  const Vector x = (Vector(2) << 0.3, 0.7).finished();
  for (int i = 0; i < 1000; ++i) n.update(x);
  EXPECT_NEAR(n.variance().cwiseAbs().maxCoeff(), 0.0, 1e-20);
  EXPECT_NEAR(n.normalize(x).cwiseAbs().maxCoeff(), 0.0, 1e-6);
}

TEST(Normalizer, StandardNormalStream) {
  Rng rng(67);
  std::normal_distribution<double> normal(0.0, 1.0);
  RunningNormalizer n(2);
  for (int i = 0; i < 100000; ++i) n.update((Vector(2) << normal(rng), normal(rng)).finished());
  EXPECT_LT(n.mean().cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT((n.variance().array() - 1.0).abs().maxCoeff(), 0.05);
}

TEST(Normalizer, FrozenIsPureAndRejectsUpdates) {
  RunningNormalizer n(2);
  n.update((Vector(2) << 1.0, 2.0).finished());
  n.update((Vector(2) << 3.0, 0.0).finished());
  n.freeze();
  const Vector probe = (Vector(2) << 0.5, 0.5).finished();
  const Vector before = n.normalize(probe);
  EXPECT_THROW(n.update(probe), ContractError);
  EXPECT_EQ(n.normalize(probe), before);
  Matrix batch(2, 2);
  batch << 0.5, 0.5, 1.0, 2.0;
  const Matrix rows = n.normalize_rows(batch);
  EXPECT_EQ(Vector(rows.row(0).transpose()), before);
  EXPECT_THROW(n.normalize(Vector::Zero(3)), DimensionError);
}

}  // namespace
}  // namespace opirl
