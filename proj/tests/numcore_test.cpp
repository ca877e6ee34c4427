#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "opirl/numcore/adam.hpp"
#include "opirl/numcore/autodiff.hpp"
#include "opirl/numcore/checkpoint.hpp"
#include "opirl/numcore/errors.hpp"
#include "opirl/numcore/gradcheck.hpp"
#include "opirl/numcore/mlp.hpp"
#include "test_util.hpp"

namespace opirl {
namespace {

using testing::random_matrix;

TEST(Forward, IdentityLayerPassesInputThrough) {
  Rng rng(1);
  Mlp net("id", {2, 2}, {Activation::Identity}, rng);
  net.weight(0).value = Matrix::Identity(2, 2);
  ad::Tape tape;
  Matrix x(1, 2);
  x << 1, 2;
  ad::Var y = net.forward(tape, tape.constant(x));
  EXPECT_EQ(y.value(), x);
}

TEST(Forward, ReluClipsNegatives) {
  ad::Tape tape;
  Matrix x(1, 2);
  x << -1, 3;
  Matrix expected(1, 2);
  expected << 0, 3;
  EXPECT_EQ(ad::relu(tape.constant(x)).value(), expected);
}

TEST(Forward, ShapeMismatchNamesBothShapes) {
  Rng rng(1);
  Mlp net = Mlp::make("net", 3, {4}, 1, rng);
  ad::Tape tape;
  try {
    net.forward(tape, tape.constant(Matrix::Zero(5, 2)));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(5x2)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3"), std::string::npos) << msg;
  }
}

TEST(Forward, IsBitDeterministic) {
  Rng rng(4);
  Mlp net = Mlp::make("net", 3, {16, 16}, 2, rng, Activation::Tanh);
  const Matrix x = random_matrix(8, 3, rng);
  ad::Tape t1, t2;
  const Matrix a = net.forward(t1, t1.constant(x)).value();
  const Matrix b = net.forward(t2, t2.constant(x)).value();
  EXPECT_EQ(a, b);
  EXPECT_EQ(net.predict(x), a);
}

TEST(Forward, XorFitWithAdam) {
  Rng rng(7);
  Mlp net = Mlp::make("xor", 2, {16}, 1, rng, Activation::Tanh);
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  Matrix y(4, 1);
  y << 0, 1, 1, 0;
  AdamState adam(AdamOptions{.learning_rate = 1e-2});
  auto params = net.parameter_ptrs();
  double mse = 0.0;
  for (int step = 0; step < 2000; ++step) {
    net.zero_grad();
    ad::Tape tape;
    ad::Var loss = ad::mean(ad::square(net.forward(tape, tape.constant(x)) - tape.constant(y)));
    mse = loss.item();
    tape.backward(loss);
    adam_step(params, adam);
  }
  EXPECT_LT(mse, 0.05);
}

TEST(Backward, SquareAtThree) {
  ad::Parameter x{"x", Matrix::Constant(1, 1, 3.0), Matrix::Zero(1, 1)};
  ad::Tape tape;
  tape.backward(ad::square(tape.parameter(x)));
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 6.0);
}

TEST(Backward, AbsPowThreeHalvesAtFour) {
  ad::Parameter x{"x", Matrix::Constant(1, 1, 4.0), Matrix::Zero(1, 1)};
  ad::Tape tape;
  tape.backward(ad::abs_pow(tape.parameter(x), 1.5));
  EXPECT_NEAR(x.grad(0, 0), 3.0, 1e-12);
}

TEST(Backward, AbsPowAtZeroIsZero) {
  ad::Parameter x{"x", Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  ad::Tape tape;
  ad::Var y = ad::abs_pow(tape.parameter(x), 1.5);
  EXPECT_EQ(y.item(), 0.0);
  tape.backward(y);
  EXPECT_EQ(x.grad(0, 0), 0.0);
}

TEST(Backward, ReluSubgradientAtZeroIsZero) {
  ad::Parameter x{"x", Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  ad::Tape tape;
  tape.backward(ad::relu(tape.parameter(x)));
  EXPECT_EQ(x.grad(0, 0), 0.0);
}

TEST(Backward, NonScalarOutputIsContractError) {
  ad::Tape tape;
  ad::Var v = tape.constant(Matrix::Zero(2, 1));
  EXPECT_THROW(tape.backward(v), ContractError);
}

TEST(Backward, RepeatedCallsAfterZeroingAreIdempotent) {
  Rng rng(3);
  Mlp net = Mlp::make("net", 3, {8}, 1, rng, Activation::Tanh);
  const Matrix x = random_matrix(5, 3, rng);
  ad::Tape tape;
  ad::Var out = ad::sum(net.forward(tape, tape.constant(x)));
  net.zero_grad();
  tape.backward(out);
  const Matrix first = net.weight(0).grad;
  net.zero_grad();
  tape.backward(out);
  EXPECT_EQ(net.weight(0).grad, first);
}

TEST(Backward, SumOfIdenticalSubgraphsScalesGradient) {
  Rng rng(5);
  Mlp net = Mlp::make("net", 2, {6}, 1, rng, Activation::Tanh);
  const Matrix x = random_matrix(3, 2, rng);
  net.zero_grad();
  {
    ad::Tape tape;
    tape.backward(ad::sum(net.forward(tape, tape.constant(x))));
  }
  std::vector<Matrix> single;
  for (auto& p : net.parameters()) single.push_back(p.grad);
  constexpr int kCopies = 4;
  net.zero_grad();
  {
    ad::Tape tape;
    ad::Var total = ad::sum(net.forward(tape, tape.constant(x)));
    for (int i = 1; i < kCopies; ++i) total = total + ad::sum(net.forward(tape, tape.constant(x)));
    tape.backward(total);
  }
  for (std::size_t i = 0; i < single.size(); ++i) {
    EXPECT_EQ(net.parameters()[i].grad, Matrix(kCopies * single[i])) << net.parameters()[i].name;
  }
}

TEST(Backward, RandomTwoLayerNetMatchesFiniteDifferences) {
  Rng rng(11);
  Mlp net = Mlp::make("net", 4, {12, 12}, 1, rng, Activation::Tanh);
  const Matrix x = random_matrix(16, 4, rng);
  EXPECT_LT(finite_diff_check(net, x, 1e-4), 1e-4);
}

// Every differentiable primitive against central differences, 100 seeds each.
TEST(Backward, PrimitivesMatchFiniteDifferences) {
  using Unary = std::function<ad::Var(ad::Var)>;
  struct Case {
    const char* name;
    Unary fn;
    bool positive_domain;
  };
  const std::vector<Case> cases = {
      {"tanh", [](ad::Var v) { return ad::tanh(v); }, false},
      {"exp", [](ad::Var v) { return ad::exp(v); }, false},
      {"log", [](ad::Var v) { return ad::log(v); }, true},
      {"sqrt", [](ad::Var v) { return ad::sqrt(v); }, true},
      {"square", [](ad::Var v) { return ad::square(v); }, false},
      {"abs_pow_1.5", [](ad::Var v) { return ad::abs_pow(v, 1.5); }, false},
      {"abs_pow_3", [](ad::Var v) { return ad::abs_pow(v, 3.0); }, false},
      {"log_sigmoid", [](ad::Var v) { return ad::log_sigmoid(v); }, false},
      {"relu", [](ad::Var v) { return ad::relu(v); }, false},
      {"scale_shift", [](ad::Var v) { return 2.5 - 0.5 * v; }, false},
      {"row_sum", [](ad::Var v) { return ad::row_sum(v); }, false},
      {"mean", [](ad::Var v) { return ad::mean(v); }, false},
      {"transpose", [](ad::Var v) { return ad::transpose(v); }, false},
      {"slice", [](ad::Var v) { return ad::slice_cols(v, 1, 2); }, false},
      {"clamp", [](ad::Var v) { return ad::clamp(v, -0.5, 0.5); }, false},
      {"self_mul", [](ad::Var v) { return v * v; }, false},
      {"concat", [](ad::Var v) { return ad::concat_cols(v, ad::square(v)); }, false},
      {"matmul_self", [](ad::Var v) { return ad::matmul(v, ad::transpose(v)); }, false},
      {"broadcast_row", [](ad::Var v) { return v * ad::slice_cols(ad::mean(v) + v, 0, 1); }, false},
  };
  for (const Case& c : cases) {
    for (int seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      Matrix init = random_matrix(3, 3, rng);
      // Keep away from kinks and domain boundaries.
      for (Index i = 0; i < init.size(); ++i) {
        double& v = init.data()[i];
        if (std::abs(v) < 0.1) v = v < 0 ? -0.1 - std::abs(v) : 0.1 + std::abs(v);
        if (std::abs(std::abs(v) - 0.5) < 0.05) v *= 1.2;
        if (c.positive_domain) v = std::abs(v) + 0.2;
      }
      const Matrix weights = random_matrix(6, 6, rng);
      ad::Parameter x{"x", init, Matrix::Zero(3, 3)};
      ad::Parameter* ptr = &x;
      const double err = finite_diff_check(std::span<ad::Parameter* const>(&ptr, 1), [&](ad::Tape& tape) {
        ad::Var y = c.fn(tape.parameter(x));
        // Random projection so every output entry matters.
        ad::Var w = tape.constant(weights.topLeftCorner(y.rows(), y.cols()));
        return ad::sum(y * w);
      }, 1e-5);
      EXPECT_LT(err, 1e-4) << c.name << " seed " << seed;
    }
  }
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
  Rng rng(21);
  Mlp net = Mlp::make("net", 3, {10, 10}, 1, rng, Activation::Tanh);
  const Matrix x = random_matrix(4, 3, rng);
  ad::Tape tape;
  const Matrix g = net.input_gradient(tape, tape.constant(x)).value();
  const double h = 1e-6;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      Matrix up = x, down = x;
      up(r, c) += h;
      down(r, c) -= h;
      const double numeric = (net.predict(up)(r, 0) - net.predict(down)(r, 0)) / (2 * h);
      EXPECT_NEAR(g(r, c), numeric, 1e-7);
    }
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ad::Parameter w{"w", Matrix::Constant(2, 2, 0.7), Matrix::Zero(2, 2)};
  ad::Parameter* ptr = &w;
  AdamState state;
  adam_step(std::span<ad::Parameter* const>(&ptr, 1), state);
  EXPECT_EQ(w.value, Matrix::Constant(2, 2, 0.7));
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, QuadraticBowlConverges) {
  ad::Parameter w{"w", Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1)};
  ad::Parameter* ptr = &w;
  AdamState state(AdamOptions{.learning_rate = 0.1});
  for (int i = 0; i < 200; ++i) {
    w.zero_grad();
    ad::Tape tape;
    tape.backward(ad::square(tape.parameter(w)));
    adam_step(std::span<ad::Parameter* const>(&ptr, 1), state);
  }
  EXPECT_LT(std::abs(w.value(0, 0)), 1e-2);
  EXPECT_EQ(state.step, 200);
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  ad::Parameter w{"w", Matrix::Zero(1, 3), Matrix::Zero(1, 3)};
  w.grad << 0.3, -20.0, 1e-3;
  ad::Parameter* ptr = &w;
  AdamState state(AdamOptions{.learning_rate = 0.01});
  adam_step(std::span<ad::Parameter* const>(&ptr, 1), state);
  EXPECT_NEAR(w.value(0, 0), -0.01, 1e-8);
  EXPECT_NEAR(w.value(0, 1), 0.01, 1e-8);
  EXPECT_NEAR(w.value(0, 2), -0.01, 1e-6);
}

TEST(Adam, MissingGradientIsContractError) {
  ad::Parameter w{"w", Matrix::Zero(2, 2), Matrix()};
  ad::Parameter* ptr = &w;
  AdamState state;
  EXPECT_THROW(adam_step(std::span<ad::Parameter* const>(&ptr, 1), state), ContractError);
  EXPECT_EQ(state.step, 0);
}

TEST(FiniteDiffCheck, LinearNetIsExact) {
  Rng rng(2);
  Mlp net = Mlp::make("lin", 3, {}, 2, rng);
  EXPECT_LT(finite_diff_check(net, random_matrix(6, 3, rng), 1e-4), 1e-8);
}

TEST(FiniteDiffCheck, TanhNet) {
  Rng rng(8);
  Mlp net = Mlp::make("tanh", 3, {16, 16}, 1, rng, Activation::Tanh);
  EXPECT_LT(finite_diff_check(net, random_matrix(16, 3, rng), 1e-4), 1e-4);
}

TEST(FiniteDiffCheck, ReluNetAwayFromKinks) {
  // Draw inputs until every pre-activation is at least 0.1 away from zero.
  Rng rng(9);
  Mlp net = Mlp::make("relu", 3, {8, 8}, 1, rng);
  for (auto& p : net.parameters()) {
    if (p.name.ends_with("bias")) p.value = random_matrix(1, p.value.cols(), rng, 0.5);
  }
  Matrix accepted(0, 3);
  while (accepted.rows() < 8) {
    Matrix x = random_matrix(1, 3, rng);
    ad::Tape tape;
    std::vector<ad::Var> pre;
    net.forward(tape, tape.constant(x), pre);
    bool ok = true;
    for (std::size_t l = 0; l + 1 < pre.size(); ++l) ok = ok && (pre[l].value().array().abs() > 0.1).all();
    if (!ok) continue;
    accepted.conservativeResize(accepted.rows() + 1, 3);
    accepted.row(accepted.rows() - 1) = x;
  }
  EXPECT_LT(finite_diff_check(net, accepted, 1e-4), 1e-4);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(13);
  Mlp net = Mlp::make("policy", 3, {7, 5}, 4, rng, Activation::Tanh);
  net.bias(1).value = random_matrix(1, 5, rng, 1e-3);
  ParameterFile file;
  file.meta["env-id"] = "pointmaze-left";
  file.add(net);
  file.add("extra", Matrix::Constant(1, 1, 1.0 / 3.0));
  const auto path = std::filesystem::temp_directory_path() / "opirl_ckpt_roundtrip.txt";
  save_parameter_file(path, file);
  const ParameterFile loaded = load_parameter_file(path);
  EXPECT_EQ(loaded.get_meta("env-id"), "pointmaze-left");
  Mlp restored = loaded.load_mlp("policy");
  ASSERT_EQ(restored.layer_sizes(), net.layer_sizes());
  for (std::size_t i = 0; i < net.parameters().size(); ++i) {
    EXPECT_EQ(restored.parameters()[i].value, net.parameters()[i].value);
  }
  EXPECT_EQ(loaded.tensor("extra")(0, 0), 1.0 / 3.0);
  std::filesystem::remove(path);
}

TEST(Checkpoint, TruncatedFileIsParseError) {
  Rng rng(13);
  ParameterFile file;
  file.add(Mlp::make("net", 2, {3}, 1, rng));
  const auto path = std::filesystem::temp_directory_path() / "opirl_ckpt_truncated.txt";
  save_parameter_file(path, file);
  std::string content;
  {
    std::ifstream in(path);
    content.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << content.substr(0, content.size() / 2);
  }
  EXPECT_THROW(load_parameter_file(path), ParseError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace opirl
