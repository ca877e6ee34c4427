#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "opirl/divergence/discrete.hpp"
#include "opirl/divergence/pnorm.hpp"
#include "opirl/numcore/errors.hpp"
#include "test_util.hpp"

namespace opirl {
namespace {

using testing::random_simplex;

// sup_x (x y - f(x)) over x in [-100, 100] with step 1e-4.
double grid_conjugate(const PNormGenerator& gen, double y) {
  double best = -std::numeric_limits<double>::infinity();
  for (long i = -1000000; i <= 1000000; ++i) {
    const double x = static_cast<double>(i) * 1e-4;
    best = std::max(best, x * y - gen.value(x));
  }
  return best;
}

TEST(PNormGenerator, RejectsInvalidParameters) {
  EXPECT_THROW(PNormGenerator(1.0, 0.5), ContractError);
  EXPECT_THROW(PNormGenerator(0.5, 0.5), ContractError);
  EXPECT_THROW(PNormGenerator(2.0, 0.0), ContractError);
}

TEST(PNormGenerator, ConjugateExponentsAreHolderPair) {
  for (double p : {1.1, 1.5, 2.0, 3.0, 7.5}) {
    PNormGenerator gen(p, 1.0);
    EXPECT_NEAR(1.0 / gen.p() + 1.0 / gen.q(), 1.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(PNormGenerator::default_generator().q(), 3.0);
}

TEST(FValue, Examples) {
  EXPECT_EQ(PNormGenerator(2.0, 0.5).value(0.0), 0.0);
  EXPECT_DOUBLE_EQ(PNormGenerator(2.0, 0.5).value(3.0), 4.5);
  EXPECT_NEAR(PNormGenerator(1.5, 2.0 / 3.0).value(4.0), 16.0 / 3.0, 1e-12);
  EXPECT_NEAR(PNormGenerator(1.5, 2.0 / 3.0).value(-4.0), 16.0 / 3.0, 1e-12);
}

TEST(ConjugateValue, Examples) {
  const PNormGenerator quadratic(2.0, 0.5);
  EXPECT_EQ(quadratic.conjugate(0.0), 0.0);
  EXPECT_NEAR(quadratic.conjugate(3.0), 4.5, 1e-12);
  const PNormGenerator gen(1.5, 2.0 / 3.0);
  EXPECT_NEAR(gen.conjugate(2.0), grid_conjugate(gen, 2.0), 1e-3);
  // 1/q |y|^q with q = 3
  EXPECT_NEAR(gen.conjugate(2.0), 8.0 / 3.0, 1e-12);
}

TEST(ConjugateValue, GeneralCoefficientMatchesGridOracle) {
  const PNormGenerator half(1.5, 0.5);
  for (double y : {-1.3, 0.4, 2.0}) EXPECT_NEAR(half.conjugate(y), grid_conjugate(half, y), 1e-3) << y;
}

TEST(ConjugateGrad, Examples) {
  EXPECT_NEAR(PNormGenerator(2.0, 0.5).conjugate_grad(3.0), 3.0, 1e-12);
  for (double p : {1.2, 1.5, 2.0, 4.0}) EXPECT_EQ(PNormGenerator(p, 1.0 / p).conjugate_grad(0.0), 0.0);
  const PNormGenerator gen(1.5, 2.0 / 3.0);
  const double h = 1e-5;
  const double numeric = (gen.conjugate(1.7 + h) - gen.conjugate(1.7 - h)) / (2 * h);
  EXPECT_NEAR(gen.conjugate_grad(1.7), numeric, 1e-5);
}

TEST(ConjugateGrad, TapeVersionMatchesClosedForm) {
  const PNormGenerator gen(1.5, 0.5);
  ad::Parameter y{"y", Matrix(1, 3), Matrix::Zero(1, 3)};
  y.value << -2.0, 0.7, 1.9;
  ad::Tape tape;
  ad::Var out = gen.conjugate(tape.parameter(y));
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(out.value()(0, i), gen.conjugate(y.value(0, i)), 1e-14);
  tape.backward(ad::sum(out));
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(y.grad(0, i), gen.conjugate_grad(y.value(0, i)), 1e-12);
}

TEST(KlDiscrete, Examples) {
  const DiscreteDist p{0.2, 0.3, 0.5};
  EXPECT_EQ(kl_discrete(p, p), 0.0);
  EXPECT_NEAR(kl_discrete(DiscreteDist{1.0, 0.0}, DiscreteDist{0.5, 0.5}), std::log(2.0), 1e-15);
}

TEST(KlDiscrete, GibbsInequality) {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const DiscreteDist p(random_simplex(8, rng));
    const DiscreteDist q(random_simplex(8, rng));
    EXPECT_GE(kl_discrete(p, q), 0.0);
  }
}

TEST(KlDiscrete, SupportViolationIsDomainError) {
  EXPECT_THROW(kl_discrete(DiscreteDist{0.5, 0.5}, DiscreteDist{1.0, 0.0}), DomainError);
  EXPECT_THROW(f_div_discrete(PNormGenerator(2.0, 0.5), DiscreteDist{0.5, 0.5}, DiscreteDist{1.0, 0.0}),
               DomainError);
}

TEST(DiscreteDist, RejectsInvalidProbabilities) {
  EXPECT_THROW(DiscreteDist({0.5, 0.6}), ContractError);
  EXPECT_THROW(DiscreteDist({1.5, -0.5}), ContractError);
}

TEST(FDivDiscrete, Examples) {
  const PNormGenerator quadratic(2.0, 0.5);
  const DiscreteDist q{0.1, 0.2, 0.7};
  EXPECT_NEAR(f_div_discrete(quadratic, q, q), 0.5, 1e-15);
  EXPECT_NEAR(f_div_discrete(quadratic, DiscreteDist{1.0, 0.0}, DiscreteDist{0.5, 0.5}), 1.0, 1e-15);
}

TEST(FDivDiscrete, UpperBoundsKl) {
  const PNormGenerator quadratic(2.0, 0.5);
  Rng rng(19);
  for (int trial = 0; trial < 1000; ++trial) {
    const DiscreteDist p(random_simplex(8, rng));
    const DiscreteDist q(random_simplex(8, rng));
    EXPECT_LE(kl_discrete(p, q), f_div_discrete(quadratic, p, q));
  }
}

TEST(Invariants, FenchelYoung) {
  for (const PNormGenerator& gen : {PNormGenerator(1.5, 2.0 / 3.0), PNormGenerator(1.5, 0.5), PNormGenerator(2.0, 0.5)}) {
    for (int i = 0; i < 100; ++i) {
      const double x = -5.0 + 0.1 * i;
      for (int j = 0; j < 100; ++j) {
        const double y = -5.0 + 0.1 * j;
        EXPECT_LE(x * y, gen.value(x) + gen.conjugate(y) + 1e-8);
      }
      const double y_star = gen.derivative(x);
      EXPECT_NEAR(x * y_star, gen.value(x) + gen.conjugate(y_star), 1e-8 * std::max(1.0, std::abs(x * y_star)));
    }
  }
}

TEST(Invariants, ConjugateIsMidpointConvex) {
  const PNormGenerator gen = PNormGenerator::default_generator();
  Rng rng(23);
  std::uniform_real_distribution<double> uni(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = uni(rng), b = uni(rng);
    EXPECT_LE(gen.conjugate(0.5 * (a + b)), 0.5 * (gen.conjugate(a) + gen.conjugate(b)) + 1e-10);
  }
}

TEST(Invariants, DoubleConjugateRecoversGenerator) {
  const PNormGenerator gen = PNormGenerator::default_generator();
  for (double x : {-2.0, -0.5, 0.0, 0.3, 1.0, 2.5}) {
    double best = -std::numeric_limits<double>::infinity();
    for (long i = -1000000; i <= 1000000; ++i) {
      const double y = static_cast<double>(i) * 1e-4;
      best = std::max(best, x * y - gen.conjugate(y));
    }
    EXPECT_NEAR(best, gen.value(x), 1e-3) << x;
  }
}

}  // namespace
}  // namespace opirl
