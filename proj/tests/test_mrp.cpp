#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "vrpe/bounds.hpp"
#include "vrpe/error.hpp"
#include "vrpe/experiments.hpp"
#include "vrpe/mrp.hpp"

using namespace vrpe;

TEST(MrpInstance, RejectsBadRows) {
  Matrix P(2, 2);
  P << 0.5, 0.6, 0.5, 0.5;
  EXPECT_THROW(MrpInstance(P, Matrix::Zero(2, 2), 0.9), InvalidInstance);
  P << 0.5, 0.5, -0.1, 1.1;
  EXPECT_THROW(MrpInstance(P, Matrix::Zero(2, 2), 0.9), InvalidInstance);
}

TEST(MrpInstance, RejectsGammaOutsideUnitInterval) {
  const Matrix P = Matrix::Constant(2, 2, 0.5);
  EXPECT_THROW(MrpInstance(P, Matrix::Zero(2, 2), 1.0), Error);
  EXPECT_THROW(MrpInstance(P, Matrix::Zero(2, 2), 0.0), Error);
}

TEST(MrpInstance, RejectsShapeMismatch) {
  const Matrix P = Matrix::Constant(2, 2, 0.5);
  EXPECT_THROW(MrpInstance(P, Matrix::Zero(3, 2), 0.9), DimensionMismatch);
}

TEST(MrpInstance, ExpectedRewardIsRowAverage) {
  Matrix P(2, 2);
  P << 0.25, 0.75, 1.0, 0.0;
  Matrix R(2, 2);
  R << 4.0, -1.0, 2.0, 100.0;
  const MrpInstance m(P, R, 0.5);
  EXPECT_DOUBLE_EQ(m.r()[0], 0.25 * 4.0 - 0.75);
  EXPECT_DOUBLE_EQ(m.r()[1], 2.0);
}

TEST(Ergodicity, DetectsPeriodicAndReducibleChains) {
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  const auto periodic = ergodicity_check(flip);
  EXPECT_FALSE(periodic);
  EXPECT_TRUE(periodic.irreducible);
  EXPECT_EQ(periodic.period, 2);

  Matrix absorbing(2, 2);
  absorbing << 1, 0, 0.5, 0.5;
  const auto reducible = ergodicity_check(absorbing);
  EXPECT_FALSE(reducible.irreducible);
  EXPECT_THROW(stationary_distribution(absorbing), NonErgodicChain);

  Matrix cycle3 = Matrix::Zero(3, 3);
  cycle3(0, 1) = cycle3(1, 2) = cycle3(2, 0) = 1.0;
  EXPECT_EQ(ergodicity_check(cycle3).period, 3);
  cycle3(0, 1) = 0.5;
  cycle3(0, 0) = 0.5;
  EXPECT_TRUE(ergodicity_check(cycle3));
}

TEST(Stationary, TwoStateIsUniform) {
  const auto pi = stationary_distribution(two_state_instance(0.9).P());
  EXPECT_NEAR(pi.pi[0], 0.5, 1e-14);
  EXPECT_NEAR(pi.pi[1], 0.5, 1e-14);
}

TEST(Stationary, MatchesPowerIterationOnRandomChains) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CounterRng rng(seed, 7);
    const Index D = 2 + static_cast<Index>(rng.uniform() * 10);
    const MrpInstance m = random_ergodic_instance(D, 0.9, rng);
    const auto pi = stationary_distribution(m.P());
    const Vector oracle = testing_support::power_stationary(m.P());
    EXPECT_NEAR((pi.pi - oracle).lpNorm<Eigen::Infinity>(), 0.0, 1e-10) << "seed " << seed;
    EXPECT_NEAR(pi.pi.sum(), 1.0, 1e-12);
    EXPECT_GT(pi.min(), 0.0);
  }
}

TEST(ValueFunction, TwoStateClosedForm) {
  for (const double gamma : {0.6, 0.8, 0.9, 0.99}) {
    const Vector v = true_value_function(two_state_instance(gamma));
    const double c = 1.0 / (3.0 * (1.0 - gamma));
    EXPECT_NEAR(v[0], c, 1e-10 * c);
    EXPECT_NEAR(v[1], -c, 1e-10 * c);
  }
}

TEST(ValueFunction, MatchesDiscountedSeries) {
  CounterRng rng(3);
  const MrpInstance m = random_ergodic_instance(6, 0.7, rng);
  Vector series = Vector::Zero(6);
  Vector term = m.r();
  for (int t = 0; t < 400; ++t) {
    series += term;
    term = m.gamma() * (m.P() * term);
  }
  EXPECT_NEAR((true_value_function(m) - series).lpNorm<Eigen::Infinity>(), 0.0, 1e-10);
}

TEST(ValueFunction, SatisfiesBellmanEquation) {
  CounterRng rng(11);
  for (int i = 0; i < 20; ++i) {
    const MrpInstance m = random_ergodic_instance(8, 0.95, rng);
    const Vector v = true_value_function(m);
    const Vector residual = v - m.gamma() * m.P() * v - m.r();
    EXPECT_LT(residual.lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, v.lpNorm<Eigen::Infinity>()));
  }
}

TEST(WeightedNorm, DefinitionAndWeights) {
  const Vector v{{1.0, -2.0, 3.0}};
  const Vector pi{{0.5, 0.25, 0.25}};
  EXPECT_DOUBLE_EQ(weighted_norm_sq(v, pi), 0.5 + 1.0 + 2.25);
  EXPECT_DOUBLE_EQ(weighted_inner(v, Vector::Ones(3), pi), 0.5 - 0.5 + 0.75);
  EXPECT_THROW(weighted_norm_sq(v, Vector::Ones(2)), DimensionMismatch);
}

TEST(Mixing, TwoStateConstants) {
  const MixingProfile mp = mixing_constants(two_state_instance(0.9).P());
  EXPECT_NEAR(mp.rho, 7.0 / 9.0, 1e-12);
  // Fitted from powers down to the round-off floor, so only ~1e-9 relative.
  EXPECT_NEAR(mp.c_p, 0.5, 1e-6);
  // max_s |P^t - pi| = (1/2) rho^t <= 1/4 first at t = 3.
  EXPECT_EQ(mp.t_mix, 3);
}

TEST(Mixing, WorstCaseCyclicKernel) {
  const auto wc = worstcase_instance(0.75, 3);
  const MixingProfile mp = mixing_constants(wc.instance.P());
  EXPECT_NEAR(mp.rho, 1.0 / std::sqrt(3.0), 1e-10);
}

TEST(Mixing, DeviationsDecayGeometricallyAndTmixIsFirstCrossing) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CounterRng rng(seed, 99);
    const Index D = 2 + static_cast<Index>(rng.uniform() * 8);
    const MrpInstance m = random_ergodic_instance(D, 0.9, rng);
    const auto pi = stationary_distribution(m.P());
    const MixingProfile mp = mixing_constants(m.P());
    const auto dev = mixing_deviations(m.P(), pi.pi, 200);
    int first = -1;
    for (int t = 1; t < static_cast<int>(dev.size()); ++t) {
      if (dev[t] <= 0.25) {
        first = t;
        break;
      }
    }
    ASSERT_GT(first, 0);
    EXPECT_EQ(mp.t_mix, first);
    const double bound = std::log(4.0 * mp.c_p) / std::log(1.0 / mp.rho);
    EXPECT_LE(mp.t_mix, std::max(1.0, std::ceil(bound + 1e-9)));
    // The envelope is fitted on [0, horizon]; beyond it oscillating modes may
    // exceed it slightly, and tiny deviations are dominated by round-off.
    for (int t = 0; t <= std::min(mp.horizon, 200); ++t) {
      if (dev[t] <= 1e-9) break;
      EXPECT_LE(dev[t], mp.c_p * std::pow(mp.rho, t) * (1.0 + 1e-6)) << "t=" << t;
    }
  }
}
