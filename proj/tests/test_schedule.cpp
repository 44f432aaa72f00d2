#include <gtest/gtest.h>

#include <cmath>

#include "vrpe/error.hpp"
#include "vrpe/experiments.hpp"
#include "vrpe/gridworld.hpp"
#include "vrpe/schedule.hpp"

using namespace vrpe;

TEST(CeilTol, AbsorbsRoundOffOnly) {
  EXPECT_EQ(ceil_tol(32.0 * 7.6 / 0.1), 2432);
  EXPECT_EQ(ceil_tol(2432.0001), 2433);
  EXPECT_EQ(ceil_tol(5.0), 5);
  EXPECT_EQ(ceil_tol(0.2), 1);
}

TEST(TheoreticalSchedule, VrftdIidTwoState) {
  const Problem p = two_state_problem(0.9);
  const ScheduleStats stats = schedule_stats(p, false);
  EXPECT_NEAR(stats.varsigma_sq, 0.73, 1e-10);
  const EpochSchedule s = theoretical_schedule(stats, 4, 1000, Setting::VrftdIid);
  EXPECT_NEAR(s.eta, 1.0 / 7.6, 1e-15);
  EXPECT_EQ(s.lambda, 1);
  EXPECT_EQ(s.T, 2432);
  // 256 * 0.73 / (7.6 * 0.1) = 245.9
  EXPECT_EQ(s.m, 246);
  ASSERT_EQ(s.N.size(), 4u);
  for (const Index n : s.N) EXPECT_EQ(n, 4088);
  EXPECT_TRUE(validate_schedule(s, stats, Setting::VrftdIid).ok());
}

TEST(TheoreticalSchedule, RecenteringFloorGrowsTowardLastEpoch) {
  const Problem p = two_state_problem(0.9);
  const ScheduleStats stats = schedule_stats(p, false);
  const EpochSchedule s = theoretical_schedule(stats, 3, 100000, Setting::VrftdIid);
  EXPECT_EQ(s.N[0], 56250);
  EXPECT_EQ(s.N[1], 75000);
  EXPECT_EQ(s.N[2], 100000);
}

TEST(TheoreticalSchedule, VrtdTwoState) {
  const Problem p = two_state_problem(0.9);
  const ScheduleStats stats = schedule_stats(p, false);
  const EpochSchedule s = theoretical_schedule(stats, 2, 10, Setting::Vrtd);
  EXPECT_NEAR(s.eta, 0.1 / (32 * 0.73), 1e-15);
  EXPECT_EQ(s.T, 74752);
  EXPECT_EQ(s.m, 1);
  EXPECT_EQ(s.lambda, 0);
  EXPECT_EQ(s.averaging, Averaging::PaperWeighted);
  EXPECT_EQ(s.N[0], 2774);
}

TEST(TheoreticalSchedule, MarkovTwoState) {
  const Problem p = two_state_problem(0.7);
  const ScheduleStats stats = schedule_stats(p, true);
  const EpochSchedule s = theoretical_schedule(stats, 3, 2000, Setting::VrftdMarkov);
  EXPECT_NEAR(s.eta, 1.0 / 6.8, 1e-15);
  EXPECT_EQ(s.tau, 1);
  EXPECT_EQ(s.T, 1451);
  EXPECT_GE(s.m - s.m0, 1);
  EXPECT_TRUE(validate_schedule(s, stats, Setting::VrftdMarkov).ok());
}

TEST(TheoreticalSchedule, MarkovNeedsMixingAndNoise) {
  const Problem p = two_state_problem(0.7);
  EXPECT_THROW(theoretical_schedule(schedule_stats(p, false), 3, 2000, Setting::VrftdMarkov), InfeasibleInputs);
  ScheduleStats stats = schedule_stats(p, true);
  stats.varsigma_sq = 0.0;
  EXPECT_THROW(theoretical_schedule(stats, 3, 2000, Setting::VrftdMarkov), InfeasibleInputs);
}

TEST(TheoreticalSchedule, IsMinimalOnRandomProblems) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    CounterRng rng(seed, 44);
    MrpInstance m = random_ergodic_instance(6, 0.8 + 0.15 * rng.uniform(), rng);
    const auto pi = stationary_distribution(m.P());
    Matrix Psi = random_features(6, 3, rng, pi.pi);
    const Problem p = make_problem(std::move(m), std::move(Psi));
    const ScheduleStats stats = schedule_stats(p, true);
    for (const Setting setting : {Setting::Vrtd, Setting::VrftdIid, Setting::VrftdMarkov}) {
      const EpochSchedule s = theoretical_schedule(stats, 3, 500, setting);
      EXPECT_TRUE(validate_schedule(s, stats, setting).ok()) << setting_name(setting);
      EpochSchedule shorter = s;
      shorter.T -= 1;
      EXPECT_FALSE(validate_schedule(shorter, stats, setting).ok()) << setting_name(setting);
      EpochSchedule faster = s;
      faster.eta *= 1.01;
      EXPECT_FALSE(validate_schedule(faster, stats, setting).ok()) << setting_name(setting);
      if (setting != Setting::Vrtd && s.m - s.m0 > 1) {
        EpochSchedule smaller = s;
        smaller.m -= 1;
        EXPECT_FALSE(validate_schedule(smaller, stats, setting).ok()) << setting_name(setting);
      }
      EpochSchedule starved = s;
      starved.N.back() = starved.n0 + 1;
      EXPECT_FALSE(validate_schedule(starved, stats, setting).ok()) << setting_name(setting);
    }
  }
}

TEST(EpochSchedule, StructureChecks) {
  EpochSchedule s;
  s.K = 2;
  s.N = {10, 10};
  s.T = 5;
  s.eta = 0.1;
  EXPECT_NO_THROW(s.check_structure());
  EXPECT_EQ(s.total_samples(), 30);
  s.m0 = 1;
  EXPECT_THROW(s.check_structure(), InvalidSpec);
  s.m0 = 0;
  s.lambda = 2;
  EXPECT_THROW(s.check_structure(), InvalidSpec);
  s.lambda = 0;
  s.N = {10};
  EXPECT_THROW(s.check_structure(), InvalidSpec);
}

TEST(BudgetedSchedule, SpendsExactlyTheBudget) {
  for (const Index budget : {125, 223, 500, 2000, 200000}) {
    for (const int K : {1, 2, 3, 4}) {
      for (const Index m : {1, 4}) {
        const EpochSchedule s = budgeted_schedule(budget, K, 0.1, 1, m, 0.6, Averaging::UniformTail);
        EXPECT_EQ(s.total_samples(), budget) << budget << " " << K << " " << m;
        for (int k = 1; k < K; ++k) EXPECT_GE(s.N[k], s.N[k - 1]);
      }
    }
  }
}
