#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "vrpe/algorithms.hpp"
#include "vrpe/error.hpp"
#include "vrpe/experiments.hpp"
#include "vrpe/gridworld.hpp"

using namespace vrpe;

namespace {

Problem small_problem(std::uint64_t seed, double gamma = 0.9) {
  CounterRng rng(seed, 31);
  MrpInstance m = random_ergodic_instance(6, gamma, rng);
  const auto pi = stationary_distribution(m.P());
  Matrix Psi = random_features(6, 3, rng, pi.pi);
  return make_problem(std::move(m), std::move(Psi));
}

// Scalar MRP with one state: g(theta) = (1 - gamma) theta - 1.
Problem scalar_problem(double gamma) {
  return make_problem(MrpInstance::from_expected_reward(Matrix::Ones(1, 1), Vector::Ones(1), gamma),
                      Matrix::Ones(1, 1));
}

}  // namespace

TEST(CheckpointGrid, StrictlyIncreasingAndEndsAtTotal) {
  for (const Index total : {1, 2, 7, 100, 12345, 200000}) {
    for (const int count : {1, 5, 30}) {
      const auto grid = checkpoint_grid(total, count);
      ASSERT_FALSE(grid.empty());
      EXPECT_EQ(grid.back(), total);
      EXPECT_GE(grid.front(), 1);
      for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GT(grid[i], grid[i - 1]);
    }
  }
}

TEST(StepsizeRule, TheoryDiminishing) {
  const StepsizeRule r = StepsizeRule::theory_diminishing(1.0, 1.0, 0.9);
  EXPECT_NEAR(r.t0, 8.0 * 3.61 / 0.01, 1e-9);
  EXPECT_NEAR(r.at(0), 20.0 / r.t0, 1e-15);
  EXPECT_NEAR(r.at(10), 20.0 / (10 + r.t0), 1e-15);
}

TEST(TdFamily, ExactOperatorConvergesToProjectedSolution) {
  for (const int lambda : {0, 1}) {
    const Problem p = small_problem(1);
    ExactOracle oracle(p.system);
    const double eta = 0.5 * (1.0 - 0.9) / (p.basis.beta() * 4.0);
    TdOptions td{StepsizeRule::constant(eta), lambda, 200000, 0.0};
    const RunTrace tr = run_td_family(p, oracle, td, Vector::Zero(3));
    EXPECT_LT(p.error_to_vbar_sq(tr.final_theta), 1e-16 * std::max(1.0, p.v_star.squaredNorm())) << lambda;
    EXPECT_EQ(tr.samples_used, 200000);
  }
}

TEST(TdFamily, ExtrapolationRecurrenceOnScalarInstance) {
  const double gamma = 0.9;
  const Problem p = scalar_problem(gamma);
  ExactOracle oracle(p.system);
  const double eta = 0.2;
  TdOptions td{StepsizeRule::constant(eta), 1, 50, 0.0};
  RunOptions opts;
  opts.log_iterates = true;
  const RunTrace tr = run_td_family(p, oracle, td, Vector::Zero(1), opts);
  // e_{t+1} = e_t - a (2 e_t - e_{t-1}) with e_{-1} = e_0, a = eta (1 - gamma).
  const double a = eta * (1.0 - gamma);
  const double target = 1.0 / (1.0 - gamma);
  double prev = -target, cur = -target;
  for (int t = 0; t < 50; ++t) {
    const double next = cur - a * (2.0 * cur - prev);
    prev = cur;
    cur = next;
    EXPECT_NEAR(tr.iterate_log[t + 1][0] - target, cur, 1e-10);
  }
}

TEST(TdFamily, TailAveraging) {
  const Problem p = scalar_problem(0.5);
  ExactOracle oracle(p.system);
  TdOptions td{StepsizeRule::constant(0.1), 0, 10, 0.5};
  RunOptions opts;
  opts.log_iterates = true;
  const RunTrace tr = run_td_family(p, oracle, td, Vector::Zero(1), opts);
  double mean = 0.0;
  for (int t = 6; t <= 10; ++t) mean += tr.iterate_log[t][0] / 5.0;
  EXPECT_NEAR(tr.final_theta[0], mean, 1e-14);
}

TEST(Vrtd, WeightedOutputFormula) {
  const Problem p = small_problem(2);
  ExactOracle oracle(p.system);
  EpochSchedule s;
  s.K = 1;
  s.T = 7;
  s.N = {3};
  s.eta = 0.05;
  s.averaging = Averaging::PaperWeighted;
  RunOptions opts;
  opts.log_iterates = true;
  const Vector theta0 = Vector::Ones(3);
  const RunTrace tr = run_vrtd(p, oracle, s, theta0, opts);
  // log: theta_1 = theta0, theta_2..theta_{T+1}, then the output.
  ASSERT_EQ(tr.iterate_log.size(), 9u);
  const double w = s.eta * (1.0 - p.instance.gamma());
  Vector num = Vector::Zero(3);
  for (int t = 0; t < 7; ++t) num += w * tr.iterate_log[t];
  num += tr.iterate_log[7] / p.basis.beta();
  const Vector expected = num / (7 * w + 1.0 / p.basis.beta());
  EXPECT_LT((tr.final_theta - expected).norm(), 1e-13);
  // With exact evaluations the inner loop is plain gradient descent on g.
  for (int t = 0; t < 7; ++t) {
    const Vector step = tr.iterate_log[t] - s.eta * p.system.apply(tr.iterate_log[t]);
    EXPECT_LT((tr.iterate_log[t + 1] - step).norm(), 1e-12);
  }
  EXPECT_EQ(tr.samples_used, 10);
}

TEST(Vrftd, UniformTailOutputAndExactConvergence) {
  const Problem p = small_problem(3);
  ExactOracle oracle(p.system);
  EpochSchedule s;
  s.K = 6;
  s.T = 4000;
  s.N = std::vector<Index>(6, 1);
  s.m = 2;
  s.lambda = 1;
  s.eta = 1.0 / (4.0 * p.basis.beta() * 1.9);
  RunOptions opts;
  opts.log_iterates = true;
  const RunTrace tr = run_vrftd(p, oracle, s, Vector::Zero(3), opts);
  Vector mean = Vector::Zero(3);
  for (Index t = 1; t <= s.T; ++t) mean += tr.iterate_log[t] / static_cast<double>(s.T);
  EXPECT_LT((tr.epoch_outputs.front() - mean).norm(), 1e-12);
  EXPECT_LT(p.error_to_vbar_sq(tr.final_theta), 1e-14 * std::max(1.0, p.v_star.squaredNorm()));
  EXPECT_EQ(tr.samples_used, s.total_samples());
}

TEST(Vrftd, SampleAccountingAndDeterminism) {
  const Problem p = two_state_problem(0.9);
  const SamplingModel iid = IidModel{p.stationary.pi};
  const EpochSchedule s = budgeted_schedule(5000, 3, 0.1, 1, 4, 0.6, Averaging::UniformTail);
  const RunTrace a = run_vrftd_iid(p, iid, s, Vector::Zero(2), CounterRng(5, 1));
  const RunTrace b = run_vrftd_iid(p, iid, s, Vector::Zero(2), CounterRng(5, 1));
  const RunTrace c = run_vrftd_iid(p, iid, s, Vector::Zero(2), CounterRng(5, 2));
  EXPECT_EQ(a.samples_used, 5000);
  EXPECT_EQ(a.final_theta, b.final_theta);
  EXPECT_NE(a.final_theta, c.final_theta);
  EXPECT_EQ(a.checkpoints.back().samples, 5000);

  const SamplingModel mk = MarkovModel{-1, p.stationary.pi};
  const EpochSchedule sm = budgeted_schedule(5000, 3, 0.1, 1, 4, 0.6, Averaging::UniformTail, 1, 2);
  const RunTrace d = run_vrftd_markov(p, mk, sm, Vector::Zero(2), CounterRng(6));
  EXPECT_EQ(d.samples_used, sm.total_samples());
}

TEST(Vrftd, ModelMismatchAndStrictChecks) {
  const Problem p = two_state_problem(0.9);
  const SamplingModel iid = IidModel{p.stationary.pi};
  const SamplingModel mk = MarkovModel{0, {}};
  const EpochSchedule s = budgeted_schedule(500, 2, 0.1, 1, 1, 0.5, Averaging::UniformTail);
  EXPECT_THROW(run_vrftd_iid(p, mk, s, Vector::Zero(2), CounterRng(1)), InvalidSpec);
  EXPECT_THROW(run_vrftd_markov(p, iid, s, Vector::Zero(2), CounterRng(1)), InvalidSpec);
  RunOptions strict;
  strict.strict = true;
  EXPECT_THROW(run_vrftd_iid(p, iid, s, Vector::Zero(2), CounterRng(1), strict), ScheduleInfeasible);
  EXPECT_THROW(run_vrftd_iid(p, iid, s, Vector::Zero(3), CounterRng(1)), DimensionMismatch);
  const SamplingModel skewed = IidModel{Vector{{0.3, 0.7}}};
  const EpochSchedule theory = theoretical_schedule(schedule_stats(p, false), 1, 10, Setting::VrftdIid);
  EXPECT_THROW(run_vrftd_iid(p, skewed, theory, Vector::Zero(2), CounterRng(1), strict), ScheduleInfeasible);
}

TEST(Vrftd, NoiselessScalarNeedsFewerIterationsThanVrtd) {
  const double gamma = 0.95;
  const Problem p = scalar_problem(gamma);
  auto iterations = [&](const EpochSchedule& s, bool vrtd) {
    ExactOracle oracle(p.system);
    RunOptions opts;
    opts.log_iterates = true;
    const RunTrace tr = vrtd ? run_vrtd(p, oracle, s, Vector::Zero(1), opts)
                             : run_vrftd(p, oracle, s, Vector::Zero(1), opts);
    const double gap = p.error_to_vbar_sq(Vector::Zero(1));
    for (std::size_t t = 1; t < tr.iterate_log.size(); ++t) {
      if (p.error_to_vbar_sq(tr.iterate_log[t]) <= 1e-6 * gap) return static_cast<int>(t);
    }
    return -1;
  };
  const ScheduleStats stats = schedule_stats(p, false);
  const int a = iterations(theoretical_schedule(stats, 1, 1, Setting::Vrtd), true);
  const int b = iterations(theoretical_schedule(stats, 1, 1, Setting::VrftdIid), false);
  ASSERT_GT(a, 0);
  ASSERT_GT(b, 0);
  EXPECT_LT(b * 5, a);
}
