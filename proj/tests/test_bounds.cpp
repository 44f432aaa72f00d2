#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "vrpe/algorithms.hpp"
#include "vrpe/bounds.hpp"
#include "vrpe/error.hpp"
#include "vrpe/experiments.hpp"
#include "vrpe/gridworld.hpp"
#include "vrpe/serialization.hpp"

using namespace vrpe;
using testing_support::random_vector;

namespace {

double two_state_trace(double gamma) {
  return 40.0 / 81.0 * (2.0 * gamma - 1.0) / std::pow(1.0 - gamma, 3);
}

// Long-run covariance by brute-force enumeration of (s0, s1, s_t, s_{t+1}).
Matrix enumerated_markov_sigma(const Problem& p, int lags) {
  const Index D = p.instance.num_states();
  const Index d = p.basis.dim();
  const Matrix& P = p.instance.P();
  const Vector& pi = p.stationary.pi;
  auto z = [&](Index s, Index t) {
    const Vector xi_op = stochastic_operator(p.solution.theta_bar, Observation{s, t, p.instance.R()(s, t)},
                                             p.basis.Psi(), p.instance.gamma());
    return Vector(p.basis.B_inv_sqrt() * xi_op);
  };
  Matrix sigma = Matrix::Zero(d, d);
  for (Index s = 0; s < D; ++s) {
    for (Index t = 0; t < D; ++t) sigma += pi[s] * P(s, t) * z(s, t) * z(s, t).transpose();
  }
  Matrix Pk = Matrix::Identity(D, D);
  for (int lag = 1; lag <= lags; ++lag) {
    Matrix G = Matrix::Zero(d, d);
    for (Index s0 = 0; s0 < D; ++s0) {
      for (Index s1 = 0; s1 < D; ++s1) {
        const double w0 = pi[s0] * P(s0, s1);
        if (w0 == 0.0) continue;
        for (Index u = 0; u < D; ++u) {
          for (Index u1 = 0; u1 < D; ++u1) {
            const double w = w0 * Pk(s1, u) * P(u, u1);
            if (w != 0.0) G += w * z(s0, s1) * z(u, u1).transpose();
          }
        }
      }
    }
    sigma += G + G.transpose();
    Pk = Pk * P;
  }
  return sigma;
}

}  // namespace

TEST(WorstCase, ClosedFormMatchesLinearSolve) {
  for (const double gamma : {0.55, 0.75, 0.9, 0.99}) {
    for (const int D : {2, 3, 10, 100}) {
      const WorstCaseInstance wc = worstcase_instance(gamma, D);
      const Vector v = true_value_function(wc.instance);
      EXPECT_LT((v - wc.v_star_closed_form).lpNorm<Eigen::Infinity>(), 1e-11) << gamma << " " << D;
      const Vector uniform = Vector::Constant(D, 1.0 / D);
      EXPECT_NEAR(worstcase_initial_gap(gamma, D), weighted_norm_sq(wc.v_star_closed_form, uniform), 1e-14);
      EXPECT_TRUE(ergodicity_check(wc.instance.P()));
    }
  }
  EXPECT_DOUBLE_EQ(worstcase_initial_gap(0.75, 4), 0.0830078125);
}

TEST(WorstCase, RejectsBadParameters) {
  EXPECT_THROW(worstcase_instance(0.5, 5), InvalidGamma);
  EXPECT_THROW(worstcase_instance(1.0, 5), InvalidGamma);
  EXPECT_THROW(worstcase_instance(0.8, 1), InvalidInstance);
}

TEST(WorstCase, ValidityRatio) {
  const WorstCaseInstance wc = worstcase_instance(0.75, 100);
  for (int k = 0; k <= 20; ++k) EXPECT_TRUE(wc.valid(k));
  EXPECT_NEAR(wc.validity_ratio(0), 1.0, 1e-15);
  const WorstCaseInstance small = worstcase_instance(0.99, 4);
  EXPECT_FALSE(small.valid(4));
  for (int k = 1; k <= 4; ++k) EXPECT_LT(small.validity_ratio(k), small.validity_ratio(k - 1));
}

TEST(WorstCase, OperatorShiftsSupportByOneCoordinate) {
  const WorstCaseInstance wc = worstcase_instance(0.8, 12);
  const Matrix G = Matrix::Identity(12, 12) - 0.8 * wc.instance.P();
  EXPECT_TRUE(in_block_subspace(wc.instance.r(), 1, 0));
  CounterRng rng(1);
  for (Index t = 1; t < 11; ++t) {
    Vector v = Vector::Zero(12);
    v.head(t) = random_vector(t, rng);
    EXPECT_TRUE(in_block_subspace(G * v - wc.instance.r(), t + 1, 0)) << t;
    EXPECT_FALSE(in_block_subspace(G * v, t, 0)) << t;
  }
}

TEST(OracleLowerBound, HoldsForRandomSpanMethods) {
  // Any method whose iterates stay in v0 + span{G(v_0), ..., G(v_{k-1})}.
  const double gamma = 0.75;
  const int D = 40;
  const WorstCaseInstance wc = worstcase_instance(gamma, D);
  const Matrix G = Matrix::Identity(D, D) - gamma * wc.instance.P();
  const Vector uniform = Vector::Constant(D, 1.0 / D);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterRng rng(seed, 5);
    std::vector<Vector> iterates{Vector::Zero(D)};
    std::vector<Vector> evals;
    for (int k = 0; k < 15; ++k) {
      evals.push_back(G * iterates.back() - wc.instance.r());
      Vector next = iterates.back();
      for (const auto& e : evals) next -= rng.normal() * e;
      iterates.push_back(next);
    }
    EXPECT_LT(span_residual(iterates, wc.instance), 1e-9);
    for (int k = 0; k < static_cast<int>(iterates.size()); ++k) {
      const auto lb = oracle_lower_bound(wc, k, Vector::Zero(D));
      ASSERT_TRUE(lb.valid);
      EXPECT_GE(weighted_norm_sq(iterates[k] - wc.v_star_closed_form, uniform), lb.rhs * (1 - 1e-12));
    }
  }
}

TEST(SpanResidual, DetectsNonAmenableIterates) {
  const WorstCaseInstance wc = worstcase_instance(0.75, 10);
  std::vector<Vector> iterates{Vector::Zero(10), Vector::Zero(10)};
  iterates[1][9] = 1.0;
  EXPECT_GT(span_residual(iterates, wc.instance), 0.5);
}

TEST(IidCovariance, TwoStateClosedForm) {
  for (const double gamma : {0.7, 0.8, 0.9, 0.95}) {
    const Problem p = two_state_problem(gamma);
    const CovarianceBundle b = iid_covariance(p.instance, p.basis, p.stationary.pi);
    EXPECT_NEAR(b.trace_functional / two_state_trace(gamma), 1.0, 1e-10) << gamma;
    EXPECT_NEAR(stochastic_lower_bound(b), b.trace_functional, 0.0);
  }
  EXPECT_NEAR(two_state_trace(0.9), 395.0617283950617, 1e-9);
}

TEST(IidCovariance, ZeroWhenRewardsAreDeterministicAndModelExact) {
  // One state, no randomness in (s, s'): nothing to average out.
  const Problem p = make_problem(MrpInstance::from_expected_reward(Matrix::Ones(1, 1), Vector::Ones(1), 0.9),
                                 Matrix::Ones(1, 1));
  const CovarianceBundle b = iid_covariance(p.instance, p.basis, p.stationary.pi);
  EXPECT_NEAR(b.trace_functional, 0.0, 1e-20);
}

TEST(IidCovariance, RejectsDegenerateSampling) {
  const Problem p = two_state_problem(0.9);
  EXPECT_THROW(iid_covariance(p.instance, p.basis, Vector{{1.0, 0.0}}), InvalidDistribution);
}

TEST(MarkovCovariance, FullRankEqualsIid) {
  for (const double gamma : {0.7, 0.9}) {
    const Problem p = two_state_problem(gamma);
    const CovarianceBundle iid = iid_covariance(p.instance, p.basis, p.stationary.pi);
    const CovarianceBundle mkv = markov_covariance(p.instance, p.basis);
    EXPECT_NEAR(mkv.trace_functional / iid.trace_functional, 1.0, 1e-10);
    EXPECT_LE(mkv.truncation_error_bound, 1e-12 * iid.sigma.trace() * 10);
  }
  CounterRng rng(9);
  MrpInstance m = random_ergodic_instance(5, 0.8, rng);
  const Problem p = make_problem(std::move(m), testing_support::random_matrix(5, 5, rng));
  const CovarianceBundle iid = iid_covariance(p.instance, p.basis, p.stationary.pi);
  const CovarianceBundle mkv = markov_covariance(p.instance, p.basis);
  EXPECT_NEAR(mkv.trace_functional / iid.trace_functional, 1.0, 1e-9);
}

TEST(MarkovCovariance, MatchesEnumeratedLagSums) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    CounterRng rng(seed, 77);
    MrpInstance m = random_ergodic_instance(4, 0.9, rng);
    const auto pi = stationary_distribution(m.P());
    Matrix Psi = random_features(4, 2, rng, pi.pi);
    const Problem p = make_problem(std::move(m), std::move(Psi));
    const CovarianceBundle mkv = markov_covariance(p.instance, p.basis);
    const Matrix oracle = enumerated_markov_sigma(p, 120);
    EXPECT_LT((mkv.sigma - oracle).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
    EXPECT_GT(mkv.truncation_lag, 0);
  }
}

TEST(Bundle, SerializedLowerBoundRecomputes) {
  const Problem p = two_state_problem(0.85);
  const CovarianceBundle b = markov_covariance(p.instance, p.basis);
  const CovarianceBundle back = bundle_from_json(Json::parse(bundle_to_json(b).dump()));
  EXPECT_EQ(back.kind, CovarianceKind::MarkovStationary);
  EXPECT_EQ(back.truncation_lag, b.truncation_lag);
  EXPECT_NEAR(stochastic_lower_bound(back), b.trace_functional, 1e-12 * b.trace_functional);
}
