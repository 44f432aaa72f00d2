#pragma once

#include <string>
#include <vector>

#include "vrpe/algorithms.hpp"
#include "vrpe/bounds.hpp"
#include "vrpe/harness.hpp"

namespace vrpe {

/// Symmetric two-state chain with staying probability (2 gamma - 1)/gamma,
/// rewards +1 / -1 by origin state.
MrpInstance two_state_instance(double gamma);
/// Two-state instance with Psi = diag(sqrt 2, sqrt 2).
Problem two_state_problem(double gamma);

/// Random ergodic chain on D states: a self-loop and a cyclic edge on every
/// state plus random extra edges.
MrpInstance random_ergodic_instance(Index D, double gamma, CounterRng& rng);

/// Epoch schedule that spends exactly `budget` samples: a fraction
/// recenter_fraction goes to recentering batches growing like 2^k, the rest to
/// T inner steps of m samples per epoch.
EpochSchedule budgeted_schedule(Index budget, int K, double eta, int lambda, Index m,
                                double recenter_fraction, Averaging averaging, Index m0 = 0,
                                Index n0 = 0);

/// Sample budget ceil(scale / (1 - gamma)^2).
Index sweep_budget(double gamma, double scale = 5.0);

struct LemmaCheck {
  std::string name;
  Index checks = 0;
  /// max over checks of (lhs - rhs) / max(1, |rhs|); nonpositive up to tol means pass.
  double worst_slack = -1e300;
};

/// Norm and operator inequalities on random ergodic instances (D <= 12, d <= 6).
std::vector<LemmaCheck> lemma_suite(int instances, int vectors, std::uint64_t seed);

ExperimentResult experiment_lemma_suite(const ExperimentConfig& config);
ExperimentResult experiment_oracle_lb(const ExperimentConfig& config);
ExperimentResult experiment_sweep_two_state(const ExperimentConfig& config);
ExperimentResult experiment_ablation_oe(const ExperimentConfig& config);
ExperimentResult experiment_ablation_minibatch(const ExperimentConfig& config);
ExperimentResult experiment_gridworld(const ExperimentConfig& config);
ExperimentResult experiment_markov_two_state(const ExperimentConfig& config);

}  // namespace vrpe
