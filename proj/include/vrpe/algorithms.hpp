#pragma once

#include <optional>
#include <vector>

#include "vrpe/oracle.hpp"
#include "vrpe/projection.hpp"
#include "vrpe/rng.hpp"
#include "vrpe/sampling.hpp"
#include "vrpe/schedule.hpp"

namespace vrpe {

struct Checkpoint {
  Index samples = 0;
  double error_pi_sq = 0.0;
  double error_to_vbar_sq = 0.0;
};

/// @brief Errors along one run, with optional per-iterate parameter log.
struct RunTrace {
  std::vector<Checkpoint> checkpoints;
  Vector final_theta;
  std::vector<Vector> iterate_log;
  std::vector<Vector> epoch_outputs;
  Index samples_used = 0;
};

struct RunOptions {
  bool log_iterates = false;
  /// Number of geometrically spaced sample counts at which errors are recorded
  /// (in addition to every epoch end).
  int checkpoints = 30;
  /// Enforce the theorem inequalities for the schedule; requires stats.
  bool strict = false;
  std::optional<ScheduleStats> stats;
};

/// eta_t = eta0 (constant) or eta0 / (t + t0) (diminishing), t = 0, 1, ...
struct StepsizeRule {
  enum class Kind { Constant, Diminishing } kind = Kind::Constant;
  double eta0 = 0.0;
  double t0 = 1.0;

  double at(Index t) const {
    return kind == Kind::Constant ? eta0 : eta0 / (static_cast<double>(t) + t0);
  }
  static StepsizeRule constant(double eta) { return {Kind::Constant, eta, 1.0}; }
  static StepsizeRule diminishing(double eta0, double t0) { return {Kind::Diminishing, eta0, t0}; }
  /// eta_t = 2 / (mu (1-gamma) (t + t0)) with t0 = 8 beta (1+gamma)^2 / (mu (1-gamma)^2).
  static StepsizeRule theory_diminishing(double beta, double mu, double gamma);
};

struct TdOptions {
  StepsizeRule stepsize;
  /// 0: plain TD, 1: operator extrapolation.
  int lambda = 0;
  Index total_samples = 0;
  /// Fraction of the final iterates averaged into the output (0 = last iterate).
  double tail_fraction = 0.0;
};

/// Single-sample TD (lambda = 0) or FTD (lambda = 1) consuming exactly
/// total_samples observations from the oracle.
RunTrace run_td_family(const Problem& problem, OperatorOracle& oracle, const TdOptions& td,
                       const Vector& theta0, const RunOptions& options = {});
RunTrace run_td_family(const Problem& problem, const SamplingModel& model, const TdOptions& td,
                       const Vector& theta0, CounterRng rng, const RunOptions& options = {});

/// Recentered single-sample epochs with the weighted epoch output.
RunTrace run_vrtd(const Problem& problem, OperatorOracle& oracle, const EpochSchedule& schedule,
                  const Vector& theta0, const RunOptions& options = {});
RunTrace run_vrtd(const Problem& problem, const SamplingModel& model, const EpochSchedule& schedule,
                  const Vector& theta0, CounterRng rng, const RunOptions& options = {});

/// Recentered, mini-batched, extrapolated epochs; burn-ins (m0, n0) are honored
/// so the same routine serves the i.i.d. and Markovian variants.
RunTrace run_vrftd(const Problem& problem, OperatorOracle& oracle, const EpochSchedule& schedule,
                   const Vector& theta0, const RunOptions& options = {},
                   Setting setting = Setting::VrftdIid);

RunTrace run_vrftd_iid(const Problem& problem, const SamplingModel& model,
                       const EpochSchedule& schedule, const Vector& theta0, CounterRng rng,
                       const RunOptions& options = {});
RunTrace run_vrftd_markov(const Problem& problem, const SamplingModel& model,
                          const EpochSchedule& schedule, const Vector& theta0, CounterRng rng,
                          const RunOptions& options = {});

/// Geometric grid of sample counts in [1, total], strictly increasing.
std::vector<Index> checkpoint_grid(Index total, int count);

}  // namespace vrpe
