#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vrpe/mrp.hpp"
#include "vrpe/projection.hpp"

namespace vrpe {

enum class Setting { Vrtd, VrftdIid, VrftdMarkov };

enum class Averaging {
  /// (sum_{t=1}^T eta (1-gamma) v_t + v_{T+1} / beta) / (T eta (1-gamma) + 1/beta)
  PaperWeighted,
  /// (1/T) sum_{t=2}^{T+1} v_t
  UniformTail,
};

/// @brief All parameters of a multi-epoch variance-reduced run.
struct EpochSchedule {
  double eta = 0.0;
  int lambda = 0;
  Index T = 1;
  Index m = 1;
  Index m0 = 0;
  Index n0 = 0;
  std::vector<Index> N;
  int K = 0;
  Index tau = 0;
  Averaging averaging = Averaging::UniformTail;
  /// Target sample size used for the (3/4)^{K-k} N recentering floor.
  Index target_N = 0;

  /// Samples consumed by a run: sum_k (m T + N_k).
  Index total_samples() const;
  /// Checks the structural invariants (positive counts, burn-ins below batch
  /// sizes, lambda in {0, 1}); throws InvalidSpec.
  void check_structure() const;
};

/// Problem statistics that the theorem schedules depend on.
struct ScheduleStats {
  double beta = 1.0;
  double mu = 1.0;
  double gamma = 0.5;
  double varsigma_sq = 0.0;
  std::optional<MixingProfile> mixing;
  std::optional<double> bias_constant;
  std::optional<double> min_pi;
};

ScheduleStats schedule_stats(const Problem& problem, bool with_mixing);

/// Smallest parameters meeting every inequality of the theorem for `setting`.
/// Throws InfeasibleInputs when no finite choice exists.
EpochSchedule theoretical_schedule(const ScheduleStats& stats, int K, Index N, Setting setting);

struct ScheduleCheck {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ScheduleCheck validate_schedule(const EpochSchedule& schedule, const ScheduleStats& stats,
                                Setting setting);

/// ceil with a relative allowance for round-off in the argument, so that
/// e.g. 32 * 7.6 / 0.1 maps to 2432 rather than 2433.
Index ceil_tol(double x);

const char* setting_name(Setting setting);

}  // namespace vrpe
