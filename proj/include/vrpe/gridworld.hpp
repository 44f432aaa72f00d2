#pragma once

#include <vector>

#include "vrpe/mrp.hpp"
#include "vrpe/rng.hpp"

namespace vrpe {

struct Cell {
  int row = 0;
  int col = 0;

  bool operator==(const Cell&) const = default;
};

/// @brief Grid world under a fixed goal-seeking policy.
struct GridWorldSpec {
  enum class RewardTiming { OnEntry, OnExit };

  int width = 1;
  int height = 1;
  Cell goal;
  std::vector<Cell> traps;
  double trap_reward = -0.2;
  double goal_reward = 1.0;
  double toward_goal_prob = 0.95;
  int feature_dim = 1;
  RewardTiming reward_timing = RewardTiming::OnEntry;

  /// Throws InvalidSpec on out-of-bounds cells, a trapped goal, or a
  /// probability outside (0, 1).
  void validate() const;
  int num_cells() const { return width * height; }
  int index(Cell c) const { return c.row * width + c.col; }
};

/// Distinct trap cells drawn uniformly from the non-goal cells.
std::vector<Cell> random_traps(int width, int height, Cell goal, int count, CounterRng& rng);

/// With probability toward_goal_prob the agent takes a legal move that reduces
/// the Manhattan distance to the goal (uniform among such moves); otherwise a
/// uniformly random legal move. The goal re-spawns the agent uniformly over
/// all cells. Rewards attach to the entered (or exited) cell.
MrpInstance gridworld_instance(const GridWorldSpec& spec, double gamma);

/// Standard normal d x D features, redrawn until lambda_min(Psi diag(pi) Psi^T)
/// exceeds 1e-8; throws RankDeficientFeatures after 100 attempts.
Matrix random_features(Index D, Index d, CounterRng& rng, const Vector& pi);

}  // namespace vrpe
