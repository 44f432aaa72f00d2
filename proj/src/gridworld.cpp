#include "vrpe/gridworld.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cstdlib>

#include "vrpe/error.hpp"

namespace vrpe {

namespace {

bool in_bounds(const GridWorldSpec& spec, Cell c) {
  return c.row >= 0 && c.row < spec.height && c.col >= 0 && c.col < spec.width;
}

int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

}  // namespace

void GridWorldSpec::validate() const {
  if (width < 1 || height < 1 || num_cells() < 2) throw InvalidSpec("grid must have at least two cells");
  if (!in_bounds(*this, goal)) throw InvalidSpec("goal lies outside the grid");
  for (const Cell& t : traps) {
    if (!in_bounds(*this, t)) throw InvalidSpec("trap lies outside the grid");
    if (t == goal) throw InvalidSpec("goal cannot be a trap");
  }
  if (!(toward_goal_prob > 0.0 && toward_goal_prob < 1.0)) {
    throw InvalidSpec("toward-goal probability must lie in (0, 1)");
  }
  if (feature_dim < 1 || feature_dim > num_cells()) throw InvalidSpec("feature dimension out of range");
}

std::vector<Cell> random_traps(int width, int height, Cell goal, int count, CounterRng& rng) {
  std::vector<Cell> candidates;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (!(Cell{r, c} == goal)) candidates.push_back({r, c});
    }
  }
  if (count < 0 || count > static_cast<int>(candidates.size())) throw InvalidSpec("too many traps");
  // Partial Fisher-Yates driven by the counter generator for reproducibility.
  for (int i = 0; i < count; ++i) {
    const auto span = candidates.size() - i;
    const auto j = i + static_cast<std::size_t>(rng.uniform() * span);
    std::swap(candidates[i], candidates[std::min(j, candidates.size() - 1)]);
  }
  candidates.resize(count);
  return candidates;
}

MrpInstance gridworld_instance(const GridWorldSpec& spec, double gamma) {
  spec.validate();
  const int D = spec.num_cells();
  Vector cell_reward = Vector::Zero(D);
  for (const Cell& t : spec.traps) cell_reward[spec.index(t)] = spec.trap_reward;
  cell_reward[spec.index(spec.goal)] = spec.goal_reward;

  Matrix P = Matrix::Zero(D, D);
  const Cell moves[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      const Cell here{r, c};
      const int s = spec.index(here);
      if (here == spec.goal) {
        P.row(s).setConstant(1.0 / D);
        continue;
      }
      std::vector<int> legal;
      std::vector<int> closer;
      for (const Cell& m : moves) {
        const Cell next{r + m.row, c + m.col};
        if (!in_bounds(spec, next)) continue;
        legal.push_back(spec.index(next));
        if (manhattan(next, spec.goal) < manhattan(here, spec.goal)) closer.push_back(spec.index(next));
      }
      for (const int t : closer) P(s, t) += spec.toward_goal_prob / closer.size();
      for (const int t : legal) P(s, t) += (1.0 - spec.toward_goal_prob) / legal.size();
    }
  }

  Matrix R(D, D);
  for (int s = 0; s < D; ++s) {
    for (int t = 0; t < D; ++t) {
      R(s, t) = spec.reward_timing == GridWorldSpec::RewardTiming::OnEntry ? cell_reward[t]
                                                                           : cell_reward[s];
    }
  }
  return MrpInstance(std::move(P), std::move(R), gamma);
}

Matrix random_features(Index D, Index d, CounterRng& rng, const Vector& pi) {
  if (d < 1 || d > D || pi.size() != D) throw DimensionMismatch("feature dimensions out of range");
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix Psi(d, D);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < D; ++j) Psi(i, j) = rng.normal();
    }
    const Matrix B = Psi * pi.asDiagonal() * Psi.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(B, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() > 1e-8) return Psi;
  }
  throw RankDeficientFeatures("could not draw well-conditioned random features in 100 attempts");
}

}  // namespace vrpe
