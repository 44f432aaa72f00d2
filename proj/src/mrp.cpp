#include "vrpe/mrp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "vrpe/error.hpp"

namespace vrpe {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kRhoFloor = 1e-12;

std::vector<int> bfs_levels(const Matrix& P, bool transpose) {
  const Index D = P.rows();
  std::vector<int> level(D, -1);
  std::queue<Index> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < D; ++v) {
      const double w = transpose ? P(v, u) : P(u, v);
      if (w > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

}  // namespace

MrpInstance::MrpInstance(Matrix P, Matrix R, double gamma)
    : P_(std::move(P)), R_(std::move(R)), gamma_(gamma) {
  const Index D = P_.rows();
  if (D == 0 || P_.cols() != D) {
    throw InvalidInstance("transition matrix must be square and non-empty");
  }
  if (R_.rows() != D || R_.cols() != D) {
    throw DimensionMismatch("reward matrix must match the transition matrix shape");
  }
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
    throw InvalidGamma("discount factor must lie strictly inside (0, 1)");
  }
  if (!P_.allFinite() || !R_.allFinite()) {
    throw InvalidInstance("transition and reward matrices must be finite");
  }
  for (Index s = 0; s < D; ++s) {
    if (P_.row(s).minCoeff() < 0.0) {
      throw InvalidInstance("negative transition probability in row " + std::to_string(s));
    }
    if (std::abs(P_.row(s).sum() - 1.0) > kRowSumTol) {
      throw InvalidInstance("transition row " + std::to_string(s) + " does not sum to 1");
    }
  }
  r_ = P_.cwiseProduct(R_).rowwise().sum();
}

MrpInstance MrpInstance::from_expected_reward(Matrix P, const Vector& r, double gamma) {
  if (r.size() != P.rows()) {
    throw DimensionMismatch("expected reward length must equal the number of states");
  }
  Matrix R = r.replicate(1, P.cols());
  return MrpInstance(std::move(P), std::move(R), gamma);
}

ErgodicityReport ergodicity_check(const Matrix& P) {
  ErgodicityReport report;
  const Index D = P.rows();
  if (D == 0 || P.cols() != D) {
    report.diagnostic = "matrix is not square";
    return report;
  }
  const auto forward = bfs_levels(P, false);
  const auto backward = bfs_levels(P, true);
  for (Index s = 0; s < D; ++s) {
    if (forward[s] < 0 || backward[s] < 0) {
      report.diagnostic = "state " + std::to_string(s) + " is not mutually reachable with state 0";
      return report;
    }
  }
  report.irreducible = true;

  // For a strongly connected graph the period is the gcd of
  // level(u) + 1 - level(v) over all edges u -> v.
  int g = 0;
  for (Index u = 0; u < D; ++u) {
    for (Index v = 0; v < D; ++v) {
      if (P(u, v) > 0.0) {
        g = std::gcd(g, std::abs(forward[u] + 1 - forward[v]));
      }
    }
  }
  report.period = g;
  report.ergodic = (g == 1);
  if (!report.ergodic) {
    report.diagnostic = "chain is periodic with period " + std::to_string(g);
  }
  return report;
}

StationaryDistribution stationary_distribution(const Matrix& P) {
  const auto report = ergodicity_check(P);
  if (!report) throw NonErgodicChain(report.diagnostic);

  const Index D = P.rows();
  auto residual = [&](const Vector& pi) {
    return (P.transpose() * pi - pi).lpNorm<Eigen::Infinity>();
  };

  Vector pi(D);
  Eigen::EigenSolver<Matrix> solver(P.transpose(), true);
  bool ok = solver.info() == Eigen::Success;
  if (ok) {
    Index best = 0;
    const auto values = solver.eigenvalues();
    for (Index i = 1; i < D; ++i) {
      if (std::abs(values[i] - 1.0) < std::abs(values[best] - 1.0)) best = i;
    }
    pi = solver.eigenvectors().col(best).real();
    pi /= pi.sum();
    ok = pi.allFinite() && pi.minCoeff() > 0.0 && residual(pi) <= 1e-12;
  }
  if (!ok) {
    pi = Vector::Constant(D, 1.0 / D);
    for (int it = 0; it < 1'000'000; ++it) {
      Vector next = P.transpose() * pi;
      next /= next.sum();
      const double change = (next - pi).lpNorm<Eigen::Infinity>();
      pi = std::move(next);
      if (change <= 1e-12 && residual(pi) <= 1e-12) break;
    }
  }
  if (!(pi.minCoeff() > 0.0) || residual(pi) > 1e-10) {
    throw NonErgodicChain("failed to compute a positive stationary distribution");
  }
  return StationaryDistribution{pi};
}

Vector true_value_function(const MrpInstance& instance) {
  const Index D = instance.num_states();
  const Matrix A = Matrix::Identity(D, D) - instance.gamma() * instance.P();
  Vector v = A.partialPivLu().solve(instance.r());
  // One step of iterative refinement keeps the Bellman residual near round-off
  // even for discount factors close to 1.
  v += A.partialPivLu().solve(instance.r() - A * v);
  return v;
}

double weighted_inner(const Vector& u, const Vector& v, const Vector& pi) {
  if (u.size() != pi.size() || v.size() != pi.size()) {
    throw DimensionMismatch("weighted inner product dimension mismatch");
  }
  return (u.array() * v.array() * pi.array()).sum();
}

double weighted_norm_sq(const Vector& v, const Vector& pi) { return weighted_inner(v, v, pi); }

double weighted_norm(const Vector& v, const Vector& pi) { return std::sqrt(weighted_norm_sq(v, pi)); }

std::vector<double> mixing_deviations(const Matrix& P, const Vector& pi, int horizon) {
  const Index D = P.rows();
  std::vector<double> dev;
  dev.reserve(horizon + 1);
  Matrix Pt = Matrix::Identity(D, D);
  const Matrix target = Vector::Ones(D) * pi.transpose();
  for (int t = 0; t <= horizon; ++t) {
    if (t > 0) Pt = Pt * P;
    dev.push_back((Pt - target).cwiseAbs().maxCoeff());
  }
  return dev;
}

MixingProfile mixing_constants(const Matrix& P, int horizon) {
  const auto stationary = stationary_distribution(P);
  const Index D = P.rows();

  double rho = kRhoFloor;
  if (D > 1) {
    Eigen::EigenSolver<Matrix> solver(P, false);
    auto values = solver.eigenvalues();
    Index unit = 0;
    for (Index i = 1; i < D; ++i) {
      if (std::abs(values[i] - 1.0) < std::abs(values[unit] - 1.0)) unit = i;
    }
    for (Index i = 0; i < D; ++i) {
      if (i != unit) rho = std::max(rho, std::abs(values[i]));
    }
  }
  rho = std::min(rho, 1.0 - 1e-15);

  if (horizon <= 0) {
    const double guess = std::ceil(std::log(4.0) / std::log(1.0 / rho));
    horizon = static_cast<int>(std::clamp(10.0 * guess, 20.0, 20000.0));
  }

  MixingProfile profile;
  profile.rho = rho;
  profile.horizon = horizon;

  const Index n = D;
  Matrix Pt = Matrix::Identity(n, n);
  const Matrix target = Vector::Ones(n) * stationary.pi.transpose();
  const double log_rho = std::log(rho);
  double c_p = 0.0;
  int t_mix = -1;
  for (int t = 0; t <= horizon; ++t) {
    if (t > 0) Pt = Pt * P;
    const double dev = (Pt - target).cwiseAbs().maxCoeff();
    if (t >= 1 && t_mix < 0 && dev <= 0.25) t_mix = t;
    if (dev > kMixingNoiseFloor) {
      c_p = std::max(c_p, std::exp(std::log(dev) - t * log_rho));
    } else if (t >= 1 && t_mix >= 0) {
      // The remaining powers only carry round-off.
      break;
    }
  }
  profile.c_p = std::max(c_p, kMixingNoiseFloor);
  if (t_mix < 0) {
    t_mix = static_cast<int>(std::ceil(std::log(4.0 * profile.c_p) / std::log(1.0 / rho)));
  }
  profile.t_mix = std::max(t_mix, 1);
  return profile;
}

}  // namespace vrpe
