#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace vrpe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// @brief Finite Markov reward process (P, R, gamma) with cached expected reward.
class MrpInstance {
 public:
  /// Validates P (row-stochastic within 1e-12), R (same shape) and gamma in (0, 1).
  MrpInstance(Matrix P, Matrix R, double gamma);

  /// Builds an instance whose transition reward depends only on the origin
  /// state: R(s, s') = r(s).
  static MrpInstance from_expected_reward(Matrix P, const Vector& r, double gamma);

  Index num_states() const { return P_.rows(); }
  const Matrix& P() const { return P_; }
  const Matrix& R() const { return R_; }
  double gamma() const { return gamma_; }
  /// r(s) = sum_{s'} P(s, s') R(s, s').
  const Vector& r() const { return r_; }

 private:
  Matrix P_;
  Matrix R_;
  double gamma_;
  Vector r_;
};

struct StationaryDistribution {
  Vector pi;

  auto Pi() const { return pi.asDiagonal(); }
  double min() const { return pi.minCoeff(); }
};

struct MixingProfile {
  double rho = 0.0;
  double c_p = 0.0;
  int t_mix = 1;
  /// Largest t at which the geometric bound was fitted and checked.
  int horizon = 0;
};

struct ErgodicityReport {
  bool ergodic = false;
  bool irreducible = false;
  int period = 0;
  std::string diagnostic;

  explicit operator bool() const { return ergodic; }
};

/// Strong connectivity plus aperiodicity of the positive-entry graph of P.
ErgodicityReport ergodicity_check(const Matrix& P);

/// Throws NonErgodicChain for reducible or periodic chains.
StationaryDistribution stationary_distribution(const Matrix& P);

/// v* = (I - gamma P)^{-1} r.
Vector true_value_function(const MrpInstance& instance);

double weighted_inner(const Vector& u, const Vector& v, const Vector& pi);
double weighted_norm_sq(const Vector& v, const Vector& pi);
double weighted_norm(const Vector& v, const Vector& pi);

/// Largest deviation max_s ||P^t(s,.) - pi||_inf for t = 0..horizon.
std::vector<double> mixing_deviations(const Matrix& P, const Vector& pi, int horizon);

/// Spectral rate rho (second-largest eigenvalue modulus, floored at 1e-12)
/// with c_p fitted so that the deviation at every t <= horizon stays below
/// c_p rho^t. horizon <= 0 selects ten times a spectral mixing-time guess.
MixingProfile mixing_constants(const Matrix& P, int horizon = 0);

/// Deviations at or below this level are treated as round-off when fitting c_p.
inline constexpr double kMixingNoiseFloor = 1e-13;

}  // namespace vrpe
