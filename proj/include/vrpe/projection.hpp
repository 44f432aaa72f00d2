#pragma once

#include "vrpe/mrp.hpp"

namespace vrpe {

/// @brief Feature matrix Psi (d x D, row i is basis vector psi_i) together
/// with its geometry under a state weighting (normally the stationary pi).
class FeatureBasis {
 public:
  /// Throws RankDeficientFeatures when lambda_min(B) <= 1e-10.
  FeatureBasis(Matrix Psi, const Vector& weights, const Matrix& P, double gamma);

  Index dim() const { return Psi_.rows(); }
  Index num_states() const { return Psi_.cols(); }

  const Matrix& Psi() const { return Psi_; }
  const Vector& weights() const { return weights_; }
  /// Gram matrix B = Psi diag(w) Psi^T.
  const Matrix& B() const { return B_; }
  const Matrix& B_sqrt() const { return B_sqrt_; }
  const Matrix& B_inv_sqrt() const { return B_inv_sqrt_; }
  /// Phi = B^{-1/2} Psi, orthonormal rows in the weighted geometry.
  const Matrix& Phi() const { return Phi_; }
  double beta() const { return beta_; }
  double mu() const { return mu_; }
  /// M = gamma Phi diag(w) P Phi^T.
  const Matrix& M() const { return M_; }
  double gamma() const { return gamma_; }

 private:
  Matrix Psi_;
  Vector weights_;
  Matrix B_;
  Matrix B_sqrt_;
  Matrix B_inv_sqrt_;
  Matrix Phi_;
  Matrix M_;
  double beta_ = 0.0;
  double mu_ = 0.0;
  double gamma_ = 0.0;
};

FeatureBasis build_feature_basis(const Matrix& Psi, const StationaryDistribution& pi,
                                 const Matrix& P, double gamma);

/// Affine operator g(theta) = A theta - b with A = Psi W (I - gamma P) Psi^T
/// and b = Psi W r.
struct LinearSystem {
  Matrix A;
  Vector b;

  Vector apply(const Vector& theta) const { return A * theta - b; }
};

LinearSystem operator_system(const MrpInstance& instance, const FeatureBasis& basis);

struct ProjectedSolution {
  Vector theta_bar;
  Vector v_bar;
  /// ||v_bar - v*||^2 in the basis weighting.
  double approx_error_sq = 0.0;
};

/// Solves Psi W Psi^T theta = gamma Psi W P Psi^T theta + Psi W r.
ProjectedSolution projected_fixed_point(const MrpInstance& instance, const FeatureBasis& basis);

/// 1 + lambda_max((I - M)^{-1} (gamma^2 I - M M^T) (I - M)^{-T}).
double approximation_factor(const Matrix& M, double gamma);

/// g(theta) = Psi Pi (Psi^T theta - r - gamma P Psi^T theta).
Vector deterministic_operator(const Vector& theta, const MrpInstance& instance,
                              const FeatureBasis& basis);

/// Dense D x D projection Phi^T Phi W onto the feature span; intended for tests.
Matrix subspace_projection(const FeatureBasis& basis);

/// Everything the algorithms and the harness need about one evaluation problem.
struct Problem {
  MrpInstance instance;
  StationaryDistribution stationary;
  FeatureBasis basis;
  Vector v_star;
  ProjectedSolution solution;
  LinearSystem system;

  /// ||Psi^T theta - v*||_Pi^2 and ||Psi^T theta - v_bar||_Pi^2.
  double error_to_vstar_sq(const Vector& theta) const;
  double error_to_vbar_sq(const Vector& theta) const;
  Vector value(const Vector& theta) const { return basis.Psi().transpose() * theta; }
};

Problem make_problem(MrpInstance instance, Matrix Psi);

}  // namespace vrpe
