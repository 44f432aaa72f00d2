#include "vrpe/projection.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "vrpe/error.hpp"

namespace vrpe {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kEigenFloor = 1e-12;

Vector solve_checked(const Matrix& A, const Vector& b, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(A);
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0 || !(lu.rcond() > 1e-14)) {
    throw SingularSystem(std::string(what) + " is singular");
  }
  Vector x = lu.solve(b);
  x += lu.solve(b - A * x);
  const double residual = (A * x - b).lpNorm<Eigen::Infinity>();
  const double tol = 1e-10 * std::max(1.0, scale * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  if (!x.allFinite() || residual > tol) {
    throw SingularSystem(std::string(what) + " is numerically singular");
  }
  return x;
}

}  // namespace

FeatureBasis::FeatureBasis(Matrix Psi, const Vector& weights, const Matrix& P, double gamma)
    : Psi_(std::move(Psi)), weights_(weights), gamma_(gamma) {
  const Index D = Psi_.cols();
  if (weights_.size() != D || P.rows() != D || P.cols() != D) {
    throw DimensionMismatch("feature matrix must have one column per state");
  }
  if (Psi_.rows() == 0 || Psi_.rows() > D) {
    throw RankDeficientFeatures("feature dimension must be between 1 and the number of states");
  }
  B_ = Psi_ * weights_.asDiagonal() * Psi_.transpose();
  B_ = 0.5 * (B_ + B_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(B_);
  const Vector lambda = eig.eigenvalues();
  mu_ = lambda.minCoeff();
  beta_ = lambda.maxCoeff();
  if (!(mu_ > kRankTol)) {
    throw RankDeficientFeatures("Gram matrix smallest eigenvalue " + std::to_string(mu_) +
                                " is below 1e-10");
  }
  const Vector floored = lambda.cwiseMax(kEigenFloor);
  const Matrix& V = eig.eigenvectors();
  B_sqrt_ = V * floored.cwiseSqrt().asDiagonal() * V.transpose();
  B_inv_sqrt_ = V * floored.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  Phi_ = B_inv_sqrt_ * Psi_;
  M_ = gamma_ * Phi_ * weights_.asDiagonal() * P * Phi_.transpose();
}

FeatureBasis build_feature_basis(const Matrix& Psi, const StationaryDistribution& pi,
                                 const Matrix& P, double gamma) {
  return FeatureBasis(Psi, pi.pi, P, gamma);
}

LinearSystem operator_system(const MrpInstance& instance, const FeatureBasis& basis) {
  const Index D = instance.num_states();
  if (basis.num_states() != D) throw DimensionMismatch("basis and instance disagree on D");
  const Matrix PsiW = basis.Psi() * basis.weights().asDiagonal();
  LinearSystem sys;
  sys.A = PsiW * (Matrix::Identity(D, D) - instance.gamma() * instance.P()) * basis.Psi().transpose();
  sys.b = PsiW * instance.r();
  return sys;
}

ProjectedSolution projected_fixed_point(const MrpInstance& instance, const FeatureBasis& basis) {
  const LinearSystem sys = operator_system(instance, basis);
  ProjectedSolution sol;
  sol.theta_bar = solve_checked(sys.A, sys.b, "projected fixed-point system");
  sol.v_bar = basis.Psi().transpose() * sol.theta_bar;
  const Vector v_star = true_value_function(instance);
  sol.approx_error_sq = weighted_norm_sq(sol.v_bar - v_star, basis.weights());
  return sol;
}

double approximation_factor(const Matrix& M, double gamma) {
  const Index d = M.rows();
  const Matrix I = Matrix::Identity(d, d);
  Eigen::PartialPivLU<Matrix> lu(I - M);
  if (!(lu.rcond() > 1e-14)) throw SingularSystem("I - M is singular");
  const Matrix inv = lu.inverse();
  Matrix S = inv * (gamma * gamma * I - M * M.transpose()) * inv.transpose();
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  return 1.0 + eig.eigenvalues().maxCoeff();
}

Vector deterministic_operator(const Vector& theta, const MrpInstance& instance,
                              const FeatureBasis& basis) {
  if (theta.size() != basis.dim() || basis.num_states() != instance.num_states()) {
    throw DimensionMismatch("deterministic operator dimension mismatch");
  }
  const Vector v = basis.Psi().transpose() * theta;
  const Vector td = v - instance.r() - instance.gamma() * (instance.P() * v);
  return basis.Psi() * basis.weights().cwiseProduct(td);
}

Matrix subspace_projection(const FeatureBasis& basis) {
  return basis.Phi().transpose() * basis.Phi() * basis.weights().asDiagonal();
}

double Problem::error_to_vstar_sq(const Vector& theta) const {
  return weighted_norm_sq(value(theta) - v_star, stationary.pi);
}

double Problem::error_to_vbar_sq(const Vector& theta) const {
  return weighted_norm_sq(value(theta) - solution.v_bar, stationary.pi);
}

Problem make_problem(MrpInstance instance, Matrix Psi) {
  StationaryDistribution stationary = stationary_distribution(instance.P());
  FeatureBasis basis(std::move(Psi), stationary.pi, instance.P(), instance.gamma());
  Vector v_star = true_value_function(instance);
  ProjectedSolution solution = projected_fixed_point(instance, basis);
  LinearSystem system = operator_system(instance, basis);
  return Problem{std::move(instance), std::move(stationary), std::move(basis),
                 std::move(v_star),   std::move(solution),   std::move(system)};
}

}  // namespace vrpe
