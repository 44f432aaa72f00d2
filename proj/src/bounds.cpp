#include "vrpe/bounds.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "vrpe/error.hpp"

namespace vrpe {

double WorstCaseInstance::validity_ratio(int k) const {
  const double q = 2.0 * gamma() - 1.0;
  const double D = static_cast<double>(num_states());
  return (1.0 - std::pow(q, 2.0 * D - 2.0 * k)) / (1.0 - std::pow(q, 2.0 * D));
}

WorstCaseInstance worstcase_instance(double gamma, int D) {
  if (!(gamma > 0.5 && gamma < 1.0)) throw InvalidGamma("worst-case instance needs gamma in (1/2, 1)");
  if (D < 2) throw InvalidInstance("worst-case instance needs at least two states");
  const double stay = 1.0 / (2.0 * gamma);
  const double move = 1.0 - stay;
  const double q = 2.0 * gamma - 1.0;
  Matrix P = Matrix::Zero(D, D);
  for (int i = 0; i < D; ++i) {
    P(i, i) = stay;
    P(i, (i + D - 1) % D) = move;
  }
  Vector r = Vector::Zero(D);
  r[0] = gamma - 0.5 + (0.5 - gamma) * std::pow(q, D);
  Vector v(D);
  double power = 1.0;
  for (int i = 0; i < D; ++i) {
    power *= q;
    v[i] = power;
  }
  return WorstCaseInstance{MrpInstance::from_expected_reward(std::move(P), r, gamma), v};
}

double worstcase_initial_gap(double gamma, int D) {
  const double q = 2.0 * gamma - 1.0;
  return q * q * (1.0 - std::pow(q, 2.0 * D)) / (D * (1.0 - q * q));
}

LowerBoundValue oracle_lower_bound(const WorstCaseInstance& wc, int k, const Vector& v0) {
  if (v0.size() != wc.num_states()) throw DimensionMismatch("initial value has the wrong length");
  const Index D = wc.num_states();
  const Vector uniform = Vector::Constant(D, 1.0 / static_cast<double>(D));
  const double q = 2.0 * wc.gamma() - 1.0;
  const double gap = weighted_norm_sq(v0 - wc.v_star_closed_form, uniform);
  return LowerBoundValue{0.5 * std::pow(q, 2.0 * k) * gap, wc.valid(k)};
}

bool in_block_subspace(const Vector& v, Index head, Index tail, double tol) {
  const Index D = v.size();
  for (Index i = head; i < D - tail; ++i) {
    if (std::abs(v[i]) > tol) return false;
  }
  return true;
}

double trace_functional(const Matrix& sigma, const Matrix& M_tilde) {
  const Index d = M_tilde.rows();
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(d, d) - M_tilde);
  if (!(lu.rcond() > 1e-14)) throw SingularSystem("I - M is singular");
  const Matrix X = lu.inverse();
  return (X * sigma * X.transpose()).trace();
}

double stochastic_lower_bound(const CovarianceBundle& bundle) {
  return trace_functional(bundle.sigma, bundle.M_tilde);
}

CovarianceBundle iid_covariance(const MrpInstance& instance, const FeatureBasis& basis,
                                const Vector& omega) {
  const Index D = instance.num_states();
  if (omega.size() != D || basis.num_states() != D) throw DimensionMismatch("covariance dimension mismatch");
  if (!(omega.minCoeff() > 0.0) || std::abs(omega.sum() - 1.0) > 1e-9) {
    throw InvalidDistribution("sampling distribution must be strictly positive and sum to 1");
  }
  const FeatureBasis weighted(basis.Psi(), omega, instance.P(), instance.gamma());
  const ProjectedSolution sol = projected_fixed_point(instance, weighted);
  const Matrix& Psi = weighted.Psi();
  const double gamma = instance.gamma();
  const Index d = weighted.dim();

  Matrix second = Matrix::Zero(d, d);
  Vector mean = Vector::Zero(d);
  for (Index s = 0; s < D; ++s) {
    for (Index t = 0; t < D; ++t) {
      const double w = omega[s] * instance.P()(s, t);
      if (w <= 0.0) continue;
      const double td = sol.v_bar[s] - gamma * sol.v_bar[t] - instance.R()(s, t);
      const Vector y = td * (weighted.B_inv_sqrt() * Psi.col(s));
      second.noalias() += w * y * y.transpose();
      mean += w * y;
    }
  }
  CovarianceBundle bundle;
  bundle.kind = CovarianceKind::Iid;
  bundle.omega = omega;
  bundle.sigma = second - mean * mean.transpose();
  bundle.sigma = 0.5 * (bundle.sigma + bundle.sigma.transpose());
  bundle.M_tilde = weighted.M();
  bundle.trace_functional = stochastic_lower_bound(bundle);
  return bundle;
}

CovarianceBundle markov_covariance(const MrpInstance& instance, const FeatureBasis& basis,
                                   double tol) {
  const Index D = instance.num_states();
  if (basis.num_states() != D) throw DimensionMismatch("covariance dimension mismatch");
  const StationaryDistribution stationary = stationary_distribution(instance.P());
  const MixingProfile mixing = mixing_constants(instance.P());
  const FeatureBasis weighted(basis.Psi(), stationary.pi, instance.P(), instance.gamma());
  const ProjectedSolution sol = projected_fixed_point(instance, weighted);
  const Matrix& P = instance.P();
  const Matrix& Psi = weighted.Psi();
  const Matrix& Bis = weighted.B_inv_sqrt();
  const double gamma = instance.gamma();
  const Index d = weighted.dim();
  const Vector& pi = stationary.pi;

  const Vector g_bar = deterministic_operator(sol.theta_bar, instance, weighted);
  const Matrix phi = Bis * Psi;  // columns B^{-1/2} psi(s)
  const Vector shift = Bis * g_bar;

  Matrix gamma0 = Matrix::Zero(d, d);
  Matrix H = Matrix::Zero(d, D);
  Matrix W = Matrix::Zero(d, D);
  for (Index s = 0; s < D; ++s) {
    for (Index t = 0; t < D; ++t) {
      const double p = P(s, t);
      if (p <= 0.0) continue;
      const double td = sol.v_bar[s] - gamma * sol.v_bar[t] - instance.R()(s, t);
      const Vector z = td * phi.col(s) - shift;
      gamma0.noalias() += (pi[s] * p) * z * z.transpose();
      H.col(s) += p * z;
      W.col(t) += (pi[s] * p) * z;
    }
  }

  CovarianceBundle bundle;
  bundle.kind = CovarianceKind::MarkovStationary;
  bundle.omega = pi;
  bundle.M_tilde = weighted.M();
  if (tol <= 0.0) tol = 1e-12 * gamma0.trace();

  const Index dm = d;
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(dm, dm) - bundle.M_tilde);
  const double resolvent_sq = std::pow(Eigen::JacobiSVD<Matrix>(lu.inverse()).singularValues()(0), 2);
  const double h_norm = H.size() ? Eigen::JacobiSVD<Matrix>(H).singularValues()(0) : 0.0;
  const double w_norm = W.size() ? Eigen::JacobiSVD<Matrix>(W).singularValues()(0) : 0.0;
  const double rho = mixing.rho;
  // |trace functional of the lags beyond L| <= d ||(I-M)^{-1}||^2 sum_{t > L} 2 ||Gamma_t||
  // with ||Gamma_t|| <= ||H|| ||W|| D c_p rho^{t-1}.
  auto tail = [&](int L) {
    return static_cast<double>(d) * resolvent_sq * 2.0 * h_norm * w_norm * static_cast<double>(D) *
           mixing.c_p * std::pow(rho, L) / (1.0 - rho);
  };

  Matrix sigma = gamma0;
  Matrix X = H;
  int L = 0;
  const int max_lag = 1'000'000;
  while (L < max_lag) {
    const double bound = tail(L);
    if (bound == 0.0 || bound < tol) break;
    ++L;
    const Matrix lag = X * W.transpose();
    sigma += lag + lag.transpose();
    X = X * P.transpose();
  }
  bundle.sigma = 0.5 * (sigma + sigma.transpose());
  bundle.truncation_lag = L;
  bundle.truncation_error_bound = tail(L);
  bundle.trace_functional = stochastic_lower_bound(bundle);
  return bundle;
}

double span_residual(const std::vector<Vector>& iterates, const MrpInstance& instance) {
  if (iterates.empty()) return 0.0;
  const Index D = instance.num_states();
  const Matrix G = Matrix::Identity(D, D) - instance.gamma() * instance.P();
  const Vector& v0 = iterates.front();
  std::vector<Vector> basis;
  auto project_out = [&](Vector w) {
    // Two passes of Gram-Schmidt keep the basis orthonormal to round-off.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) w -= q.dot(w) * q;
    }
    return w;
  };
  double worst = 0.0;
  for (std::size_t k = 1; k < iterates.size(); ++k) {
    const Vector direction = G * iterates[k - 1] - instance.r();
    const Vector fresh = project_out(direction);
    const double scale = std::max(1.0, direction.norm());
    if (fresh.norm() > 1e-12 * scale) basis.push_back(fresh.normalized());
    worst = std::max(worst, project_out(iterates[k] - v0).norm());
  }
  return worst;
}

}  // namespace vrpe
