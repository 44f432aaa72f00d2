#pragma once

#include <vector>

#include "vrpe/mrp.hpp"
#include "vrpe/projection.hpp"

namespace vrpe {

/// @brief Cyclic hard instance for methods whose iterates stay in the span of
/// past operator evaluations.
struct WorstCaseInstance {
  MrpInstance instance;
  /// (v*)_i = (2 gamma - 1)^i, i = 1..D.
  Vector v_star_closed_form;

  double gamma() const { return instance.gamma(); }
  Index num_states() const { return instance.num_states(); }
  /// (1 - q^{2D-2k}) / (1 - q^{2D}) with q = 2 gamma - 1.
  double validity_ratio(int k) const;
  bool valid(int k) const { return validity_ratio(k) >= 0.5; }
};

/// Throws InvalidGamma unless gamma in (1/2, 1); InvalidInstance unless D >= 2.
WorstCaseInstance worstcase_instance(double gamma, int D);

/// ||v0 - v*||_Pi^2 for v0 = 0 in closed form.
double worstcase_initial_gap(double gamma, int D);

struct LowerBoundValue {
  double rhs = 0.0;
  bool valid = false;
};

/// rhs = (1/2) (2 gamma - 1)^{2k} ||v0 - v*||_Pi^2.
LowerBoundValue oracle_lower_bound(const WorstCaseInstance& wc, int k, const Vector& v0);

/// True when only the first `head` and last `tail` coordinates of v can be
/// nonzero (entries below tol elsewhere).
bool in_block_subspace(const Vector& v, Index head, Index tail, double tol = 0.0);

enum class CovarianceKind { Iid, MarkovStationary };

/// @brief Noise covariance at the projected solution and its trace functional.
struct CovarianceBundle {
  CovarianceKind kind = CovarianceKind::Iid;
  Vector omega;
  Matrix sigma;
  /// Projected transition in the sampling geometry.
  Matrix M_tilde;
  double trace_functional = 0.0;
  int truncation_lag = 0;
  double truncation_error_bound = 0.0;
};

/// Exact covariance of y(s, s') = B~^{-1/2} (<psi(s) - gamma psi(s'), theta_bar> - R(s, s')) psi(s)
/// under (s, s') ~ omega_s P(s, s'); theta_bar solved in the omega geometry.
CovarianceBundle iid_covariance(const MrpInstance& instance, const FeatureBasis& basis,
                                const Vector& omega);

/// Stationary long-run covariance Gamma_0 + sum_{t >= 1} (Gamma_t + Gamma_t^T),
/// truncated at the first lag whose geometric tail bound on the trace
/// functional drops below tol (tol <= 0 selects 1e-12 trace(Gamma_0)).
CovarianceBundle markov_covariance(const MrpInstance& instance, const FeatureBasis& basis,
                                   double tol = 0.0);

/// trace{(I - M~)^{-1} Sigma (I - M~)^{-T}}.
double stochastic_lower_bound(const CovarianceBundle& bundle);
double trace_functional(const Matrix& sigma, const Matrix& M_tilde);

/// Max over k of the least-squares distance of v_k from
/// v_0 + span{G(v_0), ..., G(v_{k-1})}, G(v) = (I - gamma P) v - r.
double span_residual(const std::vector<Vector>& iterates, const MrpInstance& instance);

}  // namespace vrpe
