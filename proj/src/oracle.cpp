#include "vrpe/oracle.hpp"

#include "vrpe/error.hpp"

namespace vrpe {

SampledOracle::SampledOracle(const FeatureBasis& basis, double gamma, ObservationSource& source)
    : basis_(&basis), gamma_(gamma), source_(&source) {}

void SampledOracle::collect(Index count, Index burn_in) {
  if (count <= 0 || burn_in < 0 || burn_in >= count) {
    throw InvalidSpec("batch must keep at least one observation after burn-in");
  }
  scratch_.resize(count);
  source_->fill(scratch_);
  batch_.assign(scratch_.begin() + burn_in, scratch_.end());
  drawn_ += count;
}

Vector SampledOracle::average(const Vector& theta, bool with_reward) const {
  if (batch_.empty()) throw InvalidSpec("oracle evaluated before any batch was collected");
  const Matrix& Psi = basis_->Psi();
  const Index n = static_cast<Index>(batch_.size());
  if (n == 1) {
    const auto& xi = batch_.front();
    double td = Psi.col(xi.s).dot(theta) - gamma_ * Psi.col(xi.s_next).dot(theta);
    if (with_reward) td -= xi.reward;
    return td * Psi.col(xi.s);
  }
  // Large batches: evaluate values once per state and accumulate per-state
  // weights, which costs O(n + dD) instead of O(nd).
  const Index D = Psi.cols();
  if (n >= D) {
    const Vector v = Psi.transpose() * theta;
    Vector weight = Vector::Zero(D);
    for (const auto& xi : batch_) {
      double td = v[xi.s] - gamma_ * v[xi.s_next];
      if (with_reward) td -= xi.reward;
      weight[xi.s] += td;
    }
    return Psi * weight / static_cast<double>(n);
  }
  Vector out = Vector::Zero(Psi.rows());
  for (const auto& xi : batch_) {
    double td = Psi.col(xi.s).dot(theta) - gamma_ * Psi.col(xi.s_next).dot(theta);
    if (with_reward) td -= xi.reward;
    out.noalias() += td * Psi.col(xi.s);
  }
  return out / static_cast<double>(n);
}

Vector SampledOracle::evaluate(const Vector& theta) const { return average(theta, true); }

Vector SampledOracle::evaluate_difference(const Vector& delta) const {
  return average(delta, false);
}

void ExactOracle::collect(Index count, Index burn_in) {
  if (count <= 0 || burn_in < 0 || burn_in >= count) {
    throw InvalidSpec("batch must keep at least one observation after burn-in");
  }
  drawn_ += count;
}

}  // namespace vrpe
