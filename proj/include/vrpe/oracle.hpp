#pragma once

#include <vector>

#include "vrpe/projection.hpp"
#include "vrpe/sampling.hpp"

namespace vrpe {

/// Batch-averaged access to the TD operator. collect() fixes a batch; the
/// evaluate calls then average over the retained part of that batch.
class OperatorOracle {
 public:
  virtual ~OperatorOracle() = default;

  /// Consumes `count` observations and keeps the last count - burn_in.
  virtual void collect(Index count, Index burn_in = 0) = 0;
  /// Batch average of g~(theta, xi).
  virtual Vector evaluate(const Vector& theta) const = 0;
  /// Batch average of g~(theta, xi) - g~(theta', xi) for delta = theta - theta';
  /// rewards cancel so only the linear part is applied.
  virtual Vector evaluate_difference(const Vector& delta) const = 0;
  virtual Index samples_drawn() const = 0;
};

class SampledOracle : public OperatorOracle {
 public:
  /// basis and source must outlive the oracle.
  SampledOracle(const FeatureBasis& basis, double gamma, ObservationSource& source);

  void collect(Index count, Index burn_in = 0) override;
  Vector evaluate(const Vector& theta) const override;
  Vector evaluate_difference(const Vector& delta) const override;
  Index samples_drawn() const override { return drawn_; }

  const std::vector<Observation>& batch() const { return batch_; }

 private:
  Vector average(const Vector& theta, bool with_reward) const;

  const FeatureBasis* basis_;
  double gamma_;
  ObservationSource* source_;
  std::vector<Observation> scratch_;
  std::vector<Observation> batch_;
  Index drawn_ = 0;
};

/// Noiseless oracle returning g(theta) exactly; collect() only counts calls.
class ExactOracle : public OperatorOracle {
 public:
  explicit ExactOracle(LinearSystem system) : system_(std::move(system)) {}

  void collect(Index count, Index burn_in = 0) override;
  Vector evaluate(const Vector& theta) const override { return system_.apply(theta); }
  Vector evaluate_difference(const Vector& delta) const override { return system_.A * delta; }
  Index samples_drawn() const override { return drawn_; }

 private:
  LinearSystem system_;
  Index drawn_ = 0;
};

}  // namespace vrpe
