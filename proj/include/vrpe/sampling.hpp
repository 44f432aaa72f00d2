#pragma once

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "vrpe/mrp.hpp"
#include "vrpe/projection.hpp"
#include "vrpe/rng.hpp"

namespace vrpe {

struct Observation {
  Index s = 0;
  Index s_next = 0;
  double reward = 0.0;

  bool operator==(const Observation&) const = default;
};

/// Inverse-CDF sampler over a fixed finite distribution.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  /// Throws InvalidDistribution unless weights are nonnegative and sum to 1.
  explicit DiscreteSampler(const Vector& probabilities);

  Index draw(CounterRng& rng) const;
  Index size() const { return static_cast<Index>(cdf_.size()); }

 private:
  std::vector<double> cdf_;
  std::vector<Index> support_;
};

/// Per-row samplers for the transition kernel of an instance.
class TransitionSampler {
 public:
  explicit TransitionSampler(const MrpInstance& instance);

  Observation step(Index s, CounterRng& rng) const;
  const MrpInstance& instance() const { return *instance_; }

 private:
  const MrpInstance* instance_;
  std::vector<DiscreteSampler> rows_;
};

struct IidModel {
  Vector omega;
};

/// Markovian model: the trajectory starts from a fixed state (when
/// initial_state >= 0) or from a draw of initial_distribution.
struct MarkovModel {
  Index initial_state = -1;
  Vector initial_distribution;
};

using SamplingModel = std::variant<IidModel, MarkovModel>;

/// Stream of observation tuples; one source belongs to one run.
class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  virtual Observation next() = 0;
  virtual void fill(std::span<Observation> out) {
    for (auto& o : out) o = next();
  }
};

class IidSource : public ObservationSource {
 public:
  IidSource(const MrpInstance& instance, const Vector& omega, CounterRng rng);
  Observation next() override;

 private:
  TransitionSampler transitions_;
  DiscreteSampler origin_;
  CounterRng rng_;
};

/// Single continuous trajectory: consecutive tuples share a state.
class MarkovSource : public ObservationSource {
 public:
  MarkovSource(const MrpInstance& instance, const MarkovModel& model, CounterRng rng);
  Observation next() override;
  Index state() const { return state_; }

 private:
  TransitionSampler transitions_;
  CounterRng rng_;
  Index state_ = 0;
};

/// The instance must outlive the returned source.
std::unique_ptr<ObservationSource> make_source(const MrpInstance& instance,
                                               const SamplingModel& model, CounterRng rng);

Observation sample_iid(const MrpInstance& instance, const Vector& omega, CounterRng& rng);

/// Throws NonErgodicChain for non-ergodic kernels.
std::vector<Observation> markov_stream(const MrpInstance& instance, const MarkovModel& init,
                                       Index length, CounterRng& rng);

/// g~(theta, xi) = (<psi(s), theta> - R - gamma <psi(s'), theta>) psi(s).
Vector stochastic_operator(const Vector& theta, const Observation& xi, const Matrix& Psi,
                           double gamma);

/// Tightest constant in the operator-difference variance bound:
/// lambda_max(B^{-1/2} (E[A^T A] - Abar^T Abar) B^{-1/2}) with
/// A(xi) = psi(s) (psi(s) - gamma psi(s'))^T and xi weighted by omega_s P(s, s').
double variance_parameter(const MrpInstance& instance, const FeatureBasis& basis,
                          const Vector& omega);

/// C_M = c_p / sqrt(min pi) * ||Psi||_2 * ||I - gamma P||_2.
double bias_constant(const MrpInstance& instance, const FeatureBasis& basis,
                     const MixingProfile& mixing, const StationaryDistribution& pi);
double bias_constant(const MrpInstance& instance, const FeatureBasis& basis);

}  // namespace vrpe
