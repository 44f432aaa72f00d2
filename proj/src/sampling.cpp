#include "vrpe/sampling.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "vrpe/error.hpp"

namespace vrpe {

DiscreteSampler::DiscreteSampler(const Vector& probabilities) {
  if (probabilities.size() == 0) throw InvalidDistribution("empty distribution");
  if (!probabilities.allFinite() || probabilities.minCoeff() < 0.0) {
    throw InvalidDistribution("probabilities must be finite and nonnegative");
  }
  if (std::abs(probabilities.sum() - 1.0) > 1e-9) {
    throw InvalidDistribution("probabilities must sum to 1");
  }
  double total = 0.0;
  for (Index i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] > 0.0) {
      total += probabilities[i];
      cdf_.push_back(total);
      support_.push_back(i);
    }
  }
}

Index DiscreteSampler::draw(CounterRng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto k = std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1);
  return support_[k];
}

TransitionSampler::TransitionSampler(const MrpInstance& instance) : instance_(&instance) {
  rows_.reserve(instance.num_states());
  for (Index s = 0; s < instance.num_states(); ++s) {
    rows_.emplace_back(Vector(instance.P().row(s).transpose()));
  }
}

Observation TransitionSampler::step(Index s, CounterRng& rng) const {
  const Index s_next = rows_[s].draw(rng);
  return Observation{s, s_next, instance_->R()(s, s_next)};
}

namespace {

DiscreteSampler checked_omega(const MrpInstance& instance, const Vector& omega) {
  if (omega.size() != instance.num_states()) {
    throw InvalidDistribution("sampling distribution has the wrong length");
  }
  if (!(omega.minCoeff() > 0.0)) {
    throw InvalidDistribution("sampling distribution must be strictly positive");
  }
  return DiscreteSampler(omega);
}

}  // namespace

IidSource::IidSource(const MrpInstance& instance, const Vector& omega, CounterRng rng)
    : transitions_(instance), origin_(checked_omega(instance, omega)), rng_(rng) {}

Observation IidSource::next() {
  const Index s = origin_.draw(rng_);
  return transitions_.step(s, rng_);
}

MarkovSource::MarkovSource(const MrpInstance& instance, const MarkovModel& model, CounterRng rng)
    : transitions_(instance), rng_(rng) {
  const Index D = instance.num_states();
  if (model.initial_state >= 0) {
    if (model.initial_state >= D) throw InvalidDistribution("initial state out of range");
    state_ = model.initial_state;
  } else {
    if (model.initial_distribution.size() != D) {
      throw InvalidDistribution("initial distribution has the wrong length");
    }
    state_ = DiscreteSampler(model.initial_distribution).draw(rng_);
  }
}

Observation MarkovSource::next() {
  const Observation xi = transitions_.step(state_, rng_);
  state_ = xi.s_next;
  return xi;
}

std::unique_ptr<ObservationSource> make_source(const MrpInstance& instance,
                                               const SamplingModel& model, CounterRng rng) {
  if (const auto* iid = std::get_if<IidModel>(&model)) {
    return std::make_unique<IidSource>(instance, iid->omega, rng);
  }
  return std::make_unique<MarkovSource>(instance, std::get<MarkovModel>(model), rng);
}

Observation sample_iid(const MrpInstance& instance, const Vector& omega, CounterRng& rng) {
  // Degenerate origin distributions are allowed here (a fixed starting state
  // is handy for checking single kernel rows); sources require omega > 0.
  if (omega.size() != instance.num_states()) {
    throw InvalidDistribution("sampling distribution has the wrong length");
  }
  const Index s = DiscreteSampler(omega).draw(rng);
  const Vector row = instance.P().row(s).transpose();
  const Index s_next = DiscreteSampler(row).draw(rng);
  return Observation{s, s_next, instance.R()(s, s_next)};
}

std::vector<Observation> markov_stream(const MrpInstance& instance, const MarkovModel& init,
                                       Index length, CounterRng& rng) {
  const auto report = ergodicity_check(instance.P());
  if (!report) throw NonErgodicChain(report.diagnostic);
  std::vector<Observation> out;
  if (length <= 0) return out;
  out.reserve(length);
  const TransitionSampler transitions(instance);
  Index state = init.initial_state;
  if (state < 0) {
    if (init.initial_distribution.size() != instance.num_states()) {
      throw InvalidDistribution("initial distribution has the wrong length");
    }
    state = DiscreteSampler(init.initial_distribution).draw(rng);
  } else if (state >= instance.num_states()) {
    throw InvalidDistribution("initial state out of range");
  }
  for (Index t = 0; t < length; ++t) {
    out.push_back(transitions.step(state, rng));
    state = out.back().s_next;
  }
  return out;
}

Vector stochastic_operator(const Vector& theta, const Observation& xi, const Matrix& Psi,
                           double gamma) {
  if (theta.size() != Psi.rows() || xi.s < 0 || xi.s >= Psi.cols() || xi.s_next < 0 ||
      xi.s_next >= Psi.cols()) {
    throw DimensionMismatch("stochastic operator dimension mismatch");
  }
  const double td = Psi.col(xi.s).dot(theta) - xi.reward - gamma * Psi.col(xi.s_next).dot(theta);
  return td * Psi.col(xi.s);
}

double variance_parameter(const MrpInstance& instance, const FeatureBasis& basis,
                          const Vector& omega) {
  const Index D = instance.num_states();
  const Index d = basis.dim();
  if (omega.size() != D || basis.num_states() != D) {
    throw DimensionMismatch("variance parameter dimension mismatch");
  }
  const Matrix& Psi = basis.Psi();
  const double gamma = instance.gamma();
  Matrix second = Matrix::Zero(d, d);
  Matrix mean = Matrix::Zero(d, d);
  for (Index s = 0; s < D; ++s) {
    const double norm_sq = Psi.col(s).squaredNorm();
    for (Index t = 0; t < D; ++t) {
      const double w = omega[s] * instance.P()(s, t);
      if (w <= 0.0) continue;
      const Vector u = Psi.col(s) - gamma * Psi.col(t);
      second.noalias() += (w * norm_sq) * u * u.transpose();
      mean.noalias() += w * Psi.col(s) * u.transpose();
    }
  }
  Matrix C = basis.B_inv_sqrt() * (second - mean.transpose() * mean) * basis.B_inv_sqrt();
  C = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(C, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().maxCoeff());
}

double bias_constant(const MrpInstance& instance, const FeatureBasis& basis,
                     const MixingProfile& mixing, const StationaryDistribution& pi) {
  const Index D = instance.num_states();
  const double psi_norm = Eigen::JacobiSVD<Matrix>(basis.Psi()).singularValues()(0);
  const Matrix G = Matrix::Identity(D, D) - instance.gamma() * instance.P();
  const double g_norm = Eigen::JacobiSVD<Matrix>(G).singularValues()(0);
  return mixing.c_p / std::sqrt(pi.min()) * psi_norm * g_norm;
}

double bias_constant(const MrpInstance& instance, const FeatureBasis& basis) {
  const auto pi = stationary_distribution(instance.P());
  return bias_constant(instance, basis, mixing_constants(instance.P()), pi);
}

}  // namespace vrpe
