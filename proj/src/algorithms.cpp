#include "vrpe/algorithms.hpp"

#include <algorithm>
#include <cmath>

#include "vrpe/error.hpp"

namespace vrpe {

namespace {

/// Records errors of the current output at grid sample counts.
class Recorder {
 public:
  Recorder(const Problem& problem, Index total, const RunOptions& options, RunTrace& trace)
      : problem_(problem), grid_(checkpoint_grid(total, options.checkpoints)), trace_(trace) {}

  /// Records once for every grid point reached by `samples`.
  void maybe(Index samples, const Vector& output) {
    bool due = false;
    while (next_ < grid_.size() && grid_[next_] <= samples) {
      ++next_;
      due = true;
    }
    if (due) record(samples, output);
  }

  void force(Index samples, const Vector& output) {
    while (next_ < grid_.size() && grid_[next_] <= samples) ++next_;
    // An epoch output supersedes a grid record taken at the same sample count.
    if (!trace_.checkpoints.empty() && trace_.checkpoints.back().samples == samples) {
      trace_.checkpoints.pop_back();
    }
    record(samples, output);
  }

 private:
  void record(Index samples, const Vector& output) {
    if (!trace_.checkpoints.empty() && trace_.checkpoints.back().samples >= samples) return;
    trace_.checkpoints.push_back(
        {samples, problem_.error_to_vstar_sq(output), problem_.error_to_vbar_sq(output)});
  }

  const Problem& problem_;
  std::vector<Index> grid_;
  std::size_t next_ = 0;
  RunTrace& trace_;
};

void check_theta0(const Problem& problem, const Vector& theta0) {
  if (theta0.size() != problem.basis.dim()) throw DimensionMismatch("initial parameter has the wrong length");
}

void enforce_strict(const Problem& problem, const EpochSchedule& schedule, const RunOptions& options,
                    Setting setting) {
  if (!options.strict) return;
  const ScheduleStats stats =
      options.stats ? *options.stats : schedule_stats(problem, setting == Setting::VrftdMarkov);
  const auto check = validate_schedule(schedule, stats, setting);
  if (!check.ok()) {
    std::string message = std::string(setting_name(setting)) + " schedule violates:";
    for (const auto& v : check.violations) message += " [" + v + "]";
    throw ScheduleInfeasible(message);
  }
}

const IidModel& require_iid(const Problem& problem, const SamplingModel& model,
                            const RunOptions& options) {
  const auto* iid = std::get_if<IidModel>(&model);
  if (!iid) throw InvalidSpec("this algorithm requires the i.i.d. observation model");
  if (options.strict) {
    const Vector& pi = problem.stationary.pi;
    if (iid->omega.size() != pi.size() || (iid->omega - pi).lpNorm<Eigen::Infinity>() > 1e-9) {
      throw ScheduleInfeasible("theorem schedules assume sampling from the stationary distribution");
    }
  }
  return *iid;
}

}  // namespace

StepsizeRule StepsizeRule::theory_diminishing(double beta, double mu, double gamma) {
  const double c = 1.0 - gamma;
  return diminishing(2.0 / (mu * c), 8.0 * beta * (1.0 + gamma) * (1.0 + gamma) / (mu * c * c));
}

std::vector<Index> checkpoint_grid(Index total, int count) {
  std::vector<Index> grid;
  if (total <= 0 || count <= 0) return grid;
  for (int j = 1; j <= count; ++j) {
    const double x = std::pow(static_cast<double>(total), static_cast<double>(j) / count);
    const Index n = std::clamp<Index>(static_cast<Index>(std::llround(x)), 1, total);
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  if (grid.back() != total) grid.push_back(total);
  return grid;
}

RunTrace run_td_family(const Problem& problem, OperatorOracle& oracle, const TdOptions& td,
                       const Vector& theta0, const RunOptions& options) {
  check_theta0(problem, theta0);
  if (td.lambda != 0 && td.lambda != 1) throw InvalidSpec("lambda must be 0 or 1");
  if (td.total_samples < 0) throw InvalidSpec("sample budget must be nonnegative");
  if (!(td.tail_fraction >= 0.0 && td.tail_fraction < 1.0)) {
    throw InvalidSpec("tail fraction must lie in [0, 1)");
  }
  RunTrace trace;
  Recorder recorder(problem, td.total_samples, options, trace);
  const Index start = oracle.samples_drawn();
  const Index n = td.total_samples;
  const Index tail_len = static_cast<Index>(std::floor(td.tail_fraction * static_cast<double>(n)));
  const Index tail_start = n - tail_len;

  Vector theta = theta0;
  Vector tail_sum = Vector::Zero(theta.size());
  Index tail_count = 0;
  Vector g_prev;
  if (options.log_iterates) trace.iterate_log.push_back(theta);
  for (Index t = 0; t < n; ++t) {
    oracle.collect(1, 0);
    const Vector g = oracle.evaluate(theta);
    if (t == 0) g_prev = g;
    const double eta = td.stepsize.at(t);
    theta -= eta * (g + static_cast<double>(td.lambda) * (g - g_prev));
    g_prev = g;
    if (options.log_iterates) trace.iterate_log.push_back(theta);
    if (t + 1 > tail_start && tail_len > 0) {
      tail_sum += theta;
      ++tail_count;
    }
    if (tail_count > 0) {
      recorder.maybe(t + 1, tail_sum / static_cast<double>(tail_count));
    } else {
      recorder.maybe(t + 1, theta);
    }
  }
  trace.final_theta = tail_count > 0 ? Vector(tail_sum / static_cast<double>(tail_count)) : theta;
  trace.samples_used = oracle.samples_drawn() - start;
  return trace;
}

RunTrace run_td_family(const Problem& problem, const SamplingModel& model, const TdOptions& td,
                       const Vector& theta0, CounterRng rng, const RunOptions& options) {
  auto source = make_source(problem.instance, model, rng);
  SampledOracle oracle(problem.basis, problem.instance.gamma(), *source);
  return run_td_family(problem, oracle, td, theta0, options);
}

RunTrace run_vrtd(const Problem& problem, OperatorOracle& oracle, const EpochSchedule& schedule,
                  const Vector& theta0, const RunOptions& options) {
  check_theta0(problem, theta0);
  schedule.check_structure();
  if (schedule.m != 1 || schedule.m0 != 0) throw InvalidSpec("VRTD takes one sample per inner step");
  enforce_strict(problem, schedule, options, Setting::Vrtd);

  RunTrace trace;
  Recorder recorder(problem, schedule.total_samples(), options, trace);
  const Index start = oracle.samples_drawn();
  const double eta = schedule.eta;
  const double gamma = problem.instance.gamma();
  const double beta = problem.basis.beta();
  const double w_inner = eta * (1.0 - gamma);
  const double w_last = 1.0 / beta;
  const double w_total = static_cast<double>(schedule.T) * w_inner + w_last;

  Vector anchor = theta0;
  if (options.log_iterates) trace.iterate_log.push_back(anchor);
  for (int k = 0; k < schedule.K; ++k) {
    oracle.collect(schedule.N[k], schedule.n0);
    const Vector g_anchor = oracle.evaluate(anchor);
    Vector theta = anchor;
    Vector weighted = Vector::Zero(theta.size());
    for (Index t = 1; t <= schedule.T; ++t) {
      weighted += w_inner * theta;
      oracle.collect(1, 0);
      theta -= eta * (oracle.evaluate_difference(theta - anchor) + g_anchor);
      if (options.log_iterates) trace.iterate_log.push_back(theta);
      recorder.maybe(oracle.samples_drawn() - start, anchor);
    }
    weighted += w_last * theta;
    anchor = weighted / w_total;
    if (options.log_iterates) trace.iterate_log.push_back(anchor);
    trace.epoch_outputs.push_back(anchor);
    recorder.force(oracle.samples_drawn() - start, anchor);
  }
  trace.final_theta = anchor;
  trace.samples_used = oracle.samples_drawn() - start;
  return trace;
}

RunTrace run_vrtd(const Problem& problem, const SamplingModel& model, const EpochSchedule& schedule,
                  const Vector& theta0, CounterRng rng, const RunOptions& options) {
  const IidModel& iid = require_iid(problem, model, options);
  IidSource source(problem.instance, iid.omega, rng);
  SampledOracle oracle(problem.basis, problem.instance.gamma(), source);
  return run_vrtd(problem, oracle, schedule, theta0, options);
}

RunTrace run_vrftd(const Problem& problem, OperatorOracle& oracle, const EpochSchedule& schedule,
                   const Vector& theta0, const RunOptions& options, Setting setting) {
  check_theta0(problem, theta0);
  schedule.check_structure();
  enforce_strict(problem, schedule, options, setting);

  RunTrace trace;
  Recorder recorder(problem, schedule.total_samples(), options, trace);
  const Index start = oracle.samples_drawn();
  const double eta = schedule.eta;
  const double lambda = static_cast<double>(schedule.lambda);

  Vector anchor = theta0;
  if (options.log_iterates) trace.iterate_log.push_back(anchor);
  for (int k = 0; k < schedule.K; ++k) {
    oracle.collect(schedule.N[k], schedule.n0);
    const Vector g_anchor = oracle.evaluate(anchor);
    Vector theta = anchor;
    Vector sum = Vector::Zero(theta.size());
    Vector F_prev;
    for (Index t = 1; t <= schedule.T; ++t) {
      oracle.collect(schedule.m, schedule.m0);
      const Vector F = oracle.evaluate_difference(theta - anchor) + g_anchor;
      if (t == 1) F_prev = F;
      theta -= eta * (F + lambda * (F - F_prev));
      F_prev = F;
      sum += theta;
      if (options.log_iterates) trace.iterate_log.push_back(theta);
      recorder.maybe(oracle.samples_drawn() - start, anchor);
    }
    anchor = sum / static_cast<double>(schedule.T);
    if (options.log_iterates) trace.iterate_log.push_back(anchor);
    trace.epoch_outputs.push_back(anchor);
    recorder.force(oracle.samples_drawn() - start, anchor);
  }
  trace.final_theta = anchor;
  trace.samples_used = oracle.samples_drawn() - start;
  return trace;
}

RunTrace run_vrftd_iid(const Problem& problem, const SamplingModel& model,
                       const EpochSchedule& schedule, const Vector& theta0, CounterRng rng,
                       const RunOptions& options) {
  const IidModel& iid = require_iid(problem, model, options);
  if (schedule.m0 != 0 || schedule.n0 != 0) throw InvalidSpec("i.i.d. runs take no burn-in");
  IidSource source(problem.instance, iid.omega, rng);
  SampledOracle oracle(problem.basis, problem.instance.gamma(), source);
  return run_vrftd(problem, oracle, schedule, theta0, options, Setting::VrftdIid);
}

RunTrace run_vrftd_markov(const Problem& problem, const SamplingModel& model,
                          const EpochSchedule& schedule, const Vector& theta0, CounterRng rng,
                          const RunOptions& options) {
  const auto* markov = std::get_if<MarkovModel>(&model);
  if (!markov) throw InvalidSpec("this algorithm requires the Markovian observation model");
  MarkovSource source(problem.instance, *markov, rng);
  SampledOracle oracle(problem.basis, problem.instance.gamma(), source);
  return run_vrftd(problem, oracle, schedule, theta0, options, Setting::VrftdMarkov);
}

}  // namespace vrpe
