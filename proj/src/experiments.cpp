#include "vrpe/experiments.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "vrpe/error.hpp"
#include "vrpe/gridworld.hpp"
#include "vrpe/sampling.hpp"
#include "vrpe/serialization.hpp"

namespace vrpe {

MrpInstance two_state_instance(double gamma) {
  const double stay = (2.0 * gamma - 1.0) / gamma;
  const double flip = (1.0 - gamma) / gamma;
  Matrix P(2, 2);
  P << stay, flip, flip, stay;
  return MrpInstance::from_expected_reward(P, Vector{{1.0, -1.0}}, gamma);
}

Problem two_state_problem(double gamma) {
  return make_problem(two_state_instance(gamma), std::sqrt(2.0) * Matrix::Identity(2, 2));
}

MrpInstance random_ergodic_instance(Index D, double gamma, CounterRng& rng) {
  Matrix P = Matrix::Zero(D, D);
  for (Index i = 0; i < D; ++i) {
    for (Index j = 0; j < D; ++j) {
      const bool required = j == i || j == (i + 1) % D;
      if (required || rng.uniform() < 0.4) P(i, j) = 0.1 + rng.uniform();
    }
    P.row(i) /= P.row(i).sum();
  }
  Matrix R(D, D);
  for (Index i = 0; i < D; ++i) {
    for (Index j = 0; j < D; ++j) R(i, j) = rng.normal();
  }
  return MrpInstance(std::move(P), std::move(R), gamma);
}

EpochSchedule budgeted_schedule(Index budget, int K, double eta, int lambda, Index m,
                                double recenter_fraction, Averaging averaging, Index m0, Index n0) {
  if (K < 1 || m < 1 || !(recenter_fraction > 0.0 && recenter_fraction < 1.0)) {
    throw InvalidSpec("budgeted schedule parameters out of range");
  }
  EpochSchedule s;
  s.K = K;
  s.eta = eta;
  s.lambda = lambda;
  s.m = m;
  s.m0 = m0;
  s.n0 = n0;
  s.averaging = averaging;
  const double inner_share = (1.0 - recenter_fraction) * static_cast<double>(budget);
  s.T = std::max<Index>(1, static_cast<Index>(inner_share / (K * m)));
  const Index recenter_total = budget - K * s.T * m;
  double weight_sum = 0.0;
  for (int k = 1; k <= K; ++k) weight_sum += std::ldexp(1.0, k);
  Index assigned = 0;
  for (int k = 1; k <= K; ++k) {
    Index n = static_cast<Index>(std::floor(recenter_total * std::ldexp(1.0, k) / weight_sum));
    if (k == K) n = recenter_total - assigned;
    n = std::max<Index>(n, n0 + 1);
    s.N.push_back(n);
    assigned += n;
  }
  s.target_N = budget;
  s.check_structure();
  return s;
}

Index sweep_budget(double gamma, double scale) {
  return ceil_tol(scale / ((1.0 - gamma) * (1.0 - gamma)));
}

namespace {

struct SlackTracker {
  std::map<std::string, LemmaCheck> checks;
  std::vector<std::string> order;

  void add(const std::string& name, double lhs, double rhs) {
    auto [it, inserted] = checks.try_emplace(name, LemmaCheck{name});
    if (inserted) order.push_back(name);
    it->second.checks += 1;
    it->second.worst_slack = std::max(it->second.worst_slack, (lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  void equal(const std::string& name, double a, double b) {
    add(name, std::abs(a - b) / std::max(1.0, std::abs(b)), 0.0);
  }
};

Vector random_vector(Index n, CounterRng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

std::vector<LemmaCheck> lemma_suite(int instances, int vectors, std::uint64_t seed) {
  SlackTracker t;
  for (int inst = 0; inst < instances; ++inst) {
    CounterRng rng(seed, static_cast<std::uint64_t>(inst));
    const Index D = 2 + static_cast<Index>(rng.uniform() * 11.0);
    const double gamma = 0.1 + 0.89 * rng.uniform();
    const Index d = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(std::min<Index>(6, D)));
    MrpInstance instance = random_ergodic_instance(D, gamma, rng);
    const auto pi = stationary_distribution(instance.P());
    Matrix Psi = random_features(D, d, rng, pi.pi);
    const Problem p = make_problem(std::move(instance), std::move(Psi));
    const FeatureBasis& fb = p.basis;
    const Vector& w = p.stationary.pi;
    const Matrix& P = p.instance.P();
    const Matrix Id = Matrix::Identity(d, d);
    const Matrix resolvent_D = (Matrix::Identity(D, D) - gamma * P).inverse();
    const Matrix resolvent_d = (Id - fb.M()).inverse();
    const Matrix proj = subspace_projection(fb);
    const Matrix proj_resolvent = (Matrix::Identity(D, D) - proj * gamma * P).inverse() * proj;
    const Matrix lifted = fb.Phi().transpose() * resolvent_d * fb.Phi() * w.asDiagonal();

    t.equal("orthonormal_features", (fb.Phi() * w.asDiagonal() * fb.Phi().transpose() - Id).cwiseAbs().maxCoeff(), 0.0);
    t.add("approximation_factor_at_least_one", 1.0, approximation_factor(fb.M(), gamma));
    t.equal("resolvent_identity", (proj_resolvent - lifted).cwiseAbs().maxCoeff(), 0.0);

    for (int k = 0; k < vectors; ++k) {
      const Vector theta = random_vector(d, rng);
      const Vector theta2 = random_vector(d, rng);
      const Vector u = random_vector(D, rng);
      const Vector v = fb.Psi().transpose() * theta;
      const Vector v2 = fb.Psi().transpose() * theta2;
      const double dv = weighted_norm(v - v2, w);

      t.equal("isometry_parameter", theta.norm(), weighted_norm(fb.Phi().transpose() * theta, w));
      t.equal("isometry_value", weighted_norm(v, w), (fb.B_sqrt() * theta).norm());
      t.add("transition_nonexpansive", weighted_norm(P * u, w), weighted_norm(u, w));
      const Vector dg = deterministic_operator(theta, p.instance, fb) - deterministic_operator(theta2, p.instance, fb);
      t.add("strong_monotonicity", (1.0 - gamma) * dv * dv, dg.dot(theta - theta2));
      t.add("lipschitz_value", dg.norm(), (1.0 + gamma) * std::sqrt(fb.beta()) * dv);
      t.add("lipschitz_parameter", dg.norm(), (1.0 + gamma) * fb.beta() * (theta - theta2).norm());
      t.add("resolvent_value", weighted_norm(resolvent_D * u, w), weighted_norm(u, w) / (1.0 - gamma));
      t.add("resolvent_parameter", (resolvent_d * theta).norm(), theta.norm() / (1.0 - gamma));
      t.equal("resolvent_identity_vector", (proj_resolvent * u - lifted * u).lpNorm<Eigen::Infinity>(), 0.0);
    }
  }
  std::vector<LemmaCheck> out;
  for (const auto& name : t.order) out.push_back(t.checks.at(name));
  return out;
}

namespace {

CounterRng trial_rng(const ExperimentConfig& c, const std::string& label, int trial) {
  return CounterRng(c.base_seed, stream_id(label)).split(static_cast<std::uint64_t>(trial));
}

std::string tag_eta(double eta) { return "eta=" + format_double(eta); }

using Runner = std::function<RunTrace(CounterRng)>;

std::vector<RunTrace> run_trials(const ExperimentConfig& c, const std::string& label, int trials,
                                 const Runner& run) {
  return parallel_map<RunTrace>(trials, c.workers,
                                [&](int i) { return run(trial_rng(c, label, i)); });
}

std::vector<double> final_errors(const Problem& p, const std::vector<RunTrace>& traces) {
  std::vector<double> errs;
  errs.reserve(traces.size());
  for (const auto& t : traces) errs.push_back(p.error_to_vstar_sq(t.final_theta));
  return errs;
}

/// Picks the stepsize with the smallest mean final error on tuning streams.
double tune_stepsize(const ExperimentConfig& c, const std::string& label, const Problem& p,
                     int tuning_trials, const std::function<Runner(double)>& make) {
  double best_eta = c.tuning_grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (const double eta : c.tuning_grid) {
    const auto traces = run_trials(c, "tune|" + label + "|" + tag_eta(eta), tuning_trials, make(eta));
    const double err = mean_stderr(final_errors(p, traces)).mean;
    if (err < best_err) {
      best_err = err;
      best_eta = eta;
    }
  }
  return best_eta;
}

Json problem_file(const Problem& p, const CovarianceBundle& bundle) {
  return Json{{"instance", instance_to_json(p.instance)},
              {"features", features_to_json(p.basis.Psi())},
              {"bundle", bundle_to_json(bundle)}};
}

std::string gamma_key(double g) { return format_double(g); }

void attach_slopes(std::vector<CsvRow>& rows, Json& summary) {
  // One slope per (algorithm, stepsize tag) across the gamma grid.
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& r : rows) {
    auto& s = series[{r.algorithm, r.stepsize_tag}];
    s.first.push_back(1.0 / (1.0 - r.gamma));
    s.second.push_back(r.mean_err_pi_sq);
  }
  for (auto& r : rows) {
    const auto& s = series[{r.algorithm, r.stepsize_tag}];
    if (s.first.size() >= 2) r.slope_fit = loglog_slope(s.first, s.second);
  }
  for (const auto& [key, s] : series) {
    if (s.first.size() >= 2) summary["slopes"][key.first + "|" + key.second] = loglog_slope(s.first, s.second);
  }
}

CsvRow make_row(const ExperimentConfig& c, const std::string& alg, double gamma, const std::string& tag,
                Index samples, const std::vector<double>& errs, std::optional<double> lower) {
  const auto ms = mean_stderr(errs);
  return CsvRow{c.experiment, alg, gamma, tag, static_cast<int>(errs.size()), samples, ms.mean, ms.stderr_, lower, std::nullopt};
}

}  // namespace

ExperimentResult experiment_lemma_suite(const ExperimentConfig& c) {
  ExperimentResult res;
  const int vectors = c.param("vectors", 50);
  const auto checks = lemma_suite(c.trials, vectors, c.base_seed);
  bool all = true;
  for (const auto& ch : checks) {
    const bool ok = ch.worst_slack <= 1e-9;
    all = all && ok;
    res.rows.push_back(CsvRow{c.experiment, ch.name, 0.0, "exact", c.trials, ch.checks, ch.worst_slack, 0.0, std::nullopt, std::nullopt});
    res.summary["checks"][ch.name] = {{"worst_slack", ch.worst_slack}, {"count", ch.checks}, {"pass", ok}};
  }
  res.summary["all_pass"] = all;
  return res;
}

ExperimentResult experiment_oracle_lb(const ExperimentConfig& c) {
  ExperimentResult res;
  const int D = c.param("D", 100);
  const int k_max = c.param("k_max", 20);
  for (const double gamma : c.gamma_grid) {
    const WorstCaseInstance wc = worstcase_instance(gamma, D);
    const Problem p = make_problem(wc.instance, Matrix::Identity(D, D));
    const Vector theta0 = Vector::Zero(D);
    // With Psi = I and uniform pi the parameter-space operator is G(v)/D,
    // so a stepsize of D is one value-iteration step.
    const double eta = static_cast<double>(D);
    RunOptions opts;
    opts.log_iterates = true;
    std::vector<std::pair<std::string, RunTrace>> runs;
    {
      ExactOracle oracle(p.system);
      TdOptions td{StepsizeRule::constant(eta), 0, k_max + 1, 0.0};
      runs.emplace_back("TD", run_td_family(p, oracle, td, theta0, opts));
    }
    {
      ExactOracle oracle(p.system);
      TdOptions td{StepsizeRule::constant(0.5 * eta), 1, k_max + 1, 0.0};
      runs.emplace_back("FTD", run_td_family(p, oracle, td, theta0, opts));
    }
    {
      ExactOracle oracle(p.system);
      EpochSchedule s = budgeted_schedule(3 * (k_max + 2), 3, eta, 0, 1, 0.1, Averaging::PaperWeighted);
      runs.emplace_back("VRTD", run_vrtd(p, oracle, s, theta0, opts));
    }
    {
      ExactOracle oracle(p.system);
      EpochSchedule s = budgeted_schedule(3 * (k_max + 2), 3, 0.5 * eta, 1, 1, 0.1, Averaging::UniformTail);
      runs.emplace_back("VRFTD", run_vrftd(p, oracle, s, theta0, opts));
    }
    const double gap = worstcase_initial_gap(gamma, D);
    for (const auto& [alg, trace] : runs) {
      bool holds = true;
      bool blocks = true;
      const int kk = std::min<int>(k_max, static_cast<int>(trace.iterate_log.size()) - 1);
      for (int k = 0; k <= kk; ++k) {
        const Vector v = p.value(trace.iterate_log[k]);
        const double err = weighted_norm_sq(v - p.v_star, p.stationary.pi);
        const auto lb = oracle_lower_bound(wc, k, Vector::Zero(D));
        if (lb.valid && err < lb.rhs * (1.0 - 1e-12)) holds = false;
        if (!in_block_subspace(v, k, 0)) blocks = false;
        res.rows.push_back(CsvRow{c.experiment, alg, gamma, "exact", 1, k, err, 0.0,
                                  lb.valid ? std::optional<double>(lb.rhs) : std::nullopt, std::nullopt});
      }
      res.summary["bound_holds"][alg][gamma_key(gamma)] = holds;
      res.summary["iterates_in_leading_coordinates"][alg][gamma_key(gamma)] = blocks;
    }
    res.summary["initial_gap"][gamma_key(gamma)] = gap;
    res.files.emplace_back("instance_gamma_" + gamma_key(gamma) + ".json",
                           Json{{"instance", instance_to_json(wc.instance)}});
  }
  return res;
}

ExperimentResult experiment_sweep_two_state(const ExperimentConfig& c) {
  ExperimentResult res;
  const double scale = c.param("budget_scale", 5.0);
  const int K = c.param("K", 3);
  const double frac = c.param("recenter_fraction", 0.6);
  const int tuning_trials = c.param("tuning_trials", 100);
  const int strict_K = c.param("strict_K", 3);
  for (const double gamma : c.gamma_grid) {
    const Problem p = two_state_problem(gamma);
    const CovarianceBundle bundle = iid_covariance(p.instance, p.basis, p.stationary.pi);
    const Index N = sweep_budget(gamma, scale);
    const double lower = bundle.trace_functional / static_cast<double>(N);
    const SamplingModel model = IidModel{p.stationary.pi};
    const Vector theta0 = Vector::Zero(2);
    const std::string g = gamma_key(gamma);
    res.files.emplace_back("instance_gamma_" + g + ".json", problem_file(p, bundle));
    res.summary["trace"][g] = bundle.trace_functional;
    res.summary["budget"][g] = N;

    auto add = [&](const std::string& alg, const std::string& tag, const std::vector<RunTrace>& traces) {
      const Index used = traces.front().samples_used;
      res.rows.push_back(make_row(c, alg, gamma, tag, used, final_errors(p, traces), lower));
    };

    // Diminishing-stepsize baselines (no tuning).
    const StepsizeRule dim = StepsizeRule::theory_diminishing(p.basis.beta(), p.basis.mu(), gamma);
    for (const int lambda : {0, 1}) {
      const std::string alg = lambda ? "FTD" : "TD";
      TdOptions td{dim, lambda, N, 0.0};
      add(alg, "theory-diminishing", run_trials(c, alg + "|dim|" + g, c.trials, [&](CounterRng rng) {
            return run_td_family(p, model, td, theta0, rng);
          }));
    }

    if (c.schedule_mode == ScheduleMode::Strict) {
      const ScheduleStats stats = schedule_stats(p, false);
      RunOptions opts;
      opts.strict = true;
      opts.stats = stats;
      const EpochSchedule vrtd = theoretical_schedule(stats, strict_K, N, Setting::Vrtd);
      add("VRTD", "theorem", run_trials(c, "VRTD|theorem|" + g, c.trials, [&](CounterRng rng) {
            return run_vrtd(p, model, vrtd, theta0, rng, opts);
          }));
      const EpochSchedule vrftd = theoretical_schedule(stats, strict_K, N, Setting::VrftdIid);
      add("VRFTD", "theorem", run_trials(c, "VRFTD|theorem|" + g, c.trials, [&](CounterRng rng) {
            return run_vrftd_iid(p, model, vrftd, theta0, rng, opts);
          }));
      continue;
    }

    // Constant-stepsize and variance-reduced methods over the tuning grid.
    std::map<std::string, std::function<Runner(double)>> makers;
    makers["TD"] = [&](double eta) -> Runner {
      TdOptions td{StepsizeRule::constant(eta), 0, N, 0.5};
      return [&, td](CounterRng rng) { return run_td_family(p, model, td, theta0, rng); };
    };
    makers["FTD"] = [&](double eta) -> Runner {
      TdOptions td{StepsizeRule::constant(eta), 1, N, 0.5};
      return [&, td](CounterRng rng) { return run_td_family(p, model, td, theta0, rng); };
    };
    makers["VRTD"] = [&](double eta) -> Runner {
      const EpochSchedule s = budgeted_schedule(N, K, eta, 0, 1, frac, Averaging::PaperWeighted);
      return [&, s](CounterRng rng) { return run_vrtd(p, model, s, theta0, rng); };
    };
    makers["VRFTD"] = [&](double eta) -> Runner {
      const EpochSchedule s = budgeted_schedule(N, K, eta, 1, 1, frac, Averaging::UniformTail);
      return [&, s](CounterRng rng) { return run_vrftd_iid(p, model, s, theta0, rng); };
    };
    for (const std::string alg : {"TD", "FTD", "VRTD", "VRFTD"}) {
      const auto& make = makers.at(alg);
      for (const double eta : c.tuning_grid) {
        add(alg, tag_eta(eta), run_trials(c, alg + "|" + tag_eta(eta) + "|" + g, c.trials, make(eta)));
      }
      const double best = tune_stepsize(c, alg + "|" + g, p, tuning_trials, make);
      add(alg, "tuned", run_trials(c, alg + "|tuned|" + g, c.trials, make(best)));
      res.summary["tuned_eta"][alg][g] = best;
    }
  }
  attach_slopes(res.rows, res.summary);
  return res;
}

ExperimentResult experiment_ablation_oe(const ExperimentConfig& c) {
  ExperimentResult res;
  const double scale = c.param("budget_scale", 5.0);
  const int K = c.param("K", 3);
  const double frac = c.param("recenter_fraction", 0.6);
  const int tuning_trials = c.param("tuning_trials", 100);
  for (const double gamma : c.gamma_grid) {
    const Problem p = two_state_problem(gamma);
    const CovarianceBundle bundle = iid_covariance(p.instance, p.basis, p.stationary.pi);
    const Index N = sweep_budget(gamma, scale);
    const double lower = bundle.trace_functional / static_cast<double>(N);
    const SamplingModel model = IidModel{p.stationary.pi};
    const Vector theta0 = Vector::Zero(2);
    const std::string g = gamma_key(gamma);
    const ScheduleStats stats = schedule_stats(p, false);

    auto make = [&](int lambda) {
      return [&, lambda](double eta) -> Runner {
        const EpochSchedule s = budgeted_schedule(N, K, eta, lambda, 1, frac, Averaging::UniformTail);
        return [&, s](CounterRng rng) { return run_vrftd_iid(p, model, s, theta0, rng); };
      };
    };
    double eta_oe = 0.0;
    double eta_plain = 0.0;
    std::string tag;
    if (c.schedule_mode == ScheduleMode::Strict) {
      eta_oe = theoretical_schedule(stats, K, N, Setting::VrftdIid).eta;
      eta_plain = theoretical_schedule(stats, K, N, Setting::Vrtd).eta;
      tag = "theory";
    } else {
      eta_oe = tune_stepsize(c, "oe|" + g, p, tuning_trials, make(1));
      eta_plain = tune_stepsize(c, "plain|" + g, p, tuning_trials, make(0));
      tag = "tuned";
    }
    for (const auto& [alg, lambda, eta] : {std::tuple{std::string("VRFTD-OE"), 1, eta_oe},
                                           std::tuple{std::string("VRFTD-noOE"), 0, eta_plain}}) {
      const auto traces = run_trials(c, alg + "|" + g, c.trials, make(lambda)(eta));
      res.rows.push_back(make_row(c, alg, gamma, tag + "(" + tag_eta(eta) + ")", N, final_errors(p, traces), lower));
    }
  }
  // Slopes are grouped by the tag prefix so that per-gamma stepsizes share a series.
  std::vector<CsvRow> keyed = res.rows;
  for (auto& r : keyed) r.stepsize_tag = r.stepsize_tag.substr(0, r.stepsize_tag.find('('));
  attach_slopes(keyed, res.summary);
  for (std::size_t i = 0; i < res.rows.size(); ++i) res.rows[i].slope_fit = keyed[i].slope_fit;
  return res;
}

ExperimentResult experiment_ablation_minibatch(const ExperimentConfig& c) {
  ExperimentResult res;
  const double scale = c.param("budget_scale", 5.0);
  const int K = c.param("K", 3);
  const double frac = c.param("recenter_fraction", 0.6);
  const Index m = c.param("m", 4);
  const double eta_scale = c.param("eta_scale", 2.0);
  for (const double gamma : c.gamma_grid) {
    const Problem p = two_state_problem(gamma);
    const CovarianceBundle bundle = iid_covariance(p.instance, p.basis, p.stationary.pi);
    const Index N = sweep_budget(gamma, scale);
    const double lower = bundle.trace_functional / static_cast<double>(N);
    const SamplingModel model = IidModel{p.stationary.pi};
    const Vector theta0 = Vector::Zero(2);
    const std::string g = gamma_key(gamma);
    const double eta = eta_scale / (4.0 * p.basis.beta() * (1.0 + gamma));
    for (const auto& [alg, batch] : {std::pair{std::string("VRFTD-minibatch"), m},
                                     std::pair{std::string("VRFTD-no-minibatch"), Index{1}}}) {
      const EpochSchedule s = budgeted_schedule(N, K, eta, 1, batch, frac, Averaging::UniformTail);
      const auto traces = run_trials(c, alg + "|" + g, c.trials, [&](CounterRng rng) {
        return run_vrftd_iid(p, model, s, theta0, rng);
      });
      res.rows.push_back(make_row(c, alg, gamma, tag_eta(eta) + ";m=" + std::to_string(batch),
                                  traces.front().samples_used, final_errors(p, traces), lower));
    }
  }
  std::vector<CsvRow> keyed = res.rows;
  for (auto& r : keyed) r.stepsize_tag.clear();
  attach_slopes(keyed, res.summary);
  for (std::size_t i = 0; i < res.rows.size(); ++i) res.rows[i].slope_fit = keyed[i].slope_fit;
  return res;
}

ExperimentResult experiment_gridworld(const ExperimentConfig& c) {
  ExperimentResult res;
  const int width = c.param("width", 10);
  const int height = c.param("height", 10);
  const int num_traps = c.param("traps", 10);
  const Index d = c.param("d", 20);
  const Index budget = c.param("budget", 200000);
  const int K = c.param("K", 4);
  const double frac = c.param("recenter_fraction", 0.5);
  const int tuning_trials = c.param("tuning_trials", 5);
  const bool bias_feature = c.param("bias_feature", true);

  CounterRng layout_rng(c.base_seed, stream_id("gridworld|layout"));
  GridWorldSpec spec;
  spec.width = width;
  spec.height = height;
  spec.goal = Cell{height - 1, width - 1};
  spec.traps = random_traps(width, height, spec.goal, num_traps, layout_rng);
  spec.feature_dim = static_cast<int>(d);

  for (const double gamma : c.gamma_grid) {
    MrpInstance instance = gridworld_instance(spec, gamma);
    const auto stationary = stationary_distribution(instance.P());
    CounterRng feature_rng(c.base_seed, stream_id("gridworld|features|" + gamma_key(gamma)));
    Matrix Psi = random_features(instance.num_states(), d, feature_rng, stationary.pi);
    // A constant row lets the span represent the large common offset of v*.
    if (bias_feature) Psi.row(0).setOnes();
    const Problem p = make_problem(std::move(instance), std::move(Psi));
    const std::string g = gamma_key(gamma);
    const double vstar_sq = weighted_norm_sq(p.v_star, p.stationary.pi);
    const double floor = p.solution.approx_error_sq / vstar_sq;
    const MixingProfile mixing = mixing_constants(p.instance.P());
    const CovarianceBundle bundle = markov_covariance(p.instance, p.basis);
    const SamplingModel model = MarkovModel{-1, p.stationary.pi};
    const Vector theta0 = Vector::Zero(d);
    const Index n0 = mixing.t_mix;

    res.files.emplace_back("instance_gamma_" + g + ".json", problem_file(p, bundle));
    res.summary["floor"][g] = floor;
    res.summary["v_star_sq"][g] = vstar_sq;
    res.summary["trace_markov"][g] = bundle.trace_functional;
    res.summary["t_mix"][g] = mixing.t_mix;

    std::map<std::string, std::function<Runner(double)>> makers;
    makers["TD"] = [&](double eta) -> Runner {
      TdOptions td{StepsizeRule::constant(eta), 0, budget, 0.5};
      return [&, td](CounterRng rng) { return run_td_family(p, model, td, theta0, rng); };
    };
    makers["FTD"] = [&](double eta) -> Runner {
      TdOptions td{StepsizeRule::constant(eta), 1, budget, 0.5};
      return [&, td](CounterRng rng) { return run_td_family(p, model, td, theta0, rng); };
    };
    makers["VRTD"] = [&](double eta) -> Runner {
      const EpochSchedule s = budgeted_schedule(budget, K, eta, 0, 1, frac, Averaging::PaperWeighted, 0, n0);
      return [&, s](CounterRng rng) {
        MarkovSource source(p.instance, std::get<MarkovModel>(model), rng);
        SampledOracle oracle(p.basis, gamma, source);
        return run_vrtd(p, oracle, s, theta0);
      };
    };
    makers["VRFTD"] = [&](double eta) -> Runner {
      const EpochSchedule s = budgeted_schedule(budget, K, eta, 1, 1, frac, Averaging::UniformTail, 0, n0);
      return [&, s](CounterRng rng) { return run_vrftd_markov(p, model, s, theta0, rng); };
    };
    for (const std::string alg : {"TD", "FTD", "VRTD", "VRFTD"}) {
      const double eta = tune_stepsize(c, "grid|" + alg + "|" + g, p, tuning_trials, makers.at(alg));
      const auto traces = run_trials(c, "grid|" + alg + "|" + g, c.trials, makers.at(alg)(eta));
      res.summary["tuned_eta"][alg][g] = eta;
      const auto& grid = traces.front().checkpoints;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        std::vector<double> errs;
        for (const auto& t : traces) errs.push_back(t.checkpoints.at(j).error_pi_sq / vstar_sq);
        const Index samples = grid[j].samples;
        const double lower = bundle.trace_functional / static_cast<double>(samples) / vstar_sq;
        res.rows.push_back(make_row(c, alg, gamma, "tuned(" + tag_eta(eta) + ")", samples, errs, lower));
      }
      std::vector<double> finals;
      for (const auto& t : traces) finals.push_back(p.error_to_vstar_sq(t.final_theta) / vstar_sq);
      res.summary["final_normalized_error"][alg][g] = mean_stderr(finals).mean;
    }
  }
  return res;
}

ExperimentResult experiment_markov_two_state(const ExperimentConfig& c) {
  ExperimentResult res;
  const int K = c.param("K", 3);
  const Index N = c.param("N", Index{2000});
  for (const double gamma : c.gamma_grid) {
    const Problem p = two_state_problem(gamma);
    const CovarianceBundle iid = iid_covariance(p.instance, p.basis, p.stationary.pi);
    const CovarianceBundle mkv = markov_covariance(p.instance, p.basis);
    const ScheduleStats stats = schedule_stats(p, true);
    const std::string g = gamma_key(gamma);
    const SamplingModel model = MarkovModel{-1, p.stationary.pi};
    const Vector theta0 = Vector::Zero(2);
    EpochSchedule s;
    std::string tag;
    RunOptions opts;
    if (c.schedule_mode == ScheduleMode::Strict) {
      s = theoretical_schedule(stats, K, N, Setting::VrftdMarkov);
      opts.strict = true;
      opts.stats = stats;
      tag = "theorem";
    } else {
      const double eta = c.tuning_grid.empty() ? 0.1 : c.tuning_grid.front();
      s = budgeted_schedule(N, K, eta, 1, 1, 0.6, Averaging::UniformTail);
      tag = tag_eta(eta);
    }
    const auto traces = run_trials(c, "markov|" + g, c.trials, [&](CounterRng rng) {
      return run_vrftd_markov(p, model, s, theta0, rng, opts);
    });
    const double lower = iid.trace_functional / static_cast<double>(N);
    res.rows.push_back(make_row(c, "VRFTD-Markov", gamma, tag, traces.front().samples_used,
                                final_errors(p, traces), lower));
    const double gap = p.error_to_vbar_sq(theta0);
    res.summary["initial_gap"][g] = gap;
    res.summary["trace_iid"][g] = iid.trace_functional;
    res.summary["trace_markov"][g] = mkv.trace_functional;
    res.summary["markov_truncation_bound"][g] = mkv.truncation_error_bound;
    res.summary["schedule"][g] = {{"eta", s.eta}, {"T", s.T}, {"m", s.m}, {"m0", s.m0}, {"n0", s.n0},
                                  {"tau", s.tau}, {"N", s.N}, {"K", s.K}};
    res.files.emplace_back("instance_gamma_" + g + ".json", problem_file(p, mkv));
  }
  return res;
}

}  // namespace vrpe
