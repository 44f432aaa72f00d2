#include "vrpe/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "vrpe/error.hpp"
#include "vrpe/experiments.hpp"

namespace vrpe {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "lemma-suite", "oracle-lb",  "sweep-two-state", "ablation-oe",
      "ablation-minibatch", "gridworld", "markov-two-state"};
  return names;
}

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (workers < 0) throw ConfigError("workers must be nonnegative");
  const bool half_family = experiment != "gridworld" && experiment != "lemma-suite";
  for (const double g : gamma_grid) {
    if (half_family ? !(g > 0.5 && g < 1.0) : !(g > 0.0 && g < 1.0)) {
      throw ConfigError("discount factor " + format_double(g) + " outside the allowed range");
    }
  }
  if (experiment != "lemma-suite" && gamma_grid.empty()) throw ConfigError("gamma grid is empty");
  for (const double eta : tuning_grid) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("tuning stepsizes must be positive");
  }
  if (schedule_mode == ScheduleMode::Tuned && tuning_grid.empty() &&
      (experiment == "sweep-two-state" || experiment == "gridworld")) {
    throw ConfigError("tuned schedules need a non-empty tuning grid");
  }
  if (!params.is_object()) throw ConfigError("params must be an object");
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.output_dir = "out/" + experiment;
  const std::vector<double> sweep = {0.8, 0.85, 0.9, 0.93, 0.95};
  if (experiment == "lemma-suite") {
    c.trials = 100;
    c.params = {{"vectors", 50}};
  } else if (experiment == "oracle-lb") {
    c.gamma_grid = {0.75};
    c.params = {{"D", 100}, {"k_max", 20}};
  } else if (experiment == "sweep-two-state") {
    c.gamma_grid = sweep;
    c.trials = 200;
    c.tuning_grid = {0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2, 0.3};
    c.params = {{"budget_scale", 5.0}, {"K", 3}, {"recenter_fraction", 0.6},
                {"tuning_trials", 100}, {"strict_K", 3}};
  } else if (experiment == "ablation-oe") {
    c.gamma_grid = sweep;
    c.trials = 200;
    c.schedule_mode = ScheduleMode::Strict;
    c.params = {{"budget_scale", 5.0}, {"K", 3}, {"recenter_fraction", 0.6}};
  } else if (experiment == "ablation-minibatch") {
    c.gamma_grid = sweep;
    c.trials = 200;
    c.schedule_mode = ScheduleMode::Strict;
    c.params = {{"budget_scale", 5.0}, {"K", 3}, {"recenter_fraction", 0.6},
                {"m", 4}, {"eta_scale", 2.0}};
  } else if (experiment == "gridworld") {
    c.gamma_grid = {0.99};
    c.trials = 20;
    c.tuning_grid = {0.005, 0.01, 0.02, 0.05, 0.1, 0.2};
    c.params = {{"width", 10},      {"height", 10},  {"traps", 10},
                {"d", 20},          {"budget", 200000}, {"K", 4},
                {"recenter_fraction", 0.5}, {"tuning_trials", 5}, {"bias_feature", true}};
  } else if (experiment == "markov-two-state") {
    c.gamma_grid = {0.7};
    c.trials = 200;
    c.schedule_mode = ScheduleMode::Strict;
    c.params = {{"K", 3}, {"N", 2000}};
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (!j.contains("experiment")) throw ConfigError("config needs an 'experiment' field");
    ExperimentConfig c = default_config(j.at("experiment").get<std::string>());
    if (j.contains("gamma_grid")) c.gamma_grid = j.at("gamma_grid").get<std::vector<double>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("schedule_mode")) {
      const auto mode = j.at("schedule_mode").get<std::string>();
      if (mode == "strict") {
        c.schedule_mode = ScheduleMode::Strict;
      } else if (mode == "tuned") {
        c.schedule_mode = ScheduleMode::Tuned;
      } else {
        throw ConfigError("schedule_mode must be 'strict' or 'tuned'");
      }
    }
    if (j.contains("tuning_grid")) c.tuning_grid = j.at("tuning_grid").get<std::vector<double>>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("params")) {
      for (const auto& [key, value] : j.at("params").items()) c.params[key] = value;
    }
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

Json config_to_json(const ExperimentConfig& c) {
  return Json{{"experiment", c.experiment},
              {"gamma_grid", c.gamma_grid},
              {"trials", c.trials},
              {"base_seed", c.base_seed},
              {"schedule_mode", c.schedule_mode == ScheduleMode::Strict ? "strict" : "tuned"},
              {"tuning_grid", c.tuning_grid},
              {"output_dir", c.output_dir.string()},
              {"workers", c.workers},
              {"params", c.params}};
}

std::string csv_header() {
  return "experiment,algorithm,gamma,stepsize_tag,trials,samples,mean_err_pi_sq,stderr,lower_bound,slope_fit";
}

std::string csv_line(const CsvRow& r) {
  std::string line;
  line += r.experiment + ',' + r.algorithm + ',' + format_double(r.gamma) + ',' + r.stepsize_tag + ',';
  line += std::to_string(r.trials) + ',' + std::to_string(r.samples) + ',';
  line += format_double(r.mean_err_pi_sq) + ',' + format_double(r.stderr_) + ',';
  line += (r.lower_bound ? format_double(*r.lower_bound) : std::string()) + ',';
  line += r.slope_fit ? format_double(*r.slope_fit) : std::string();
  return line;
}

std::uint64_t stream_id(std::string_view label) {
  // FNV-1a; only needs to be stable across platforms and runs.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  ExperimentResult result;
  const std::string& e = config.experiment;
  if (e == "lemma-suite") {
    result = experiment_lemma_suite(config);
  } else if (e == "oracle-lb") {
    result = experiment_oracle_lb(config);
  } else if (e == "sweep-two-state") {
    result = experiment_sweep_two_state(config);
  } else if (e == "ablation-oe") {
    result = experiment_ablation_oe(config);
  } else if (e == "ablation-minibatch") {
    result = experiment_ablation_minibatch(config);
  } else if (e == "gridworld") {
    result = experiment_gridworld(config);
  } else {
    result = experiment_markov_two_state(config);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  std::filesystem::create_directories(config.output_dir);
  {
    std::ofstream csv(config.output_dir / "results.csv");
    if (!csv) throw ConfigError("cannot write to " + config.output_dir.string());
    csv << csv_header() << '\n';
    for (const auto& row : result.rows) csv << csv_line(row) << '\n';
  }
  for (const auto& [name, content] : result.files) {
    write_json_file(config.output_dir / name, content);
  }
  Json summary = result.summary;
  summary["config"] = config_to_json(config);
  summary["runtime_seconds"] = seconds;
  write_json_file(config.output_dir / "summary.json", summary);
  result.summary = std::move(summary);
  return result;
}

}  // namespace vrpe
