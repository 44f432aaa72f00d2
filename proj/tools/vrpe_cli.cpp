#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "vrpe/error.hpp"
#include "vrpe/harness.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<int> workers;
  bool strict = false;
};

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << vrpe::Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

vrpe::ExperimentConfig build_config(const std::string& experiment, const Flags& f) {
  vrpe::ExperimentConfig c;
  if (!f.config_path.empty()) {
    vrpe::Json j = vrpe::read_json_file(f.config_path);
    if (j.is_object() && !j.contains("experiment")) j["experiment"] = experiment;
    c = vrpe::config_from_json(j);
    if (c.experiment != experiment) {
      throw vrpe::ConfigError("config is for '" + c.experiment + "' but subcommand runs '" + experiment + "'");
    }
  } else {
    c = vrpe::default_config(experiment);
  }
  if (f.seed) c.base_seed = *f.seed;
  if (f.trials) c.trials = *f.trials;
  if (f.out) c.output_dir = *f.out;
  if (f.workers) c.workers = *f.workers;
  if (f.strict) c.schedule_mode = vrpe::ScheduleMode::Strict;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-reduced TD policy evaluation experiments"};
  app.require_subcommand(1);
  Flags flags;
  const std::map<std::string, std::string> commands = {
      {"lemmas", "lemma-suite"},
      {"oracle-lb", "oracle-lb"},
      {"sweep-two-state", "sweep-two-state"},
      {"ablation-oe", "ablation-oe"},
      {"ablation-minibatch", "ablation-minibatch"},
      {"gridworld", "gridworld"},
      {"markov-two-state", "markov-two-state"},
  };
  std::map<CLI::App*, std::string> experiment_of;
  for (const auto& [name, experiment] : commands) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + experiment + " experiment");
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--seed", flags.seed, "Base seed");
    sub->add_option("--trials", flags.trials, "Number of replications");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--workers", flags.workers, "Worker threads (0 = all cores)");
    sub->add_flag("--strict-schedule", flags.strict, "Use theorem schedules instead of tuned ones");
    experiment_of[sub] = experiment;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return 2;
  }

  try {
    const std::string& experiment = experiment_of.at(app.get_subcommands().front());
    const vrpe::ExperimentConfig config = build_config(experiment, flags);
    const vrpe::ExperimentResult result = vrpe::run_experiment(config);
    std::cout << vrpe::Json{{"output_dir", config.output_dir.string()},
                            {"rows", result.rows.size()},
                            {"runtime_seconds", result.summary.value("runtime_seconds", 0.0)}}
                     .dump()
              << '\n';
    return 0;
  } catch (const vrpe::Error& e) {
    print_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
  }
  return 1;
}
