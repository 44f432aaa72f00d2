#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "vrpe/algorithms.hpp"
#include "vrpe/rng.hpp"
#include "vrpe/serialization.hpp"

namespace vrpe {

enum class ScheduleMode { Strict, Tuned };

/// @brief One experiment run as read from a config file or CLI flags.
struct ExperimentConfig {
  std::string experiment;
  std::vector<double> gamma_grid;
  int trials = 1;
  std::uint64_t base_seed = 0;
  ScheduleMode schedule_mode = ScheduleMode::Tuned;
  /// Stepsizes tried when tuning.
  std::vector<double> tuning_grid;
  std::filesystem::path output_dir = "out";
  /// 0 selects the number of logical cores.
  int workers = 0;
  /// Experiment-specific knobs (epochs, budgets, grid sizes, ...).
  Json params = Json::object();

  /// Throws ConfigError.
  void validate() const;
  template <typename T>
  T param(const char* name, T fallback) const {
    return params.contains(name) ? params.at(name).get<T>() : fallback;
  }
};

ExperimentConfig default_config(const std::string& experiment);
ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);

const std::vector<std::string>& experiment_names();

struct CsvRow {
  std::string experiment;
  std::string algorithm;
  double gamma = 0.0;
  std::string stepsize_tag;
  int trials = 0;
  Index samples = 0;
  double mean_err_pi_sq = 0.0;
  double stderr_ = 0.0;
  std::optional<double> lower_bound;
  std::optional<double> slope_fit;
};

std::string csv_header();
std::string csv_line(const CsvRow& row);

struct ExperimentResult {
  std::vector<CsvRow> rows;
  Json summary = Json::object();
  /// Extra JSON files (file name, content) such as serialized instances.
  std::vector<std::pair<std::string, Json>> files;
};

/// Runs the configured experiment, writing results.csv, summary.json and any
/// serialized instances into config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Stable 64-bit stream id for a labelled group of trials.
std::uint64_t stream_id(std::string_view label);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& xs);

int resolve_workers(int requested);

/// Evaluates fn(0..n-1) on a pool of workers; results are returned in index
/// order regardless of completion order. The first exception is rethrown.
template <typename T>
std::vector<T> parallel_map(int n, int workers, const std::function<T(int)>& fn) {
  std::vector<std::optional<T>> slots(n);
  std::mutex mutex;
  int next = 0;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      int i;
      {
        std::lock_guard lock(mutex);
        if (next >= n || failure) return;
        i = next++;
      }
      try {
        T value = fn(i);
        slots[i].emplace(std::move(value));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int pool = std::max(1, std::min(resolve_workers(workers), n));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < pool; ++w) threads.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace vrpe
