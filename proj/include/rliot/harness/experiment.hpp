#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rliot/metrics/metrics.hpp"
#include "rliot/net/socket.hpp"
#include "rliot/rl/algorithms.hpp"
#include "rliot/rl/episode.hpp"
#include "rliot/rl/q_table.hpp"

namespace rliot::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::filesystem::path goal;
  std::filesystem::path dictionary;
  std::filesystem::path profile;  // simulator profile; empty = built-in
  rl::Algorithm algorithm = rl::Algorithm::qlearning;
  rl::HyperParams hp;
  std::size_t n_episodes = 50;
  std::size_t n_runs = 10;
  std::uint64_t seed = 1;
  /// Spawn one simulator per run when no device is given.
  std::optional<net::Endpoint> device;
  bool sim_rate_limit = false;
  std::chrono::milliseconds pacing{0};
  /// A greedy evaluation pass follows every eval_every-th training episode
  /// (0 = none) and always the last one.
  std::size_t eval_every = 0;
  std::size_t eval_episodes = 1;
  std::size_t window = 10;
  std::size_t threads = 0;  // 0 = one per run, capped by the hardware

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  /// Relative paths resolve against `base_dir`. A manifest document is
  /// accepted too (its "config" member is used).
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Re-runnable form with absolute paths.
  nlohmann::json to_json() const;
};

/// Greedy evaluation pass result.
struct Evaluation {
  std::size_t after_episode = 0;
  double reward = 0.0;
  std::size_t steps = 0;
  rl::EpisodeEnd end = rl::EpisodeEnd::timeout;
};

struct RunResult {
  std::size_t run = 0;  // 1-based
  std::uint64_t seed = 0;
  std::vector<rl::EpisodeLog> logs;
  std::vector<Evaluation> evaluations;
  rl::QTable q;
  std::size_t commands = 0;  // training commands, feedback reads excluded
  std::size_t aborted = 0;
  double wall_seconds = 0.0;
  std::string error;  // set when the run could not start
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  std::vector<metrics::RunSeries> series;
  std::optional<metrics::AggregateSeries> aggregate;
};

/// Per-run seed derived from the experiment seed.
std::uint64_t run_seed(std::uint64_t base, std::size_t run);

/// Executes every run (in parallel) and aggregates; writes nothing.
/// Throws ConfigError on invalid configuration and std::runtime_error when
/// the device is unreachable.
ExperimentResult execute(const ExperimentConfig& cfg);

/// Writes the artifact directory: manifest.json, timing.json, per-run
/// episodes.jsonl and qtable.csv, and the metric CSVs.
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);

/// execute + write_artifacts.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir);

std::string evaluation_csv(const ExperimentResult& result);

/// Name for a fresh timestamped artifact directory.
std::string timestamped_name(std::string_view prefix);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace rliot::harness
