#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rliot/env/goal.hpp"
#include "rliot/harness/experiment.hpp"
#include "rliot/protocol/dictionary.hpp"
#include "rliot/rl/q_table.hpp"

namespace rliot::harness {

/// One step of an optimal path: the event and the actions that can cause it.
struct PathStep {
  std::string event;  // "power_on", "name", ... or "~color" for a revert
  std::vector<std::string> actions;
  std::string state;  // label of the state reached
};

struct OptimalPaths {
  bool reachable = false;
  std::size_t shortest = 0;     // fewest steps to any success state
  std::size_t length = 0;       // length of the optimal paths
  int best_reward = 0;
  std::vector<std::vector<PathStep>> paths;  // all optimal event sequences, sorted

  nlohmann::json to_json() const;
};

/// Breadth-first search over the goal's abstract machine, driven by the
/// dictionary's documented method effects. Optimal = highest total reward;
/// each step costs the goal's step penalty.
OptimalPaths oracle_optimal_path(const env::GoalSpec& goal, const protocol::MessageDictionary& dictionary);

/// Row labels of the states visited by the first optimal path, start first.
std::vector<std::string> optimal_state_labels(const env::GoalSpec& goal, const OptimalPaths& paths);

/// Heatmap ordering: `first_rows` (when present in the table) lead in the
/// given order, the rest keep table order; columns sort by ascending column
/// maximum, ties keeping table order. Values are unchanged.
rl::QTable heatmap_order(const rl::QTable& q, const std::vector<std::string>& first_rows);

/// Element-wise mean of equally shaped tables.
rl::QTable mean_table(const std::vector<rl::QTable>& tables);

struct RunCost {
  std::size_t run = 0;
  std::optional<std::size_t> crossover;  // smallest n_a with C(n_a) > 0
  double final_cumulative = 0.0;
  std::size_t commands = 0;
};

struct CostReport {
  std::string algorithm;
  std::vector<RunCost> runs;
  std::optional<double> mean_crossover;  // over runs that crossed
  std::size_t crossed = 0;
  double mean_final = 0.0;
  double mean_commands = 0.0;

  nlohmann::json to_json() const;
};

CostReport cost_report(const ExperimentResult& result);
/// Reads an artifact directory written by write_artifacts.
CostReport cost_report(const std::filesystem::path& dir);

/// Loads every run's logs and final table from an artifact directory.
struct LoadedRun {
  std::size_t run = 0;
  rl::QTable q;
  std::vector<rl::EpisodeLog> logs;
};
std::vector<LoadedRun> load_runs(const std::filesystem::path& dir);

/// Greedy coordinate-descent plan.
struct SweepPlan {
  std::vector<std::pair<std::string, std::vector<double>>> parameters;  // tuned in this order
  std::size_t runs = 5;
  std::size_t final_window = 10;
  rl::HyperParams base;

  /// Plan file: {"experiment": path, "runs", "final_window", "base": {...},
  /// "sweep": [{"param": "epsilon", "values": [...]}, ...]}.
  static SweepPlan from_json(const nlohmann::json& j);
};

struct CandidateReport {
  std::string parameter;
  double value = 0.0;
  double objective = 0.0;  // mean R(E) over the final window, over runs
  std::vector<double> mean_reward;  // per-episode mean curve
  bool selected = false;
};

struct TuneResult {
  rl::HyperParams best;
  std::vector<CandidateReport> candidates;
  std::vector<std::string> notes;  // tie resolutions

  std::string report_csv() const;
  std::string curves_csv() const;
};

/// Objective used to rank candidates.
double final_window_mean(const ExperimentResult& result, std::size_t window);

/// Tunes one parameter at a time, fixing each best value before the next.
/// Ties go to the lowest candidate value.
TuneResult tune(const SweepPlan& plan, const ExperimentConfig& cfg);

/// Sets a named hyperparameter ("epsilon", "alpha", "gamma", "lambda").
void set_param(rl::HyperParams& hp, const std::string& name, double value);

}  // namespace rliot::harness
