#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rliot/rl/episode.hpp"

namespace rliot::metrics {

struct EpisodeMetrics {
  double reward = 0.0;  // R(E)
  std::size_t steps = 0;  // T(E)
};

/// R(E) and T(E) of one episode. Aborted logs are rejected with
/// std::invalid_argument.
EpisodeMetrics episode_metrics(const rl::EpisodeLog& log);

/// Per-episode and per-action reward streams of one run.
struct RunSeries {
  std::size_t run = 0;
  std::vector<double> rewards;
  std::vector<std::size_t> steps;
  std::vector<double> per_action;

  /// Builds the series from a run's logs; aborted episodes are skipped.
  static RunSeries from_logs(std::size_t run, std::span<const rl::EpisodeLog> logs);

  std::size_t episodes() const { return rewards.size(); }
  std::size_t actions() const { return per_action.size(); }
};

/// C(n_a): sum of the first n_a per-action rewards. Throws std::out_of_range
/// when n_a exceeds the number of actions in the series.
double cumulative_reward(const RunSeries& series, std::size_t n_a);

/// Running C(n_a) for n_a = 1..actions().
std::vector<double> cumulative_series(const RunSeries& series);

/// Smallest n_a with C(n_a) > 0, if any.
std::optional<std::size_t> first_positive(const RunSeries& series);

/// Trailing mean over min(w, i+1) values ending at each index.
std::vector<double> moving_average(std::span<const double> values, std::size_t w);

/// Mean of the values; the sum runs over sorted values so the result does
/// not depend on their order.
double order_free_mean(std::vector<double> values);

struct AggregateSeries {
  std::size_t window = 1;
  std::vector<double> mean_reward;         // per episode, over runs with that episode
  std::vector<double> moving_reward;       // trailing moving average of mean_reward
  std::vector<double> mean_steps;
  std::vector<double> moving_steps;
  std::vector<double> mean_cumulative;     // per n_a (index n_a-1), over runs with that n_a
  std::size_t common_actions = 0;          // n_a range covered by every run
};

/// Multi-run aggregation; ragged run lengths are averaged over the runs that
/// have data. Throws std::invalid_argument on empty input or a run without
/// episodes.
AggregateSeries aggregate(std::span<const RunSeries> runs, std::size_t w);

// Plot-ready CSV tables. Missing cells (ragged runs) are left empty.
std::string reward_csv(std::span<const RunSeries> runs, const AggregateSeries& agg);
std::string steps_csv(std::span<const RunSeries> runs, const AggregateSeries& agg);
std::string cumulative_csv(std::span<const RunSeries> runs, const AggregateSeries& agg);

}  // namespace rliot::metrics
