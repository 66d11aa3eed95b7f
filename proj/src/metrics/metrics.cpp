#include "rliot/metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "rliot/rl/q_table.hpp"

namespace rliot::metrics {

using rl::format_double;

EpisodeMetrics episode_metrics(const rl::EpisodeLog& log) {
  if (!log.valid()) throw std::invalid_argument("episode " + std::to_string(log.episode) + " was aborted");
  return {log.total_reward(), log.transitions.size()};
}

RunSeries RunSeries::from_logs(std::size_t run, std::span<const rl::EpisodeLog> logs) {
  RunSeries s;
  s.run = run;
  for (const auto& log : logs) {
    if (!log.valid()) continue;
    const auto m = episode_metrics(log);
    s.rewards.push_back(m.reward);
    s.steps.push_back(m.steps);
    for (const auto& t : log.transitions) s.per_action.push_back(t.reward);
  }
  return s;
}

double cumulative_reward(const RunSeries& series, std::size_t n_a) {
  if (n_a > series.per_action.size()) {
    throw std::out_of_range("n_a=" + std::to_string(n_a) + " exceeds the " + std::to_string(series.per_action.size()) +
                            " actions of run " + std::to_string(series.run));
  }
  double c = 0.0;
  for (std::size_t i = 0; i < n_a; ++i) c += series.per_action[i];
  return c;
}

std::vector<double> cumulative_series(const RunSeries& series) {
  std::vector<double> out;
  out.reserve(series.per_action.size());
  double c = 0.0;
  for (const double r : series.per_action) out.push_back(c += r);
  return out;
}

std::optional<std::size_t> first_positive(const RunSeries& series) {
  double c = 0.0;
  for (std::size_t i = 0; i < series.per_action.size(); ++i) {
    c += series.per_action[i];
    if (c > 0.0) return i + 1;
  }
  return std::nullopt;
}

std::vector<double> moving_average(std::span<const double> values, std::size_t w) {
  if (w == 0) throw std::invalid_argument("moving-average window must be positive");
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t first = i + 1 >= w ? i + 1 - w : 0;
    double sum = 0.0;
    for (std::size_t j = first; j <= i; ++j) sum += values[j];
    out.push_back(sum / static_cast<double>(i + 1 - first));
  }
  return out;
}

double order_free_mean(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("mean of no values");
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

namespace {

template <class Get>
std::vector<double> ragged_mean(std::span<const RunSeries> runs, std::size_t length, Get get) {
  std::vector<double> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<double> at;
    for (const auto& r : runs) {
      if (auto v = get(r, i)) at.push_back(*v);
    }
    out.push_back(order_free_mean(std::move(at)));
  }
  return out;
}

std::string header(std::string_view first, std::span<const RunSeries> runs, bool with_moving) {
  std::string out(first);
  for (const auto& r : runs) {
    char buf[32];
    std::snprintf(buf, sizeof buf, ",run_%02zu", r.run);
    out += buf;
  }
  out += with_moving ? ",mean,movavg\n" : ",mean\n";
  return out;
}

}  // namespace

AggregateSeries aggregate(std::span<const RunSeries> runs, std::size_t w) {
  if (runs.empty()) throw std::invalid_argument("aggregate needs at least one run");
  if (w == 0) throw std::invalid_argument("moving-average window must be positive");
  std::size_t episodes = 0;
  std::size_t actions = 0;
  std::size_t common = runs.front().actions();
  for (const auto& r : runs) {
    if (r.episodes() == 0) throw std::invalid_argument("run " + std::to_string(r.run) + " has no valid episodes");
    episodes = std::max(episodes, r.episodes());
    actions = std::max(actions, r.actions());
    common = std::min(common, r.actions());
  }
  AggregateSeries agg;
  agg.window = w;
  agg.common_actions = common;
  agg.mean_reward = ragged_mean(runs, episodes, [](const RunSeries& r, std::size_t i) -> std::optional<double> {
    if (i < r.rewards.size()) return r.rewards[i];
    return std::nullopt;
  });
  agg.mean_steps = ragged_mean(runs, episodes, [](const RunSeries& r, std::size_t i) -> std::optional<double> {
    if (i < r.steps.size()) return static_cast<double>(r.steps[i]);
    return std::nullopt;
  });
  agg.moving_reward = moving_average(agg.mean_reward, w);
  agg.moving_steps = moving_average(agg.mean_steps, w);
  std::vector<std::vector<double>> cumulative;
  for (const auto& r : runs) cumulative.push_back(cumulative_series(r));
  agg.mean_cumulative.reserve(actions);
  for (std::size_t i = 0; i < actions; ++i) {
    std::vector<double> at;
    for (const auto& c : cumulative) {
      if (i < c.size()) at.push_back(c[i]);
    }
    agg.mean_cumulative.push_back(order_free_mean(std::move(at)));
  }
  return agg;
}

std::string reward_csv(std::span<const RunSeries> runs, const AggregateSeries& agg) {
  std::string out = header("episode", runs, true);
  for (std::size_t e = 0; e < agg.mean_reward.size(); ++e) {
    out += std::to_string(e + 1);
    for (const auto& r : runs) out += "," + (e < r.rewards.size() ? format_double(r.rewards[e]) : std::string());
    out += "," + format_double(agg.mean_reward[e]) + "," + format_double(agg.moving_reward[e]) + "\n";
  }
  return out;
}

std::string steps_csv(std::span<const RunSeries> runs, const AggregateSeries& agg) {
  std::string out = header("episode", runs, true);
  for (std::size_t e = 0; e < agg.mean_steps.size(); ++e) {
    out += std::to_string(e + 1);
    for (const auto& r : runs) out += "," + (e < r.steps.size() ? std::to_string(r.steps[e]) : std::string());
    out += "," + format_double(agg.mean_steps[e]) + "," + format_double(agg.moving_steps[e]) + "\n";
  }
  return out;
}

std::string cumulative_csv(std::span<const RunSeries> runs, const AggregateSeries& agg) {
  std::string out = header("n_a", runs, false);
  std::vector<std::vector<double>> cumulative;
  for (const auto& r : runs) cumulative.push_back(cumulative_series(r));
  for (std::size_t i = 0; i < agg.mean_cumulative.size(); ++i) {
    out += std::to_string(i + 1);
    for (const auto& c : cumulative) out += "," + (i < c.size() ? format_double(c[i]) : std::string());
    out += "," + format_double(agg.mean_cumulative[i]) + "\n";
  }
  return out;
}

}  // namespace rliot::metrics
