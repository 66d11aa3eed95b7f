#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rliot/metrics/metrics.hpp"
#include "rliot/rng.hpp"

using namespace rliot;
using namespace rliot::metrics;
using rl::EpisodeEnd;
using rl::EpisodeLog;

namespace {

EpisodeLog make_log(std::size_t episode, const std::vector<double>& rewards, EpisodeEnd end = EpisodeEnd::success) {
  EpisodeLog log;
  log.episode = episode;
  log.end = end;
  for (const double r : rewards) log.transitions.push_back({0, 0, r, 0, true, r == -10});
  return log;
}

std::vector<EpisodeLog> random_logs(Rng& rng, std::size_t episodes) {
  std::vector<EpisodeLog> logs;
  for (std::size_t e = 1; e <= episodes; ++e) {
    std::vector<double> r;
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 30));
    for (std::size_t t = 0; t < len; ++t) r.push_back(rng.bernoulli(0.3) ? -10 : -1);
    if (rng.bernoulli(0.6)) r.back() += 205;
    logs.push_back(make_log(e, r));
  }
  return logs;
}

// Independent oracle: trailing window mean computed directly.
std::vector<double> window_oracle(const std::vector<double>& v, std::size_t w) {
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
    long double s = 0;
    for (std::size_t j = lo; j <= i; ++j) s += v[j];
    out.push_back(static_cast<double>(s / static_cast<long double>(i - lo + 1)));
  }
  return out;
}

}  // namespace

TEST(EpisodeMetrics, OptimalTotals) {
  const auto g1 = episode_metrics(make_log(1, {-1, 204}));
  EXPECT_EQ(g1.reward, 203);
  EXPECT_EQ(g1.steps, 2u);
  const auto g2 = episode_metrics(make_log(1, {-1, -1, -1, 221}));
  EXPECT_EQ(g2.reward, 218);
  EXPECT_EQ(g2.steps, 4u);
  const auto timeout = episode_metrics(make_log(1, std::vector<double>(100, -1.0), EpisodeEnd::timeout));
  EXPECT_EQ(timeout.reward, -100);
  EXPECT_EQ(timeout.steps, 100u);
  EXPECT_THROW(episode_metrics(make_log(1, {-1}, EpisodeEnd::aborted)), std::invalid_argument);
}

TEST(RunSeries, StreamInvariants) {
  Rng rng(1);
  auto logs = random_logs(rng, 40);
  logs.insert(logs.begin() + 5, make_log(99, {-1, -1}, EpisodeEnd::aborted));
  const auto s = RunSeries::from_logs(1, logs);
  EXPECT_EQ(s.episodes(), 40u);
  const double sum_r = std::accumulate(s.rewards.begin(), s.rewards.end(), 0.0);
  const double sum_a = std::accumulate(s.per_action.begin(), s.per_action.end(), 0.0);
  EXPECT_EQ(sum_r, sum_a);
  EXPECT_EQ(std::accumulate(s.steps.begin(), s.steps.end(), std::size_t{0}), s.actions());
}

TEST(Cumulative, PrefixSums) {
  Rng rng(2);
  const auto logs = random_logs(rng, 20);
  const auto s = RunSeries::from_logs(1, logs);
  EXPECT_EQ(cumulative_reward(s, 0), 0.0);
  double total = 0;
  for (const auto& l : logs) total += l.total_reward();
  EXPECT_EQ(cumulative_reward(s, s.actions()), total);
  // cut inside the third episode
  const std::size_t cut = logs[0].transitions.size() + logs[1].transitions.size() + 1;
  double direct = 0;
  std::size_t n = 0;
  for (const auto& l : logs) {
    for (const auto& t : l.transitions) {
      if (n++ < cut) direct += t.reward;
    }
  }
  EXPECT_EQ(cumulative_reward(s, cut), direct);
  EXPECT_THROW(cumulative_reward(s, s.actions() + 1), std::out_of_range);
}

TEST(Cumulative, IncrementsEqualStream) {
  Rng rng(3);
  const auto s = RunSeries::from_logs(1, random_logs(rng, 30));
  const auto c = cumulative_series(s);
  ASSERT_EQ(c.size(), s.actions());
  double prev = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c[i] - prev, s.per_action[i]);
    prev = c[i];
  }
  const auto pos = RunSeries::from_logs(1, std::vector<EpisodeLog>{make_log(1, {0, 1, 0, 2})});
  const auto cp = cumulative_series(pos);
  EXPECT_TRUE(std::is_sorted(cp.begin(), cp.end()));
}

TEST(Cumulative, FirstPositive) {
  const std::vector<EpisodeLog> logs = {make_log(1, {-1, -10, -1}), make_log(2, {-1, 204})};
  const auto s = RunSeries::from_logs(1, logs);
  EXPECT_EQ(first_positive(s), 5u);
  const std::vector<EpisodeLog> neg = {make_log(1, {-1, -1})};
  EXPECT_FALSE(first_positive(RunSeries::from_logs(1, neg)));
}

TEST(MovingAverage, MatchesOracle) {
  Rng rng(4);
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(static_cast<double>(rng.uniform_int(-500, 218)));
  for (const std::size_t w : {1u, 3u, 10u, 250u}) {
    const auto got = moving_average(v, w);
    const auto want = window_oracle(v, w);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9) << "w=" << w << " i=" << i;
  }
  EXPECT_EQ(moving_average(v, 1), v);
}

TEST(Aggregate, SingleRunWindowOne) {
  Rng rng(5);
  const std::vector<RunSeries> runs = {RunSeries::from_logs(1, random_logs(rng, 25))};
  const auto agg = aggregate(runs, 1);
  EXPECT_EQ(agg.mean_reward, runs[0].rewards);
  EXPECT_EQ(agg.moving_reward, runs[0].rewards);
}

TEST(Aggregate, ConstantRuns) {
  std::vector<EpisodeLog> logs;
  for (std::size_t e = 1; e <= 10; ++e) logs.push_back(make_log(e, {-1, 204}));
  const std::vector<RunSeries> runs = {RunSeries::from_logs(1, logs), RunSeries::from_logs(2, logs)};
  const auto agg = aggregate(runs, 10);
  for (const double m : agg.mean_reward) EXPECT_EQ(m, 203);
  for (const double m : agg.moving_reward) EXPECT_EQ(m, 203);
  for (const double m : agg.mean_steps) EXPECT_EQ(m, 2);
}

TEST(Aggregate, TenRunsMatchSecondImplementation) {
  Rng rng(6);
  std::vector<RunSeries> runs;
  for (std::size_t r = 1; r <= 10; ++r) runs.push_back(RunSeries::from_logs(r, random_logs(rng, 50)));
  const auto agg = aggregate(runs, 10);
  std::vector<double> mean(50, 0.0);
  for (std::size_t e = 0; e < 50; ++e) {
    long double s = 0;
    for (const auto& r : runs) s += r.rewards[e];
    mean[e] = static_cast<double>(s / 10);
  }
  const auto mov = window_oracle(mean, 10);
  for (std::size_t e = 0; e < 50; ++e) {
    EXPECT_NEAR(agg.mean_reward[e], mean[e], 1e-9);
    EXPECT_NEAR(agg.moving_reward[e], mov[e], 1e-9);
  }
  std::size_t common = runs[0].actions();
  for (const auto& r : runs) common = std::min(common, r.actions());
  EXPECT_EQ(agg.common_actions, common);
  for (std::size_t i = 0; i < common; ++i) {
    long double s = 0;
    for (const auto& r : runs) s += cumulative_reward(r, i + 1);
    EXPECT_NEAR(agg.mean_cumulative[i], static_cast<double>(s / 10), 1e-9);
  }
}

TEST(Aggregate, RaggedRuns) {
  const std::vector<RunSeries> runs = {RunSeries::from_logs(1, std::vector<EpisodeLog>{make_log(1, {-1}), make_log(2, {-3})}),
                                       RunSeries::from_logs(2, std::vector<EpisodeLog>{make_log(1, {-5})})};
  const auto agg = aggregate(runs, 2);
  EXPECT_EQ(agg.mean_reward, (std::vector<double>{-3, -3}));
  EXPECT_EQ(agg.mean_cumulative, (std::vector<double>{-3, -4}));
  EXPECT_EQ(agg.common_actions, 1u);
  const auto csv = reward_csv(runs, agg);
  EXPECT_EQ(csv, "episode,run_01,run_02,mean,movavg\n1,-1,-5,-3,-3\n2,-3,,-3,-3\n");
  EXPECT_EQ(cumulative_csv(runs, agg), "n_a,run_01,run_02,mean\n1,-1,-5,-3\n2,-4,,-4\n");
  EXPECT_EQ(steps_csv(runs, agg), "episode,run_01,run_02,mean,movavg\n1,1,1,1,1\n2,1,,1,1\n");
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(7);
  std::vector<RunSeries> runs;
  for (std::size_t r = 1; r <= 10; ++r) runs.push_back(RunSeries::from_logs(r, random_logs(rng, 20 + r)));
  const auto base = aggregate(runs, 10);
  for (int trial = 0; trial < 20; ++trial) {
    for (std::size_t i = runs.size() - 1; i > 0; --i) std::swap(runs[i], runs[rng.index(i + 1)]);
    const auto agg = aggregate(runs, 10);
    EXPECT_EQ(agg.mean_reward, base.mean_reward);
    EXPECT_EQ(agg.moving_reward, base.moving_reward);
    EXPECT_EQ(agg.mean_steps, base.mean_steps);
    EXPECT_EQ(agg.mean_cumulative, base.mean_cumulative);
  }
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate(std::vector<RunSeries>{}, 10), std::invalid_argument);
  const std::vector<RunSeries> empty_run = {RunSeries{}};
  EXPECT_THROW(aggregate(empty_run, 10), std::invalid_argument);
  EXPECT_THROW(order_free_mean({}), std::invalid_argument);
}
