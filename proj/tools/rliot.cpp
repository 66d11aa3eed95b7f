// rliot: experiment driver.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rliot/discoverer/discoverer.hpp"
#include "rliot/env/goal.hpp"
#include "rliot/harness/analysis.hpp"
#include "rliot/harness/experiment.hpp"
#include "rliot/protocol/dictionary.hpp"

namespace fs = std::filesystem;
using namespace rliot;
using nlohmann::json;

namespace {

const fs::path kDataDir = RLIOT_DATA_DIR;

int cmd_run(const fs::path& config, fs::path out, std::optional<std::uint64_t> seed, std::optional<std::size_t> runs,
            std::optional<std::size_t> episodes) {
  auto cfg = harness::ExperimentConfig::load(config);
  if (seed) cfg.seed = *seed;
  if (runs) cfg.n_runs = *runs;
  if (episodes) cfg.n_episodes = *episodes;
  if (out.empty()) {
    const auto goal = env::GoalSpec::load(cfg.goal);
    out = fs::path("out") / harness::timestamped_name(goal.name + "-" + std::string(rl::to_string(cfg.algorithm)));
  }
  const auto result = harness::run_experiment(cfg, out);
  std::cout << "artifacts: " << out.string() << "\n";
  if (result.aggregate) {
    const auto& m = result.aggregate->mean_reward;
    std::cout << "mean R(E) first " << rl::format_double(m.front()) << ", last " << rl::format_double(m.back()) << "\n";
  }
  std::size_t aborted = 0;
  for (const auto& r : result.runs) aborted += r.aborted;
  if (aborted > 0) std::cout << "aborted episodes: " << aborted << "\n";
  return 0;
}

int cmd_tune(const fs::path& plan_path, fs::path out) {
  const json plan_json = json::parse(harness::read_file(plan_path));
  const auto plan = harness::SweepPlan::from_json(plan_json);
  const fs::path base = fs::absolute(plan_path).parent_path();
  auto cfg = harness::ExperimentConfig::load(base / plan_json.at("experiment").get<std::string>());
  if (out.empty()) out = fs::path("out") / harness::timestamped_name("tune");
  const auto result = harness::tune(plan, cfg);
  fs::create_directories(out);
  harness::write_file(out / "sweep_report.csv", result.report_csv());
  harness::write_file(out / "sweep_curves.csv", result.curves_csv());
  const json best = {{"epsilon", result.best.epsilon},
                     {"alpha", result.best.alpha},
                     {"gamma", result.best.gamma},
                     {"lambda", result.best.lambda},
                     {"objective", "mean R(E) over the final " + std::to_string(plan.final_window) + " episodes"},
                     {"notes", result.notes}};
  harness::write_file(out / "best.json", best.dump(2) + "\n");
  for (const auto& note : result.notes) std::cerr << note << "\n";
  std::cout << best.dump(2) << "\n";
  return 0;
}

int cmd_oracle(const fs::path& goal_path, const fs::path& dictionary) {
  const auto goal = env::GoalSpec::load(goal_path);
  const auto dict = protocol::MessageDictionary::load(dictionary);
  const auto paths = harness::oracle_optimal_path(goal, dict);
  std::cout << paths.to_json().dump(2) << "\n";
  if (!paths.reachable) {
    std::cerr << "goal '" << goal.name << "' is unreachable with the dictionary's effects\n";
    return 2;
  }
  return 0;
}

int cmd_heatmap(const fs::path& qtable, const fs::path& dir, const fs::path& goal_path, const fs::path& dictionary,
                const fs::path& out) {
  rl::QTable q;
  if (!dir.empty()) {
    std::vector<rl::QTable> tables;
    for (auto& run : harness::load_runs(dir)) tables.push_back(std::move(run.q));
    q = harness::mean_table(tables);
  } else {
    q = rl::QTable::from_csv(harness::read_file(qtable));
  }
  std::vector<std::string> first;
  if (!goal_path.empty()) {
    const auto goal = env::GoalSpec::load(goal_path);
    first = harness::optimal_state_labels(goal, harness::oracle_optimal_path(goal, protocol::MessageDictionary::load(dictionary)));
  }
  const std::string csv = harness::heatmap_order(q, first).to_csv();
  if (out.empty()) {
    std::cout << csv;
  } else {
    harness::write_file(out, csv);
  }
  return 0;
}

int cmd_discover(double listen_secs, const std::string& cidr, const std::vector<std::uint16_t>& ports, const std::string& group,
                 std::uint16_t port) {
  std::vector<discovery::DeviceRecord> found;
  if (!cidr.empty()) {
    const auto hosts = discovery::expand_cidr(cidr);
    found = discovery::probe(hosts, ports);
  } else {
    found = discovery::listen(group, port, std::chrono::milliseconds(static_cast<long>(listen_secs * 1000)));
  }
  for (const auto& r : found) std::cout << discovery::to_json(r).dump() << "\n";
  return 0;
}

int cmd_cost(const std::vector<fs::path>& dirs) {
  for (const auto& d : dirs) std::cout << harness::cost_report(d).to_json().dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RL agents that learn smart-bulb commands from protocol messages"};
  app.require_subcommand(1);

  fs::path config, out, plan, goal, qtable, dir;
  fs::path dictionary = kDataDir / "yeelight.dict";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs, episodes;
  auto* run = app.add_subcommand("run", "run a multi-run experiment");
  run->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "artifact directory (default out/<goal>-<algorithm>-<time>)");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--runs", runs, "override n_runs");
  run->add_option("--episodes", episodes, "override n_episodes");

  auto* tune = app.add_subcommand("tune", "greedy one-parameter-at-a-time tuning");
  tune->add_option("--plan", plan, "sweep plan (JSON)")->required()->check(CLI::ExistingFile);
  tune->add_option("--out", out, "report directory");

  auto* oracle = app.add_subcommand("oracle", "shortest optimal paths on the goal's abstract machine");
  oracle->add_option("--goal", goal, "goal file")->required()->check(CLI::ExistingFile);
  oracle->add_option("--dictionary", dictionary, "message dictionary")->check(CLI::ExistingFile);

  auto* heatmap = app.add_subcommand("heatmap", "reorder a Q-table for plotting");
  auto* q_opt = heatmap->add_option("--qtable", qtable, "Q-table CSV")->check(CLI::ExistingFile);
  auto* dir_opt = heatmap->add_option("--dir", dir, "artifact directory; averages the runs' tables")->check(CLI::ExistingDirectory);
  q_opt->excludes(dir_opt);
  heatmap->add_option("--goal", goal, "put this goal's optimal-path states first")->check(CLI::ExistingFile);
  heatmap->add_option("--dictionary", dictionary, "message dictionary")->check(CLI::ExistingFile);
  heatmap->add_option("--out", out, "output CSV (default stdout)");

  double listen_secs = 3.0;
  std::string cidr;
  std::vector<std::uint16_t> ports = {55443};
  std::string group = "239.255.255.250";
  std::uint16_t adv_port = 1982;
  auto* discover = app.add_subcommand("discover", "find bulbs by advertisement or port probing");
  auto* listen_opt = discover->add_option("--listen", listen_secs, "listen for advertisements (seconds)");
  auto* probe_opt = discover->add_option("--probe", cidr, "probe an IPv4 CIDR block");
  listen_opt->excludes(probe_opt);
  discover->add_option("--ports", ports, "ports to probe")->delimiter(',');
  discover->add_option("--group", group, "advertisement multicast group");
  discover->add_option("--port", adv_port, "advertisement UDP port");

  std::vector<fs::path> dirs;
  auto* cost = app.add_subcommand("cost", "commands needed before the cumulative reward turns positive");
  cost->add_option("--dir", dirs, "artifact directories")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out, seed, runs, episodes);
    if (*tune) return cmd_tune(plan, out);
    if (*oracle) return cmd_oracle(goal, dictionary);
    if (*heatmap) {
      if (qtable.empty() && dir.empty()) throw CLI::RequiredError("--qtable or --dir");
      return cmd_heatmap(qtable, dir, goal, dictionary, out);
    }
    if (*discover) return cmd_discover(listen_secs, cidr, ports, group, adv_port);
    if (*cost) return cmd_cost(dirs);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "rliot: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
