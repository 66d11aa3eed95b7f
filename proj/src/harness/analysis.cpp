#include "rliot/harness/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <tuple>

namespace rliot::harness {

namespace fs = std::filesystem;
using env::AttributeSet;
using env::Event;
using nlohmann::json;
using sim::Power;

namespace {

struct Node {
  Power power = Power::on;
  AttributeSet changed = 0;
  env::History history;

  auto key() const { return std::tie(power, changed, history.order_ok, history.first_changes); }
  bool operator<(const Node& o) const { return key() < o.key(); }
  bool operator==(const Node& o) const { return key() == o.key(); }
};

struct Outcome {
  std::string label;
  Node next;
};

env::Terminal terminal_of(const Node& n, const env::GoalSpec& goal) {
  return env::classify(n.power, n.changed, n.history.order_ok, goal);
}

bool is_tracked(const env::GoalSpec& goal, env::Attribute a) {
  return std::find(goal.tracked.begin(), goal.tracked.end(), a) != goal.tracked.end();
}

// Abstract outcomes of one documented effect applied at `from`.
std::vector<Outcome> apply_effect(const Node& from, const protocol::MethodEffect& effect, const env::GoalSpec& goal) {
  std::vector<Outcome> out;
  if (!effect.requires_power.empty() && sim::parse_power(effect.requires_power) != from.power) return out;
  Node next = from;
  std::vector<Event> events;
  std::string label;
  std::optional<env::Attribute> single;
  for (const auto& change : effect.changes) {
    if (change == "power_on" || change == "power_off") {
      const Power target = change == "power_on" ? Power::on : Power::off;
      if (next.power == target) continue;
      next.power = target;
      if (goal.track_power) events.insert(events.begin(), change == "power_on" ? Event::power_on : Event::power_off);
    } else {
      const env::Attribute a = env::parse_attribute(change);
      if (!is_tracked(goal, a)) continue;
      next.changed |= env::bit(a);
      events.push_back(env::event_of(a));
      single = a;
    }
    label += (label.empty() ? "" : "+") + change;
  }
  if (label.empty()) return out;
  Node forward = next;
  env::record_events(goal, forward.history, events);
  out.push_back({label, forward});
  // Setting an attribute back to its initial value is also one of the outcomes.
  if (effect.changes.size() == 1 && single && env::contains(from.changed, *single)) {
    Node revert = from;
    revert.changed &= static_cast<AttributeSet>(~env::bit(*single));
    env::record_events(goal, revert.history, {env::event_of(*single)});
    out.push_back({"~" + std::string(env::to_string(*single)), revert});
  }
  return out;
}

}  // namespace

json OptimalPaths::to_json() const {
  json p = json::array();
  for (const auto& path : paths) {
    json steps = json::array();
    for (const auto& s : path) steps.push_back({{"event", s.event}, {"actions", s.actions}, {"state", s.state}});
    p.push_back(steps);
  }
  return {{"reachable", reachable}, {"shortest", shortest}, {"length", length}, {"best_reward", best_reward}, {"paths", p}};
}

OptimalPaths oracle_optimal_path(const env::GoalSpec& goal, const protocol::MessageDictionary& dictionary) {
  struct Edge {
    Node from;
    std::string label;
  };
  Node start;
  start.power = goal.initial.power;
  std::map<Node, std::size_t> dist{{start, 0}};
  std::map<Node, std::vector<Edge>> preds;
  std::map<std::tuple<Node, std::string, Node>, std::set<std::string>> edge_actions;
  std::deque<Node> queue{start};
  while (!queue.empty()) {
    const Node node = queue.front();
    queue.pop_front();
    const std::size_t d = dist.at(node);
    if (terminal_of(node, goal) != env::Terminal::none || d >= goal.t_max) continue;
    for (const auto& action : dictionary.actions()) {
      const auto& spec = dictionary.methods()[action.method];
      for (const auto& effect : spec.effects) {
        if (!effect.action.empty() && effect.action != action.label) continue;
        for (const auto& [label, next] : apply_effect(node, effect, goal)) {
          if (next == node) continue;
          auto [it, fresh] = dist.try_emplace(next, d + 1);
          if (fresh) queue.push_back(next);
          if (it->second != d + 1) continue;
          auto& actions = edge_actions[{node, label, next}];
          if (actions.empty()) preds[next].push_back({node, label});
          actions.insert(action.label);
        }
      }
    }
  }

  OptimalPaths result;
  std::vector<Node> best_nodes;
  for (const auto& [node, d] : dist) {
    const auto t = terminal_of(node, goal);
    if (t != env::Terminal::success && t != env::Terminal::unordered_success) continue;
    const int total = env::step_reward(false, t, goal) + goal.rewards.step * static_cast<int>(d - 1);
    if (!result.reachable || d < result.shortest) result.shortest = d;
    if (!result.reachable || total > result.best_reward) {
      result.best_reward = total;
      best_nodes.clear();
    }
    if (total == result.best_reward) best_nodes.push_back(node);
    result.reachable = true;
  }
  if (!result.reachable) return result;

  std::vector<PathStep> suffix;
  std::function<void(const Node&)> unwind = [&](const Node& node) {
    if (node == start) {
      result.paths.emplace_back(suffix.rbegin(), suffix.rend());
      return;
    }
    for (const auto& edge : preds.at(node)) {
      const auto& acts = edge_actions.at({edge.from, edge.label, node});
      const env::AbstractState s{node.power, node.changed, node.history.order_ok, terminal_of(node, goal)};
      suffix.push_back({edge.label, {acts.begin(), acts.end()}, env::state_label(s, goal)});
      unwind(edge.from);
      suffix.pop_back();
    }
  };
  for (const auto& node : best_nodes) unwind(node);
  std::sort(result.paths.begin(), result.paths.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].event != b[i].event) return a[i].event < b[i].event;
    }
    return false;
  });
  result.length = result.paths.front().size();
  return result;
}

std::vector<std::string> optimal_state_labels(const env::GoalSpec& goal, const OptimalPaths& paths) {
  std::vector<std::string> labels;
  if (!paths.reachable || paths.paths.empty()) return labels;
  env::AbstractState start{goal.initial.power, 0, true, env::Terminal::none};
  labels.push_back(env::state_label(start, goal));
  for (const auto& step : paths.paths.front()) labels.push_back(step.state);
  return labels;
}

rl::QTable heatmap_order(const rl::QTable& q, const std::vector<std::string>& first_rows) {
  std::vector<std::size_t> rows;
  for (const auto& label : first_rows) {
    const auto it = std::find(q.states().begin(), q.states().end(), label);
    if (it == q.states().end()) continue;
    const auto idx = static_cast<std::size_t>(it - q.states().begin());
    if (std::find(rows.begin(), rows.end(), idx) == rows.end()) rows.push_back(idx);
  }
  for (std::size_t s = 0; s < q.num_states(); ++s) {
    if (std::find(rows.begin(), rows.end(), s) == rows.end()) rows.push_back(s);
  }
  std::vector<double> col_max(q.num_actions(), -INFINITY);
  for (std::size_t s = 0; s < q.num_states(); ++s) {
    for (std::size_t a = 0; a < q.num_actions(); ++a) col_max[a] = std::max(col_max[a], q.at(s, a));
  }
  std::vector<std::size_t> cols(q.num_actions());
  for (std::size_t a = 0; a < cols.size(); ++a) cols[a] = a;
  std::stable_sort(cols.begin(), cols.end(), [&](std::size_t x, std::size_t y) { return col_max[x] < col_max[y]; });

  std::vector<std::string> states;
  std::vector<std::string> actions;
  for (const auto s : rows) states.push_back(q.states()[s]);
  for (const auto a : cols) actions.push_back(q.actions()[a]);
  rl::QTable out(states, actions);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out.at(i, j) = q.at(rows[i], cols[j]);
  }
  return out;
}

rl::QTable mean_table(const std::vector<rl::QTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("mean of no tables");
  rl::QTable out(tables.front().states(), tables.front().actions());
  for (const auto& t : tables) {
    if (t.states() != out.states() || t.actions() != out.actions()) throw std::invalid_argument("tables differ in shape or labels");
  }
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<double> at;
    for (const auto& t : tables) at.push_back(t.values()[i]);
    values[i] = metrics::order_free_mean(std::move(at));
  }
  return out;
}

json CostReport::to_json() const {
  json rs = json::array();
  for (const auto& r : runs) {
    rs.push_back({{"run", r.run},
                  {"crossover", r.crossover ? json(*r.crossover) : json(nullptr)},
                  {"final_cumulative", r.final_cumulative},
                  {"commands", r.commands}});
  }
  return {{"algorithm", algorithm},
          {"runs", rs},
          {"mean_crossover", mean_crossover ? json(*mean_crossover) : json(nullptr)},
          {"crossed", crossed},
          {"mean_final_cumulative", mean_final},
          {"mean_commands", mean_commands}};
}

namespace {

CostReport build_cost(const std::string& algorithm, const std::vector<std::pair<metrics::RunSeries, std::size_t>>& runs) {
  CostReport rep;
  rep.algorithm = algorithm;
  std::vector<double> crossings, finals, commands;
  for (const auto& [series, sent] : runs) {
    RunCost c;
    c.run = series.run;
    c.crossover = metrics::first_positive(series);
    c.final_cumulative = metrics::cumulative_reward(series, series.actions());
    c.commands = sent;
    if (c.crossover) crossings.push_back(static_cast<double>(*c.crossover));
    finals.push_back(c.final_cumulative);
    commands.push_back(static_cast<double>(sent));
    rep.runs.push_back(c);
  }
  rep.crossed = crossings.size();
  if (!crossings.empty()) rep.mean_crossover = metrics::order_free_mean(crossings);
  if (!finals.empty()) {
    rep.mean_final = metrics::order_free_mean(finals);
    rep.mean_commands = metrics::order_free_mean(commands);
  }
  return rep;
}

}  // namespace

CostReport cost_report(const ExperimentResult& result) {
  std::vector<std::pair<metrics::RunSeries, std::size_t>> runs;
  for (std::size_t i = 0; i < result.runs.size(); ++i) runs.emplace_back(result.series.at(i), result.runs[i].commands);
  return build_cost(std::string(rl::to_string(result.config.algorithm)), runs);
}

std::vector<LoadedRun> load_runs(const fs::path& dir) {
  const json manifest = json::parse(read_file(dir / "manifest.json"));
  std::vector<LoadedRun> out;
  for (const auto& r : manifest.at("runs")) {
    LoadedRun run;
    run.run = r.at("run").get<std::size_t>();
    const fs::path run_dir = dir / r.at("dir").get<std::string>();
    run.q = rl::QTable::from_csv(read_file(run_dir / "qtable.csv"));
    run.logs = rl::from_jsonl(read_file(run_dir / "episodes.jsonl"), run.q);
    out.push_back(std::move(run));
  }
  return out;
}

CostReport cost_report(const fs::path& dir) {
  const json manifest = json::parse(read_file(dir / "manifest.json"));
  std::vector<std::pair<metrics::RunSeries, std::size_t>> runs;
  for (const auto& run : load_runs(dir)) {
    std::size_t sent = 0;
    for (const auto& log : run.logs) sent += log.transitions.size();
    runs.emplace_back(metrics::RunSeries::from_logs(run.run, run.logs), sent);
  }
  return build_cost(manifest.at("config").at("algorithm").get<std::string>(), runs);
}

void set_param(rl::HyperParams& hp, const std::string& name, double value) {
  if (name == "epsilon") {
    hp.epsilon = value;
  } else if (name == "alpha") {
    hp.alpha = value;
  } else if (name == "gamma") {
    hp.gamma = value;
  } else if (name == "lambda") {
    hp.lambda = value;
  } else {
    throw ConfigError("unknown hyperparameter '" + name + "'");
  }
}

SweepPlan SweepPlan::from_json(const json& j) {
  SweepPlan plan;
  try {
    plan.runs = j.value("runs", plan.runs);
    plan.final_window = j.value("final_window", plan.final_window);
    if (j.contains("base")) {
      for (const auto& [key, value] : j.at("base").items()) set_param(plan.base, key, value.get<double>());
    }
    for (const auto& p : j.at("sweep")) {
      plan.parameters.emplace_back(p.at("param").get<std::string>(), p.at("values").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep plan: ") + e.what());
  }
  if (plan.parameters.empty()) throw ConfigError("sweep plan lists no parameters");
  for (const auto& [name, values] : plan.parameters) {
    if (values.empty()) throw ConfigError("sweep plan: no candidates for " + name);
    rl::HyperParams probe = plan.base;
    set_param(probe, name, values.front());
  }
  if (plan.runs < 1 || plan.final_window < 1) throw ConfigError("sweep plan: runs and final_window must be >= 1");
  return plan;
}

double final_window_mean(const ExperimentResult& result, std::size_t window) {
  std::vector<double> per_run;
  for (const auto& s : result.series) {
    if (s.rewards.empty()) continue;
    const std::size_t n = std::min(window, s.rewards.size());
    std::vector<double> tail(s.rewards.end() - static_cast<std::ptrdiff_t>(n), s.rewards.end());
    per_run.push_back(metrics::order_free_mean(std::move(tail)));
  }
  return metrics::order_free_mean(std::move(per_run));
}

TuneResult tune(const SweepPlan& plan, const ExperimentConfig& cfg) {
  TuneResult result;
  result.best = plan.base;
  for (const auto& [name, values] : plan.parameters) {
    std::optional<std::size_t> chosen;
    for (const double v : values) {
      ExperimentConfig c = cfg;
      c.hp = result.best;
      set_param(c.hp, name, v);
      c.n_runs = plan.runs;
      c.eval_every = 0;
      const ExperimentResult r = execute(c);
      CandidateReport rep{name, v, final_window_mean(r, plan.final_window), r.aggregate ? r.aggregate->mean_reward : std::vector<double>{}, false};
      result.candidates.push_back(rep);
      const std::size_t idx = result.candidates.size() - 1;
      if (!chosen) {
        chosen = idx;
        continue;
      }
      const auto& best = result.candidates[*chosen];
      if (rep.objective > best.objective) {
        chosen = idx;
      } else if (rep.objective == best.objective) {
        const double keep = std::min(best.value, v);
        result.notes.push_back("tie on " + name + " between " + rl::format_double(best.value) + " and " + rl::format_double(v) +
                               ", kept " + rl::format_double(keep));
        if (v < best.value) chosen = idx;
      }
    }
    result.candidates[*chosen].selected = true;
    set_param(result.best, name, result.candidates[*chosen].value);
  }
  return result;
}

std::string TuneResult::report_csv() const {
  std::string out = "parameter,value,objective,selected\n";
  for (const auto& c : candidates) {
    out += c.parameter + "," + rl::format_double(c.value) + "," + rl::format_double(c.objective) + "," + (c.selected ? "1" : "0") + "\n";
  }
  return out;
}

std::string TuneResult::curves_csv() const {
  std::string out = "parameter,value,episode,mean_reward\n";
  for (const auto& c : candidates) {
    for (std::size_t e = 0; e < c.mean_reward.size(); ++e) {
      out += c.parameter + "," + rl::format_double(c.value) + "," + std::to_string(e + 1) + "," + rl::format_double(c.mean_reward[e]) + "\n";
    }
  }
  return out;
}

}  // namespace rliot::harness
