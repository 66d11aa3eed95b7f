#include "rliot/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "rliot/device_sim/server.hpp"
#include "rliot/env/session.hpp"
#include "rliot/protocol/dictionary.hpp"

namespace rliot::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kVersion = "1.0.0";

fs::path resolve(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  const fs::path p = j.at(key).get<std::string>();
  if (p.empty()) return {};
  return p.is_absolute() ? p : fs::weakly_canonical(base / p);
}

std::string run_dir_name(std::size_t run) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "run_%02zu", run);
  return buf;
}

RunResult execute_run(const ExperimentConfig& cfg, const env::GoalSpec& goal, const protocol::MessageDictionary& dictionary,
                      const sim::SimProfile& profile, std::size_t run) {
  RunResult r;
  r.run = run;
  r.seed = run_seed(cfg.seed, run);
  const auto started = std::chrono::steady_clock::now();

  std::unique_ptr<sim::BulbServer> server;
  net::Endpoint endpoint;
  env::ResetHook hook;
  if (cfg.device) {
    endpoint = *cfg.device;
  } else {
    sim::ServerOptions options;
    options.bind_address = "127.0.0.1";
    options.port = 0;
    options.rate_limit = cfg.sim_rate_limit;
    server = std::make_unique<sim::BulbServer>(profile, options);
    endpoint = {"127.0.0.1", server->port()};
    hook = [s = server.get()](const sim::BulbState& state) { s->reset_device(state); };
  }
  env::TcpDeviceLink link(endpoint, cfg.pacing);
  env::Session session(goal, dictionary, link, hook);
  env::BulbEnvironment environment(session);

  r.q = rl::QTable(session.space().labels(), dictionary.action_labels());
  rl::TraceTable traces = rl::TraceTable::like(r.q);
  Rng rng(r.seed);
  const std::uint64_t eval_base = derive_seed(r.seed, 0x6576616cULL);
  for (std::size_t episode = 1; episode <= cfg.n_episodes; ++episode) {
    rl::EpisodeOptions options{cfg.algorithm, cfg.hp, episode, true};
    r.logs.push_back(rl::run_episode(environment, r.q, traces, options, rng));
    if (!r.logs.back().valid()) ++r.aborted;
    r.commands += r.logs.back().transitions.size();

    const bool evaluate = episode == cfg.n_episodes || (cfg.eval_every > 0 && episode % cfg.eval_every == 0);
    if (!evaluate) continue;
    for (std::size_t k = 0; k < cfg.eval_episodes; ++k) {
      Rng eval_rng(derive_seed(eval_base, episode * cfg.eval_episodes + k));
      options.learn = false;
      const auto log = rl::run_episode(environment, r.q, traces, options, eval_rng);
      r.evaluations.push_back({episode, log.total_reward(), log.transitions.size(), log.end});
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (goal.empty()) fail("config: goal path missing");
  if (dictionary.empty()) fail("config: dictionary path missing");
  if (n_episodes < 1) fail("config: n_episodes must be >= 1");
  if (n_runs < 1) fail("config: n_runs must be >= 1");
  if (eval_episodes < 1) fail("config: eval_episodes must be >= 1");
  if (window < 1) fail("config: window must be >= 1");
  try {
    hp.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json(const json& doc, const fs::path& base_dir) {
  const json& j = doc.contains("config") ? doc.at("config") : doc;
  ExperimentConfig c;
  try {
    c.goal = resolve(j, "goal", base_dir);
    c.dictionary = resolve(j, "dictionary", base_dir);
    c.profile = resolve(j, "profile", base_dir);
    c.algorithm = rl::parse_algorithm(j.at("algorithm").get<std::string>());
    const json hp = j.value("hp", json::object());
    c.hp.epsilon = hp.value("epsilon", c.hp.epsilon);
    c.hp.alpha = hp.value("alpha", c.hp.alpha);
    c.hp.gamma = hp.value("gamma", c.hp.gamma);
    if (hp.contains("lambda") && !hp.at("lambda").is_null()) {
      c.hp.lambda = hp.at("lambda").get<double>();
    } else if (rl::uses_traces(c.algorithm)) {
      throw ConfigError("config: algorithm " + std::string(rl::to_string(c.algorithm)) + " needs hp.lambda");
    }
    if (hp.contains("epsilon_decay") && !hp.at("epsilon_decay").is_null()) c.hp.epsilon_decay = hp.at("epsilon_decay").get<double>();
    c.n_episodes = j.value("n_episodes", c.n_episodes);
    c.n_runs = j.value("n_runs", c.n_runs);
    c.seed = j.value("seed", c.seed);
    if (j.contains("device") && !j.at("device").is_null()) c.device = net::Endpoint::parse(j.at("device").get<std::string>());
    c.sim_rate_limit = j.value("sim_rate_limit", c.sim_rate_limit);
    c.pacing = std::chrono::milliseconds(j.value("pacing_ms", std::int64_t{c.device ? 1000 : 0}));
    c.eval_every = j.value("eval_every", c.eval_every);
    c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
    c.window = j.value("window", c.window);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

json ExperimentConfig::to_json() const {
  json hpj = {{"epsilon", hp.epsilon}, {"alpha", hp.alpha}, {"gamma", hp.gamma}, {"lambda", hp.lambda}};
  hpj["epsilon_decay"] = hp.epsilon_decay ? json(*hp.epsilon_decay) : json(nullptr);
  return {{"goal", fs::absolute(goal).string()},
          {"dictionary", fs::absolute(dictionary).string()},
          {"profile", profile.empty() ? std::string() : fs::absolute(profile).string()},
          {"algorithm", std::string(rl::to_string(algorithm))},
          {"hp", hpj},
          {"n_episodes", n_episodes},
          {"n_runs", n_runs},
          {"seed", seed},
          {"device", device ? json(device->str()) : json(nullptr)},
          {"sim_rate_limit", sim_rate_limit},
          {"pacing_ms", pacing.count()},
          {"eval_every", eval_every},
          {"eval_episodes", eval_episodes},
          {"window", window},
          {"threads", threads}};
}

std::uint64_t run_seed(std::uint64_t base, std::size_t run) { return derive_seed(base, run); }

ExperimentResult execute(const ExperimentConfig& cfg) {
  cfg.validate();
  const env::GoalSpec goal = env::GoalSpec::load(cfg.goal);
  const auto dictionary = protocol::MessageDictionary::load(cfg.dictionary);
  if (dictionary.actions().empty()) throw ConfigError("dictionary " + cfg.dictionary.string() + " has no actions");
  const sim::SimProfile profile = cfg.profile.empty() ? sim::SimProfile::standard() : sim::SimProfile::load(cfg.profile);
  if (cfg.device) {
    try {
      net::TcpStream::connect(*cfg.device, std::chrono::seconds(2));
    } catch (const net::NetError& e) {
      throw std::runtime_error("device " + cfg.device->str() + " unreachable: " + e.what());
    }
  }

  ExperimentResult result;
  result.config = cfg;
  result.runs.resize(cfg.n_runs);
  std::size_t workers = cfg.threads > 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.n_runs);
  // An external device is a single shared session.
  if (cfg.device) workers = 1;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < cfg.n_runs; i = next++) {
      try {
        result.runs[i] = execute_run(cfg, goal, dictionary, profile, i + 1);
      } catch (const std::exception& e) {
        result.runs[i].run = i + 1;
        result.runs[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& r : result.runs) {
    if (!r.error.empty()) throw std::runtime_error("run " + std::to_string(r.run) + " failed: " + r.error);
  }

  for (const auto& r : result.runs) result.series.push_back(metrics::RunSeries::from_logs(r.run, r.logs));
  const bool any_empty = std::any_of(result.series.begin(), result.series.end(), [](const auto& s) { return s.episodes() == 0; });
  if (!any_empty) result.aggregate = metrics::aggregate(result.series, cfg.window);
  return result;
}

std::string evaluation_csv(const ExperimentResult& result) {
  std::string out = "run,after_episode,reward,steps,end\n";
  for (const auto& r : result.runs) {
    for (const auto& e : r.evaluations) {
      out += std::to_string(r.run) + "," + std::to_string(e.after_episode) + "," + rl::format_double(e.reward) + "," +
             std::to_string(e.steps) + "," + std::string(rl::to_string(e.end)) + "\n";
    }
  }
  return out;
}

void write_artifacts(const ExperimentResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  json runs = json::array();
  json timing = json::array();
  for (const auto& r : result.runs) {
    const fs::path run_dir = dir / run_dir_name(r.run);
    fs::create_directories(run_dir);
    std::string jsonl;
    for (const auto& log : r.logs) jsonl += rl::to_jsonl(log, r.q);
    write_file(run_dir / "episodes.jsonl", jsonl);
    write_file(run_dir / "qtable.csv", r.q.to_csv());
    runs.push_back({{"run", r.run},
                    {"seed", r.seed},
                    {"dir", run_dir_name(r.run)},
                    {"episodes", r.logs.size()},
                    {"aborted", r.aborted},
                    {"commands", r.commands}});
    timing.push_back({{"run", r.run}, {"wall_seconds", r.wall_seconds}});
  }
  const json manifest = {{"tool", "rliot"}, {"version", kVersion}, {"config", result.config.to_json()}, {"runs", runs}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "timing.json", json{{"runs", timing}}.dump(2) + "\n");
  if (result.aggregate) {
    write_file(dir / "reward_per_episode.csv", metrics::reward_csv(result.series, *result.aggregate));
    write_file(dir / "steps_per_episode.csv", metrics::steps_csv(result.series, *result.aggregate));
    write_file(dir / "cumulative_vs_actions.csv", metrics::cumulative_csv(result.series, *result.aggregate));
  }
  write_file(dir / "evaluation.csv", evaluation_csv(result));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
  ExperimentResult result = execute(cfg);
  write_artifacts(result, dir);
  return result;
}

std::string timestamped_name(std::string_view prefix) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return std::string(prefix) + "-" + buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace rliot::harness
