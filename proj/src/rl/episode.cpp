#include "rliot/rl/episode.hpp"

#include <chrono>
#include <nlohmann/json.hpp>

namespace rliot::rl {

std::string_view to_string(EpisodeEnd e) {
  switch (e) {
    case EpisodeEnd::success: return "success";
    case EpisodeEnd::fail: return "fail";
    case EpisodeEnd::timeout: return "timeout";
    case EpisodeEnd::aborted: return "aborted";
  }
  return "?";
}

EpisodeEnd parse_episode_end(std::string_view s) {
  if (s == "success") return EpisodeEnd::success;
  if (s == "fail") return EpisodeEnd::fail;
  if (s == "timeout") return EpisodeEnd::timeout;
  if (s == "aborted") return EpisodeEnd::aborted;
  throw std::invalid_argument("unknown episode end '" + std::string(s) + "'");
}

double EpisodeLog::total_reward() const {
  double sum = 0.0;
  for (const auto& t : transitions) sum += t.reward;
  return sum;
}

namespace {

// Q-learning picks the next action from the updated table; the other three
// need it before the update.
bool selects_before_update(Algorithm a) { return a != Algorithm::qlearning; }

void apply_update(QTable& q, TraceTable& e, Algorithm algorithm, const Step& step, const Selection& next,
                  const HyperParams& hp) {
  switch (algorithm) {
    case Algorithm::qlearning: q_learning_update(q, step, hp); break;
    case Algorithm::sarsa: sarsa_update(q, step, next.action, hp); break;
    case Algorithm::sarsalambda: sarsa_lambda_update(q, e, step, next.action, hp); break;
    case Algorithm::qlambda: watkins_q_lambda_update(q, e, step, next.greedy, hp); break;
  }
}

}  // namespace

EpisodeLog run_episode(Environment& env, QTable& q, TraceTable& e, const EpisodeOptions& options, Rng& rng) {
  if (q.num_actions() == 0) throw std::invalid_argument("empty action set: the message dictionary has no actions");
  const auto started = std::chrono::steady_clock::now();
  const Algorithm algorithm = options.algorithm;
  const double epsilon = options.learn ? options.hp.epsilon_at(options.episode) : 0.0;
  EpisodeLog log;
  log.episode = options.episode;
  if (options.learn && uses_traces(algorithm)) e.reset();

  const auto finish = [&](EpisodeEnd end) {
    log.end = end;
    log.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return log;
  };

  std::size_t state = 0;
  try {
    state = env.reset();
  } catch (const EpisodeAborted&) {
    return finish(EpisodeEnd::aborted);
  }
  Selection current = select_action(q, state, epsilon, rng);
  for (std::size_t t = 1;; ++t) {
    EnvStep out;
    try {
      out = env.step(current.action, rng);
    } catch (const EpisodeAborted&) {
      if (selects_before_update(algorithm) && !log.transitions.empty()) {
        log.tail_action = current.action;
        log.tail_greedy = current.greedy;
      }
      return finish(EpisodeEnd::aborted);
    }
    log.transitions.push_back({state, current.action, out.reward, out.next_state, current.greedy, out.command_failed});
    const bool terminal = out.terminal.has_value();
    const Step step{state, current.action, out.reward, out.next_state, terminal};

    Selection next;
    if (selects_before_update(algorithm) && !terminal) next = select_action(q, out.next_state, epsilon, rng);
    if (options.learn) apply_update(q, e, algorithm, step, next, options.hp);

    if (terminal) return finish(*out.terminal);
    if (t >= env.t_max()) {
      if (selects_before_update(algorithm)) {
        log.tail_action = next.action;
        log.tail_greedy = next.greedy;
      }
      return finish(EpisodeEnd::timeout);
    }
    if (!selects_before_update(algorithm)) next = select_action(q, out.next_state, epsilon, rng);
    state = out.next_state;
    current = next;
  }
}

void replay(QTable& q, std::span<const EpisodeLog> logs, Algorithm algorithm, const HyperParams& hp) {
  TraceTable e = TraceTable::like(q);
  for (const auto& log : logs) {
    e.reset();
    const auto& tr = log.transitions;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const bool last = i + 1 == tr.size();
      const bool terminal = last && (log.end == EpisodeEnd::success || log.end == EpisodeEnd::fail);
      Selection next;
      if (!last) {
        next = {tr[i + 1].action, tr[i + 1].greedy};
      } else if (log.tail_action) {
        next = {*log.tail_action, log.tail_greedy};
      } else if (selects_before_update(algorithm) && !terminal) {
        throw std::invalid_argument("episode " + std::to_string(log.episode) + " lacks the tail action needed to replay it");
      }
      apply_update(q, e, algorithm, {tr[i].state, tr[i].action, tr[i].reward, tr[i].next_state, terminal}, next, hp);
    }
  }
}

std::string to_jsonl(const EpisodeLog& log, const LabelledMatrix& labels) {
  using nlohmann::json;
  std::string out;
  if (log.transitions.empty()) {
    out += json{{"episode", log.episode}, {"t", 0}, {"end", to_string(log.end)}}.dump() + "\n";
    return out;
  }
  for (std::size_t i = 0; i < log.transitions.size(); ++i) {
    const auto& t = log.transitions[i];
    json line = {{"episode", log.episode},
                 {"t", i + 1},
                 {"s", labels.states()[t.state]},
                 {"a", labels.actions()[t.action]},
                 {"r", t.reward},
                 {"s_next", labels.states()[t.next_state]},
                 {"greedy", t.greedy},
                 {"failed", t.command_failed}};
    if (i + 1 == log.transitions.size()) {
      line["end"] = to_string(log.end);
      if (log.tail_action) {
        line["tail_action"] = labels.actions()[*log.tail_action];
        line["tail_greedy"] = log.tail_greedy;
      }
    }
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<EpisodeLog> from_jsonl(std::string_view text, const LabelledMatrix& labels) {
  using nlohmann::json;
  std::vector<EpisodeLog> logs;
  bool open = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    const json j = json::parse(line.begin(), line.end());
    const auto episode = j.at("episode").get<std::size_t>();
    if (!open || logs.back().episode != episode) {
      logs.emplace_back();
      logs.back().episode = episode;
      open = true;
    }
    EpisodeLog& log = logs.back();
    if (j.at("t").get<std::size_t>() > 0) {
      log.transitions.push_back({labels.state_index(j.at("s").get<std::string>()),
                                 labels.action_index(j.at("a").get<std::string>()), j.at("r").get<double>(),
                                 labels.state_index(j.at("s_next").get<std::string>()), j.at("greedy").get<bool>(),
                                 j.at("failed").get<bool>()});
    }
    if (j.contains("end")) {
      log.end = parse_episode_end(j.at("end").get<std::string>());
      if (j.contains("tail_action")) {
        log.tail_action = labels.action_index(j.at("tail_action").get<std::string>());
        log.tail_greedy = j.at("tail_greedy").get<bool>();
      }
      open = false;
    }
  }
  return logs;
}

}  // namespace rliot::rl
