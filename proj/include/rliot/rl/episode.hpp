#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rliot/rl/algorithms.hpp"
#include "rliot/rl/q_table.hpp"
#include "rliot/rng.hpp"

namespace rliot::rl {

enum class EpisodeEnd { success, fail, timeout, aborted };

std::string_view to_string(EpisodeEnd e);
EpisodeEnd parse_episode_end(std::string_view s);

struct EnvStep {
  std::size_t next_state = 0;
  double reward = 0.0;
  bool command_failed = false;
  /// success or fail when the episode ended on this step.
  std::optional<EpisodeEnd> terminal;
};

/// Thrown by an environment when a step cannot be completed; the episode is
/// abandoned and its log flagged invalid.
class EpisodeAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What the episode loop needs from an environment.
class Environment {
 public:
  virtual ~Environment() = default;
  /// Restores the initial condition and returns the start state index.
  virtual std::size_t reset() = 0;
  virtual EnvStep step(std::size_t action, Rng& rng) = 0;
  virtual std::size_t t_max() const = 0;
};

struct LoggedTransition {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool greedy = false;
  bool command_failed = false;

  friend bool operator==(const LoggedTransition&, const LoggedTransition&) = default;
};

struct EpisodeLog {
  std::size_t episode = 0;  // 1-based
  std::vector<LoggedTransition> transitions;
  EpisodeEnd end = EpisodeEnd::timeout;
  /// Action drawn at the state reached by a timed-out episode, for the
  /// algorithms that choose it before updating.
  std::optional<std::size_t> tail_action;
  bool tail_greedy = false;
  double duration_s = 0.0;  // wall clock, not serialised

  bool valid() const { return end != EpisodeEnd::aborted; }
  double total_reward() const;
};

struct EpisodeOptions {
  Algorithm algorithm = Algorithm::qlearning;
  HyperParams hp;
  std::size_t episode = 1;
  /// Evaluation passes act greedily and leave Q untouched.
  bool learn = true;
};

/// Runs one episode: select, step, update until a terminal state or t_max.
/// An empty action set is a configuration error (std::invalid_argument).
EpisodeLog run_episode(Environment& env, QTable& q, TraceTable& e, const EpisodeOptions& options, Rng& rng);

/// Re-applies the logged updates, in order, to `q`.
void replay(QTable& q, std::span<const EpisodeLog> logs, Algorithm algorithm, const HyperParams& hp);

/// JSON lines, one transition per line, labels taken from `labels`.
std::string to_jsonl(const EpisodeLog& log, const LabelledMatrix& labels);
/// Parses a JSONL stream of possibly many episodes.
std::vector<EpisodeLog> from_jsonl(std::string_view text, const LabelledMatrix& labels);

}  // namespace rliot::rl
