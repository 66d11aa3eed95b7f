#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rliot/device_sim/bulb.hpp"

namespace rliot::env {

/// Non-power attributes a goal can track.
enum class Attribute : std::uint8_t { color, brightness, name };

inline constexpr Attribute kAttributes[] = {Attribute::color, Attribute::brightness, Attribute::name};

std::string_view to_string(Attribute a);
Attribute parse_attribute(std::string_view s);
/// Short form used in state labels ("bright" for brightness).
std::string_view short_name(Attribute a);

/// Attribute-change events: "power_on", "power_off", or an attribute name.
enum class Event : std::uint8_t { power_on, power_off, color, brightness, name };

std::string_view to_string(Event e);
Event parse_event(std::string_view s);
Event event_of(Attribute a);

using AttributeSet = std::uint8_t;  // bit i = kAttributes[i]

inline constexpr AttributeSet bit(Attribute a) { return static_cast<AttributeSet>(1u << static_cast<unsigned>(a)); }
inline constexpr bool contains(AttributeSet s, Attribute a) { return (s & bit(a)) != 0; }

class GoalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rewards {
  int success = 0;
  std::optional<int> unordered_success;
  int step = -1;
  int error = -10;
  int fail = 0;
};

/// One learning task. Loaded from the goal file format.
struct GoalSpec {
  std::string name;
  bool track_power = true;
  std::vector<Attribute> tracked;  // non-power tracked attributes, in file order
  sim::BulbState initial;
  Rewards rewards;
  std::vector<Event> required_order;
  sim::Power success_power = sim::Power::on;
  AttributeSet success_changed = 0;
  /// Attributes that must equal their initial value when the goal is reached;
  /// reaching it otherwise is a failure.
  AttributeSet constant = 0;
  std::optional<sim::Power> fail_power;
  std::size_t t_max = 100;

  /// Throws GoalError describing the first violated invariant.
  void validate() const;

  static GoalSpec parse(std::string_view json_text);
  static GoalSpec load(const std::filesystem::path& path);
};

enum class Terminal : std::uint8_t { none, success, unordered_success, fail };

std::string_view to_string(Terminal t);

struct AbstractState {
  sim::Power power = sim::Power::on;
  AttributeSet changed = 0;
  bool order_ok = true;
  Terminal terminal = Terminal::none;

  friend bool operator==(const AbstractState&, const AbstractState&) = default;
};

/// First-change history of an episode, used for order tracking.
struct History {
  std::vector<Event> first_changes;
  bool order_ok = true;
};

/// Events produced by the concrete transition before -> after, restricted to
/// the goal's tracked attributes. Power events come first.
std::vector<Event> events_between(const sim::BulbState& before, const sim::BulbState& after, const GoalSpec& goal);

/// Folds one step's events into the first-change history.
void record_events(const GoalSpec& goal, History& history, const std::vector<Event>& events);

/// Terminal classification of (power, changed, order_ok) under `goal`.
Terminal classify(sim::Power power, AttributeSet changed, bool order_ok, const GoalSpec& goal);

/// Abstract state reached by the concrete transition before -> after.
/// Updates `history` with any first-change events.
AbstractState abstract(const sim::BulbState& before, const sim::BulbState& after, const sim::BulbState& episode_initial,
                       const GoalSpec& goal, History& history);

/// Step outcome categories of the reward function.
enum class Outcome { normal_step, command_error, fail_terminal, success_ordered, success_unordered };

/// Reward contribution of one outcome category.
int reward(Outcome outcome, const GoalSpec& goal);

/// Full reward of one step: the step or error penalty plus any terminal
/// bonus.
int step_reward(bool command_failed, Terminal terminal, const GoalSpec& goal);

enum class EpisodeStatus { none, success, fail, timeout };

EpisodeStatus is_terminal(const AbstractState& state, std::size_t t, const GoalSpec& goal);

/// The goal's finite abstract machine: every reachable-in-principle state,
/// enumerated once in a stable order, with row labels for the Q-table.
class StateSpace {
 public:
  explicit StateSpace(const GoalSpec& goal);

  std::size_t size() const { return states_.size(); }
  const std::vector<AbstractState>& states() const { return states_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t index(const AbstractState& s) const;
  const AbstractState& at(std::size_t i) const { return states_.at(i); }
  /// Index of the episode-start state.
  std::size_t initial() const { return initial_; }

 private:
  std::vector<AbstractState> states_;
  std::vector<std::string> labels_;
  std::size_t initial_ = 0;
};

/// Q-table row label, e.g. "start", "+on+name+bright", "+color+misordered".
std::string state_label(const AbstractState& s, const GoalSpec& goal);

}  // namespace rliot::env
