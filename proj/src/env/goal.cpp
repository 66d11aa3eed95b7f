#include "rliot/env/goal.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rliot::env {

using sim::Power;

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::color: return "color";
    case Attribute::brightness: return "brightness";
    case Attribute::name: return "name";
  }
  return "?";
}

Attribute parse_attribute(std::string_view s) {
  for (const auto a : kAttributes) {
    if (to_string(a) == s) return a;
  }
  throw GoalError("unknown attribute '" + std::string(s) + "'");
}

std::string_view short_name(Attribute a) { return a == Attribute::brightness ? "bright" : to_string(a); }

std::string_view to_string(Event e) {
  switch (e) {
    case Event::power_on: return "power_on";
    case Event::power_off: return "power_off";
    case Event::color: return "color";
    case Event::brightness: return "brightness";
    case Event::name: return "name";
  }
  return "?";
}

Event parse_event(std::string_view s) {
  for (const auto e : {Event::power_on, Event::power_off, Event::color, Event::brightness, Event::name}) {
    if (to_string(e) == s) return e;
  }
  throw GoalError("unknown event '" + std::string(s) + "'");
}

Event event_of(Attribute a) {
  switch (a) {
    case Attribute::color: return Event::color;
    case Attribute::brightness: return Event::brightness;
    case Attribute::name: return Event::name;
  }
  return Event::color;
}

std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::none: return "none";
    case Terminal::success: return "success";
    case Terminal::unordered_success: return "unordered_success";
    case Terminal::fail: return "fail";
  }
  return "?";
}

namespace {

AttributeSet tracked_mask(const GoalSpec& goal) {
  AttributeSet m = 0;
  for (const auto a : goal.tracked) m |= bit(a);
  return m;
}

bool differs(const sim::BulbState& x, const sim::BulbState& y, Attribute a) {
  switch (a) {
    case Attribute::color: return x.rgb != y.rgb;
    case Attribute::brightness: return x.bright != y.bright;
    case Attribute::name: return x.name != y.name;
  }
  return false;
}

AttributeSet changed_set(const sim::BulbState& now, const sim::BulbState& initial, const GoalSpec& goal) {
  AttributeSet m = 0;
  for (const auto a : goal.tracked) {
    if (differs(now, initial, a)) m |= bit(a);
  }
  return m;
}

std::size_t order_position(const GoalSpec& goal, Event e) {
  const auto it = std::find(goal.required_order.begin(), goal.required_order.end(), e);
  return static_cast<std::size_t>(it - goal.required_order.begin());
}

AttributeSet parse_attribute_set(const nlohmann::json& j) {
  AttributeSet m = 0;
  for (const auto& v : j) m |= bit(parse_attribute(v.get<std::string>()));
  return m;
}

}  // namespace

void GoalSpec::validate() const {
  const auto fail = [this](const std::string& what) { throw GoalError("goal '" + name + "': " + what); };
  if (rewards.success <= 0) fail("success reward must be positive");
  if (rewards.step >= 0 || rewards.error >= 0) fail("step and error penalties must be negative");
  if (rewards.fail > 0) fail("fail reward must be <= 0");
  if (t_max == 0) fail("t_max must be positive");
  if (!initial.in_range()) fail("initial state out of range");
  const AttributeSet mask = tracked_mask(*this);
  if ((success_changed & ~mask) != 0) fail("success requires a change of an untracked attribute");
  if ((constant & ~mask) != 0) fail("constant attribute is not tracked");
  if ((constant & success_changed) != 0) fail("an attribute cannot be both required to change and constant");
  for (std::size_t i = 0; i < required_order.size(); ++i) {
    if (std::count(required_order.begin(), required_order.end(), required_order[i]) > 1) {
      fail("required_order lists " + std::string(to_string(required_order[i])) + " twice");
    }
    const Event e = required_order[i];
    const bool power_event = e == Event::power_on || e == Event::power_off;
    if (power_event ? !track_power : !std::any_of(tracked.begin(), tracked.end(), [e](Attribute a) { return event_of(a) == e; })) {
      fail("required_order event " + std::string(to_string(e)) + " is not tracked");
    }
  }
}

GoalSpec GoalSpec::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::exception& e) {
    throw GoalError(std::string("goal file is not valid JSON: ") + e.what());
  }
  GoalSpec g;
  try {
    g.name = doc.value("name", std::string("goal"));
    g.track_power = false;
    for (const auto& v : doc.at("tracked_attributes")) {
      const auto s = v.get<std::string>();
      if (s == "power") {
        g.track_power = true;
      } else {
        const Attribute a = parse_attribute(s);
        if (std::find(g.tracked.begin(), g.tracked.end(), a) != g.tracked.end()) throw GoalError("attribute tracked twice: " + s);
        g.tracked.push_back(a);
      }
    }
    g.initial = sim::state_from_json(doc.at("initial"));
    const auto& r = doc.at("rewards");
    g.rewards.success = r.at("success").get<int>();
    if (r.contains("unordered_success") && !r.at("unordered_success").is_null()) {
      g.rewards.unordered_success = r.at("unordered_success").get<int>();
    }
    g.rewards.step = r.at("step").get<int>();
    g.rewards.error = r.at("error").get<int>();
    g.rewards.fail = r.at("fail").get<int>();
    if (doc.contains("required_order")) {
      for (const auto& v : doc.at("required_order")) g.required_order.push_back(parse_event(v.get<std::string>()));
    }
    const auto& success = doc.at("success");
    g.success_power = sim::parse_power(success.at("power").get<std::string>());
    g.success_changed = parse_attribute_set(success.value("changed", nlohmann::json::array()));
    if (doc.contains("constant_attributes")) g.constant = parse_attribute_set(doc.at("constant_attributes"));
    if (doc.contains("fail") && !doc.at("fail").is_null()) {
      g.fail_power = sim::parse_power(doc.at("fail").at("power").get<std::string>());
    }
    g.t_max = doc.value("t_max", std::size_t{100});
  } catch (const nlohmann::json::exception& e) {
    throw GoalError(std::string("malformed goal file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw GoalError(std::string("malformed goal file: ") + e.what());
  }
  g.validate();
  return g;
}

GoalSpec GoalSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GoalError("cannot open goal file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<Event> events_between(const sim::BulbState& before, const sim::BulbState& after, const GoalSpec& goal) {
  std::vector<Event> out;
  if (goal.track_power && before.power != after.power) {
    out.push_back(after.power == Power::on ? Event::power_on : Event::power_off);
  }
  for (const auto a : goal.tracked) {
    if (differs(before, after, a)) out.push_back(event_of(a));
  }
  return out;
}

Terminal classify(Power power, AttributeSet changed, bool order_ok, const GoalSpec& goal) {
  const bool reached = power == goal.success_power && (changed & goal.success_changed) == goal.success_changed;
  if (reached) {
    if ((changed & goal.constant) != 0) return Terminal::fail;
    if (goal.required_order.empty() || order_ok) return Terminal::success;
    return goal.rewards.unordered_success ? Terminal::unordered_success : Terminal::fail;
  }
  if (goal.fail_power && power == *goal.fail_power) return Terminal::fail;
  return Terminal::none;
}

void record_events(const GoalSpec& goal, History& history, const std::vector<Event>& events) {
  if (goal.required_order.empty()) return;
  for (const Event e : events) {
    if (std::find(history.first_changes.begin(), history.first_changes.end(), e) != history.first_changes.end()) continue;
    const std::size_t pos = history.first_changes.size();
    if (pos >= goal.required_order.size() || goal.required_order[pos] != e) history.order_ok = false;
    history.first_changes.push_back(e);
  }
}

AbstractState abstract(const sim::BulbState& before, const sim::BulbState& after, const sim::BulbState& episode_initial,
                       const GoalSpec& goal, History& history) {
  record_events(goal, history, events_between(before, after, goal));
  AbstractState s;
  s.power = after.power;
  s.changed = changed_set(after, episode_initial, goal);
  s.order_ok = history.order_ok;
  s.terminal = classify(s.power, s.changed, s.order_ok, goal);
  return s;
}

int reward(Outcome outcome, const GoalSpec& goal) {
  switch (outcome) {
    case Outcome::normal_step: return goal.rewards.step;
    case Outcome::command_error: return goal.rewards.error;
    case Outcome::fail_terminal: return goal.rewards.fail;
    case Outcome::success_ordered: return goal.rewards.success;
    case Outcome::success_unordered:
      if (!goal.rewards.unordered_success) throw GoalError("goal '" + goal.name + "' defines no unordered success reward");
      return *goal.rewards.unordered_success;
  }
  return 0;
}

int step_reward(bool command_failed, Terminal terminal, const GoalSpec& goal) {
  int r = reward(command_failed ? Outcome::command_error : Outcome::normal_step, goal);
  switch (terminal) {
    case Terminal::none: break;
    case Terminal::success: r += reward(Outcome::success_ordered, goal); break;
    case Terminal::unordered_success: r += reward(Outcome::success_unordered, goal); break;
    case Terminal::fail: r += reward(Outcome::fail_terminal, goal); break;
  }
  return r;
}

EpisodeStatus is_terminal(const AbstractState& state, std::size_t t, const GoalSpec& goal) {
  switch (state.terminal) {
    case Terminal::success:
    case Terminal::unordered_success: return EpisodeStatus::success;
    case Terminal::fail: return EpisodeStatus::fail;
    case Terminal::none: break;
  }
  return t >= goal.t_max ? EpisodeStatus::timeout : EpisodeStatus::none;
}

std::string state_label(const AbstractState& s, const GoalSpec& goal) {
  std::string out;
  if (s.power != goal.initial.power) out += s.power == Power::on ? "+on" : "+off";
  std::vector<Attribute> attrs = goal.tracked;
  std::stable_sort(attrs.begin(), attrs.end(), [&goal](Attribute x, Attribute y) {
    return order_position(goal, event_of(x)) < order_position(goal, event_of(y));
  });
  for (const auto a : attrs) {
    if (contains(s.changed, a)) out += "+" + std::string(short_name(a));
  }
  if (out.empty()) out = "start";
  if (!s.order_ok) out += "+misordered";
  return out;
}

StateSpace::StateSpace(const GoalSpec& goal) {
  const std::size_t n = goal.tracked.size();
  std::vector<AttributeSet> subsets;
  for (std::size_t size = 0; size <= n; ++size) {
    for (std::uint32_t pick = 0; pick < (1u << n); ++pick) {
      if (static_cast<std::size_t>(__builtin_popcount(pick)) != size) continue;
      AttributeSet m = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (pick & (1u << i)) m |= bit(goal.tracked[i]);
      }
      subsets.push_back(m);
    }
  }
  const Power first = goal.initial.power;
  const Power second = first == Power::on ? Power::off : Power::on;
  std::vector<bool> orders = {true};
  if (!goal.required_order.empty()) orders.push_back(false);
  for (const bool ok : orders) {
    for (const Power p : {first, second}) {
      for (const AttributeSet m : subsets) {
        AbstractState s{p, m, ok, classify(p, m, ok, goal)};
        states_.push_back(s);
        labels_.push_back(state_label(s, goal));
      }
    }
  }
  initial_ = 0;
}

std::size_t StateSpace::index(const AbstractState& s) const {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].power == s.power && states_[i].changed == s.changed && states_[i].order_ok == s.order_ok) return i;
  }
  throw std::out_of_range("abstract state outside the goal's state space");
}

}  // namespace rliot::env
