#include "rliot/env/session.hpp"

#include <thread>

#include "rliot/protocol/codec.hpp"

namespace rliot::env {

using protocol::ParamValue;
using protocol::ResultMessage;

TcpDeviceLink::TcpDeviceLink(net::Endpoint device, std::chrono::milliseconds pacing, std::chrono::milliseconds timeout)
    : device_(std::move(device)), pacing_(pacing), timeout_(timeout) {}

void TcpDeviceLink::reconnect() {
  stream_.close();
  next_id_ = 1;
}

ResultMessage TcpDeviceLink::exchange(const std::string& method, const std::vector<ParamValue>& params) {
  if (last_ && pacing_.count() > 0) std::this_thread::sleep_until(*last_ + pacing_);
  last_ = std::chrono::steady_clock::now();
  if (!stream_.is_open()) {
    stream_ = net::TcpStream::connect(device_, timeout_);
    next_id_ = 1;
  }
  const std::int64_t id = next_id_++;
  ++exchanges_;
  try {
    stream_.send_all(protocol::encode_command({id, method, params}));
    const auto line = stream_.read_line(timeout_);
    if (!line) throw net::NetError("no answer from " + device_.str() + " within the timeout");
    ResultMessage reply;
    try {
      reply = protocol::decode_response(*line);
    } catch (const protocol::CodecError& e) {
      return ResultMessage::failure(id, protocol::error_code::kInvalidCommand, std::string("undecodable answer: ") + e.what());
    }
    if (reply.id != id) {
      return ResultMessage::failure(id, protocol::error_code::kInvalidCommand,
                                    "answer id " + std::to_string(reply.id) + " does not match " + std::to_string(id));
    }
    return reply;
  } catch (const net::NetError&) {
    stream_.close();
    throw;
  }
}

sim::BulbState read_state(DeviceLink& link) {
  std::vector<ParamValue> props(sim::kStateProps.begin(), sim::kStateProps.end());
  const ResultMessage reply = link.exchange("get_prop", props);
  if (!reply.ok()) throw std::runtime_error("get_prop failed: " + reply.error().message);
  try {
    return sim::state_from_props(reply.values());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("unusable get_prop answer: ") + e.what());
  }
}

ResetHook command_reset(DeviceLink& link) {
  return [&link](const sim::BulbState& s) {
    const auto send = [&link](const std::string& method, std::vector<ParamValue> params) {
      const auto reply = link.exchange(method, params);
      if (!reply.ok()) throw rl::EpisodeAborted("reset command " + method + " failed: " + reply.error().message);
    };
    send("set_power", {std::string("on"), std::string("sudden"), std::int64_t{30}});
    send("set_ct_abx", {std::int64_t{s.ct}, std::string("sudden"), std::int64_t{30}});
    send("set_rgb", {s.rgb, std::string("sudden"), std::int64_t{30}});
    send("set_bright", {std::int64_t{s.bright}, std::string("sudden"), std::int64_t{30}});
    send("set_name", {s.name});
    if (s.power == sim::Power::off) send("set_power", {std::string("off"), std::string("sudden"), std::int64_t{30}});
  };
}

Session::Session(GoalSpec goal, const protocol::MessageDictionary& dictionary, DeviceLink& link, ResetHook reset_hook)
    : goal_(std::move(goal)), space_(goal_), dictionary_(dictionary), link_(link), reset_hook_(std::move(reset_hook)) {
  goal_.validate();
  if (!reset_hook_) reset_hook_ = command_reset(link_);
}

template <class F>
auto Session::with_retry(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const net::NetError&) {
    link_.reconnect();
  }
  try {
    return f();
  } catch (const net::NetError& e) {
    throw rl::EpisodeAborted(std::string("transport failure after retry: ") + e.what());
  }
}

AbstractState Session::reset() {
  sim::BulbState observed;
  try {
    with_retry([&] {
      reset_hook_(goal_.initial);
      return 0;
    });
    observed = with_retry([&] { return read_state(link_); });
  } catch (const rl::EpisodeAborted&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw rl::EpisodeAborted(std::string("reset failed: ") + e.what());
  }
  const auto& want = goal_.initial;
  if (observed.power != want.power || observed.rgb != want.rgb || observed.bright != want.bright || observed.name != want.name) {
    throw rl::EpisodeAborted("device did not reach the goal's initial state");
  }
  initial_ = observed;
  current_ = observed;
  history_ = {};
  t_ = 0;
  state_ = {observed.power, 0, true, classify(observed.power, 0, true, goal_)};
  return state_;
}

StepOutcome Session::step(std::size_t action, Rng& rng) {
  StepOutcome out;
  auto [method, params] = dictionary_.instantiate(action, rng);
  out.method = method;
  out.params = params;
  ++t_;
  ++commands_;
  sim::BulbState after;
  try {
    out.raw_response = with_retry([&] { return link_.exchange(method, params); });
    after = with_retry([&] { return read_state(link_); });
  } catch (const rl::EpisodeAborted&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw rl::EpisodeAborted(e.what());
  }
  out.command_failed = !out.raw_response.ok();
  state_ = abstract(current_, after, initial_, goal_, history_);
  current_ = after;
  out.next = state_;
  out.reward = step_reward(out.command_failed, state_.terminal, goal_);
  return out;
}

std::size_t BulbEnvironment::reset() { return session_.space().index(session_.reset()); }

rl::EnvStep BulbEnvironment::step(std::size_t action, Rng& rng) {
  const StepOutcome o = session_.step(action, rng);
  rl::EnvStep s;
  s.next_state = session_.space().index(o.next);
  s.reward = o.reward;
  s.command_failed = o.command_failed;
  switch (o.next.terminal) {
    case Terminal::success:
    case Terminal::unordered_success: s.terminal = rl::EpisodeEnd::success; break;
    case Terminal::fail: s.terminal = rl::EpisodeEnd::fail; break;
    case Terminal::none: break;
  }
  return s;
}

}  // namespace rliot::env
