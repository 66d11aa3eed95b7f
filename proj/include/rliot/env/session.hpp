#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rliot/device_sim/bulb.hpp"
#include "rliot/env/goal.hpp"
#include "rliot/net/socket.hpp"
#include "rliot/protocol/dictionary.hpp"
#include "rliot/protocol/message.hpp"
#include "rliot/rl/episode.hpp"

namespace rliot::env {

/// Socket API: one request/response exchange with a device.
class DeviceLink {
 public:
  virtual ~DeviceLink() = default;
  /// Sends one command and returns the device's answer. Undecodable answers
  /// come back as error results; transport failures throw net::NetError.
  virtual protocol::ResultMessage exchange(const std::string& method, const std::vector<protocol::ParamValue>& params) = 0;
  /// Drops the connection so the next exchange reconnects.
  virtual void reconnect() {}
};

/// JSON-over-TCP link with per-connection id counter and optional pacing
/// between exchanges.
class TcpDeviceLink : public DeviceLink {
 public:
  explicit TcpDeviceLink(net::Endpoint device, std::chrono::milliseconds pacing = std::chrono::milliseconds(0),
                         std::chrono::milliseconds timeout = std::chrono::seconds(2));

  protocol::ResultMessage exchange(const std::string& method, const std::vector<protocol::ParamValue>& params) override;
  void reconnect() override;

  std::size_t exchanges() const { return exchanges_; }

 private:
  net::Endpoint device_;
  std::chrono::milliseconds pacing_;
  std::chrono::milliseconds timeout_;
  net::TcpStream stream_;
  std::int64_t next_id_ = 1;
  std::size_t exchanges_ = 0;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

/// Restores a device to a goal's initial state.
using ResetHook = std::function<void(const sim::BulbState&)>;

/// Reset by commands, for devices without a reset side channel.
ResetHook command_reset(DeviceLink& link);

/// Reads the feedback state with get_prop. Throws net::NetError on transport
/// failure and std::runtime_error when the answer is not a state.
sim::BulbState read_state(DeviceLink& link);

struct StepOutcome {
  AbstractState next;
  int reward = 0;
  bool command_failed = false;
  protocol::ResultMessage raw_response;
  std::string method;
  std::vector<protocol::ParamValue> params;
};

/// A goal-driven episode against one device.
class Session {
 public:
  Session(GoalSpec goal, const protocol::MessageDictionary& dictionary, DeviceLink& link, ResetHook reset_hook);

  /// Restores the goal's initial condition. Throws rl::EpisodeAborted when
  /// the device cannot be reached or does not reach the initial state.
  AbstractState reset();
  /// One time step: sample the action's parameters, send, read the state
  /// back, abstract and reward it. Transport failures are retried once, then
  /// abort the episode.
  StepOutcome step(std::size_t action, Rng& rng);

  const GoalSpec& goal() const { return goal_; }
  const StateSpace& space() const { return space_; }
  const AbstractState& state() const { return state_; }
  std::size_t t() const { return t_; }
  /// Agent commands sent since construction (feedback reads excluded).
  std::size_t commands_sent() const { return commands_; }

 private:
  template <class F>
  auto with_retry(F&& f) -> decltype(f());

  GoalSpec goal_;
  StateSpace space_;
  const protocol::MessageDictionary& dictionary_;
  DeviceLink& link_;
  ResetHook reset_hook_;
  sim::BulbState initial_;
  sim::BulbState current_;
  History history_;
  AbstractState state_;
  std::size_t t_ = 0;
  std::size_t commands_ = 0;
};

/// Adapts a Session to the episode loop.
class BulbEnvironment : public rl::Environment {
 public:
  explicit BulbEnvironment(Session& session) : session_(session) {}

  std::size_t reset() override;
  rl::EnvStep step(std::size_t action, Rng& rng) override;
  std::size_t t_max() const override { return session_.goal().t_max; }

 private:
  Session& session_;
};

}  // namespace rliot::env
