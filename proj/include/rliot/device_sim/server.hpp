#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rliot/device_sim/bulb.hpp"
#include "rliot/device_sim/rate_limiter.hpp"
#include "rliot/net/socket.hpp"

namespace rliot::sim {

inline constexpr std::uint16_t kDefaultPort = 55443;
inline constexpr std::uint16_t kAdvertisePort = 1982;
inline constexpr const char* kAdvertiseGroup = "239.255.255.250";

struct ServerOptions {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = kDefaultPort;
  bool rate_limit = true;
  std::size_t quota = 60;
  std::chrono::milliseconds window = std::chrono::seconds(60);
  ClockFn clock;  // steady_clock::now when empty
};

/// TCP command server for one virtual bulb. Serves one connection at a time
/// on a background thread; snapshot() and reset_device() may be called from
/// any thread.
class BulbServer {
 public:
  /// Binds immediately; throws net::NetError when the address is taken.
  BulbServer(SimProfile profile, ServerOptions options);
  ~BulbServer();
  BulbServer(const BulbServer&) = delete;
  BulbServer& operator=(const BulbServer&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  BulbState snapshot() const;
  void reset_device(const BulbState& state);
  std::size_t commands_handled() const { return handled_.load(); }
  const SimProfile& profile() const { return profile_; }
  void stop();

  /// Response for one raw request line; the network loop uses it and tests
  /// can drive it directly.
  std::string handle_line(std::string_view line);

 private:
  void serve();

  SimProfile profile_;
  ServerOptions options_;
  net::TcpListener listener_;
  mutable std::mutex mutex_;
  BulbState state_;
  RateLimiter limiter_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> handled_{0};
  std::thread thread_;
};

/// SSDP-style presence announcement with the bulb's current state.
std::string format_advertisement(const std::string& device_id, const std::string& location, const BulbState& state,
                                 const std::vector<std::string>& supported);

struct AdvertiserOptions {
  net::Endpoint target{kAdvertiseGroup, kAdvertisePort};
  std::chrono::milliseconds interval = std::chrono::seconds(1);
  std::string device_id = "0x0000000000000001";
  std::string location;  // "ip:port" of the command server
  std::vector<std::string> supported;
};

/// Periodic UDP advertiser. Send failures are logged and retried on the next
/// tick.
class Advertiser {
 public:
  Advertiser(std::function<BulbState()> snapshot, AdvertiserOptions options);
  ~Advertiser();
  Advertiser(const Advertiser&) = delete;
  Advertiser& operator=(const Advertiser&) = delete;

  std::size_t sent() const { return sent_.load(); }
  void stop();

 private:
  void run();

  std::function<BulbState()> snapshot_;
  AdvertiserOptions options_;
  std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
  std::atomic<std::size_t> sent_{0};
  std::thread thread_;
};

}  // namespace rliot::sim
