#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>

namespace rliot::sim {

using SteadyClock = std::chrono::steady_clock;
using ClockFn = std::function<SteadyClock::time_point()>;

/// Sliding-window admission: at most `quota` admitted commands in any
/// `window`. The clock is injected so tests can drive it synthetically.
class RateLimiter {
 public:
  RateLimiter(std::size_t quota, std::chrono::milliseconds window) : quota_(quota), window_(window) {}

  bool admit(SteadyClock::time_point now);
  std::size_t in_window() const { return admitted_.size(); }
  std::size_t quota() const { return quota_; }

 private:
  std::size_t quota_;
  std::chrono::milliseconds window_;
  std::deque<SteadyClock::time_point> admitted_;
};

}  // namespace rliot::sim
