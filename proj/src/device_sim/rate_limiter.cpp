#include "rliot/device_sim/rate_limiter.hpp"

namespace rliot::sim {

bool RateLimiter::admit(SteadyClock::time_point now) {
  while (!admitted_.empty() && now - admitted_.front() >= window_) admitted_.pop_front();
  if (admitted_.size() >= quota_) return false;
  admitted_.push_back(now);
  return true;
}

}  // namespace rliot::sim
