#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rliot/protocol/message.hpp"

namespace rliot::sim {

enum class Power { off, on };

std::string_view to_string(Power p);
Power parse_power(std::string_view s);

inline constexpr std::int64_t kMaxRgb = 16777215;
inline constexpr int kMinBright = 1;
inline constexpr int kMaxBright = 100;
inline constexpr int kMinCt = 1700;
inline constexpr int kMaxCt = 6500;
inline constexpr std::size_t kMaxNameBytes = 64;

/// Concrete device state. Every field stays in its declared range.
struct BulbState {
  Power power = Power::on;
  std::int64_t rgb = 16711680;
  int bright = 50;
  std::string name = "bulb";
  int ct = 4000;
  // Untracked bookkeeping reported through get_prop.
  bool flowing = false;
  int delayoff = 0;

  bool in_range() const;

  friend bool operator==(const BulbState&, const BulbState&) = default;
};

/// Property names reported by get_prop and used by the feedback channel.
inline const std::vector<std::string> kStateProps = {"power", "bright", "rgb", "name", "ct"};

/// Value of one property as the bulb reports it; "" for unknown names.
std::string property(const BulbState& s, std::string_view prop);

/// Rebuilds a state from get_prop values for kStateProps (same order).
/// Throws std::invalid_argument on malformed or out-of-range values.
BulbState state_from_props(const std::vector<std::string>& values);

BulbState state_from_json(const nlohmann::json& j);
nlohmann::json state_to_json(const BulbState& s);

/// Which methods the simulated bulb implements, and its power-up state.
struct SimProfile {
  std::set<std::string> supported;
  BulbState initial;

  static SimProfile parse(std::string_view json_text);
  static SimProfile load(const std::filesystem::path& path);
  /// The 18-method profile shipped in data/bulb_profile.json.
  static SimProfile standard();
};

struct Transition {
  BulbState state;
  protocol::ResultMessage response;
};

/// Pure transition: same (state, cmd, profile) always gives the same result.
/// Unsupported methods and invalid parameters leave the state untouched and
/// produce an error response.
Transition apply_command(const BulbState& state, const protocol::CommandMessage& cmd, const SimProfile& profile);

}  // namespace rliot::sim
