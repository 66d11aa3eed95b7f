#include "rliot/device_sim/bulb.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace rliot::sim {

namespace {

using protocol::CommandMessage;
using protocol::ParamValue;
using protocol::ResultMessage;
namespace ec = protocol::error_code;

struct InvalidParams {
  std::string message;
};

std::optional<std::int64_t> as_int(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::nullopt;
}

const std::string* as_str(const ParamValue& v) { return std::get_if<std::string>(&v); }

// Parameter readers; each throws InvalidParams on mismatch.
class Params {
 public:
  explicit Params(const std::vector<ParamValue>& p) : p_(p) {}

  void arity(std::size_t lo, std::size_t hi) const {
    if (p_.size() < lo || p_.size() > hi) throw InvalidParams{"wrong number of params"};
  }
  std::size_t size() const { return p_.size(); }

  std::int64_t integer(std::size_t i, std::int64_t lo, std::int64_t hi) const {
    const auto v = as_int(p_.at(i));
    if (!v || *v < lo || *v > hi) throw InvalidParams{"param " + std::to_string(i) + " out of range"};
    return *v;
  }
  const std::string& text(std::size_t i) const {
    const auto* s = as_str(p_.at(i));
    if (!s) throw InvalidParams{"param " + std::to_string(i) + " must be a string"};
    return *s;
  }
  const std::string& one_of(std::size_t i, std::initializer_list<std::string_view> allowed) const {
    const auto& s = text(i);
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      throw InvalidParams{"param " + std::to_string(i) + " has an invalid value"};
    }
    return s;
  }
  // Optional trailing (effect, duration) pair starting at index i.
  void transition(std::size_t i) const {
    if (p_.size() > i) one_of(i, {"sudden", "smooth"});
    if (p_.size() > i + 1) integer(i + 1, 0, INT32_MAX);
  }

 private:
  const std::vector<ParamValue>& p_;
};

std::int64_t hsv_to_rgb(std::int64_t hue, std::int64_t sat) {
  const double s = static_cast<double>(sat) / 100.0;
  const double h = static_cast<double>(hue) / 60.0;
  const double c = s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = 1.0 - c;
  const auto to8 = [m](double v) { return static_cast<std::int64_t>(std::lround((v + m) * 255.0)); };
  return (to8(r) << 16) | (to8(g) << 8) | to8(b);
}

bool valid_flow_expression(const std::string& expr) {
  std::vector<std::int64_t> values;
  std::string_view rest(expr);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto tok = rest.substr(0, comma);
    std::int64_t v = 0;
    auto [ptr, err] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (err != std::errc{} || ptr != tok.data() + tok.size()) return false;
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (values.empty() || values.size() % 4 != 0) return false;
  for (std::size_t i = 0; i < values.size(); i += 4) {
    const auto duration = values[i], mode = values[i + 1], bright = values[i + 3];
    if (duration < 50 || (mode != 1 && mode != 2 && mode != 7) || bright < -1 || bright > 100) return false;
  }
  return true;
}

int step_with_wrap(int value, int delta, int lo, int hi, std::string_view action) {
  if (action == "increase") return std::min(hi, value + delta);
  if (action == "decrease") return std::max(lo, value - delta);
  return value + delta > hi ? lo : value + delta;  // circle
}

void require_on(const BulbState& s) {
  if (s.power != Power::on) throw InvalidParams{"device is off"};
}

// Applies a supported method; throws InvalidParams to reject.
std::vector<std::string> apply_supported(BulbState& s, const CommandMessage& cmd) {
  const Params p(cmd.params);
  const std::string& m = cmd.method;
  const std::vector<std::string> ok{"ok"};

  if (m == "get_prop") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back(property(s, p.text(i)));
    return out;
  }
  if (m == "set_ct_abx") {
    p.arity(1, 3);
    const auto ct = p.integer(0, kMinCt, kMaxCt);
    p.transition(1);
    require_on(s);
    s.ct = static_cast<int>(ct);
    return ok;
  }
  if (m == "set_rgb") {
    p.arity(1, 3);
    const auto rgb = p.integer(0, 0, kMaxRgb);
    p.transition(1);
    require_on(s);
    // Zero colour acts as an off switch; the stored colour is kept.
    if (rgb == 0) {
      s.power = Power::off;
    } else {
      s.rgb = rgb;
    }
    return ok;
  }
  if (m == "set_hsv") {
    p.arity(2, 4);
    const auto hue = p.integer(0, 0, 359);
    const auto sat = p.integer(1, 0, 100);
    p.transition(2);
    require_on(s);
    s.rgb = hsv_to_rgb(hue, sat);
    return ok;
  }
  if (m == "set_bright") {
    p.arity(1, 3);
    const auto bright = p.integer(0, 0, kMaxBright);
    p.transition(1);
    require_on(s);
    s.bright = std::max(kMinBright, static_cast<int>(bright));
    return ok;
  }
  if (m == "set_power") {
    p.arity(1, 4);
    const auto& power = p.one_of(0, {"on", "off"});
    p.transition(1);
    if (p.size() > 3) p.integer(3, 0, 5);
    s.power = parse_power(power);
    return ok;
  }
  if (m == "toggle") {
    p.arity(0, 0);
    s.power = s.power == Power::on ? Power::off : Power::on;
    return ok;
  }
  if (m == "set_default") {
    p.arity(0, 0);
    return ok;
  }
  if (m == "start_cf") {
    p.arity(3, 3);
    p.integer(0, 0, INT32_MAX);
    p.integer(1, 0, 2);
    if (!valid_flow_expression(p.text(2))) throw InvalidParams{"invalid flow expression"};
    require_on(s);
    s.flowing = true;
    return ok;
  }
  if (m == "stop_cf") {
    p.arity(0, 0);
    s.flowing = false;
    return ok;
  }
  if (m == "set_scene") {
    p.arity(2, 2);
    p.one_of(0, {"color"});
    const auto rgb = p.integer(1, 0, kMaxRgb);
    require_on(s);
    s.rgb = rgb;
    return ok;
  }
  if (m == "cron_add") {
    p.arity(2, 2);
    p.integer(0, 0, 0);
    s.delayoff = static_cast<int>(p.integer(1, 1, 1440));
    return ok;
  }
  if (m == "cron_get") {
    p.arity(1, 1);
    p.integer(0, 0, 0);
    return {std::to_string(s.delayoff)};
  }
  if (m == "cron_del") {
    p.arity(1, 1);
    p.integer(0, 0, 0);
    s.delayoff = 0;
    return ok;
  }
  if (m == "set_adjust") {
    p.arity(2, 2);
    const auto& action = p.one_of(0, {"increase", "decrease", "circle"});
    const auto& prop = p.one_of(1, {"bright", "ct", "color"});
    require_on(s);
    if (prop == "bright") {
      s.bright = step_with_wrap(s.bright, 10, kMinBright, kMaxBright, action);
    } else if (prop == "ct") {
      s.ct = step_with_wrap(s.ct, 500, kMinCt, kMaxCt, action);
    } else {
      if (action != "circle") throw InvalidParams{"color only supports circle"};
      s.rgb = ((s.rgb & 0xFF) << 16) | (s.rgb >> 8);
    }
    return ok;
  }
  if (m == "set_name") {
    p.arity(1, 1);
    const auto& name = p.text(0);
    if (name.size() > kMaxNameBytes) throw InvalidParams{"name too long"};
    s.name = name;
    return ok;
  }
  if (m == "adjust_bright") {
    p.arity(1, 2);
    const auto pct = p.integer(0, -100, 100);
    if (p.size() > 1) p.integer(1, 0, INT32_MAX);
    require_on(s);
    const auto target = s.bright + pct;
    // Dimming to zero or below switches the light off.
    if (target <= 0) {
      s.power = Power::off;
    } else {
      s.bright = static_cast<int>(std::min<std::int64_t>(kMaxBright, target));
    }
    return ok;
  }
  if (m == "adjust_ct") {
    p.arity(1, 2);
    const auto pct = p.integer(0, -100, 100);
    if (p.size() > 1) p.integer(1, 0, INT32_MAX);
    require_on(s);
    const auto target = s.ct + pct * (kMaxCt - kMinCt) / 100;
    s.ct = static_cast<int>(std::clamp<std::int64_t>(target, kMinCt, kMaxCt));
    return ok;
  }
  if (m == "adjust_color") {
    p.arity(1, 2);
    const auto pct = p.integer(0, -100, 100);
    if (p.size() > 1) p.integer(1, 0, INT32_MAX);
    require_on(s);
    constexpr std::int64_t kSpan = kMaxRgb + 1;
    s.rgb = ((s.rgb + pct * (kSpan / 100)) % kSpan + kSpan) % kSpan;
    return ok;
  }
  throw InvalidParams{"method has no simulator semantics"};
}

}  // namespace

std::string_view to_string(Power p) { return p == Power::on ? "on" : "off"; }

Power parse_power(std::string_view s) {
  if (s == "on") return Power::on;
  if (s == "off") return Power::off;
  throw std::invalid_argument("power must be on/off, got '" + std::string(s) + "'");
}

bool BulbState::in_range() const {
  return rgb >= 0 && rgb <= kMaxRgb && bright >= kMinBright && bright <= kMaxBright && ct >= kMinCt &&
         ct <= kMaxCt && name.size() <= kMaxNameBytes && delayoff >= 0;
}

std::string property(const BulbState& s, std::string_view prop) {
  if (prop == "power") return std::string(to_string(s.power));
  if (prop == "bright") return std::to_string(s.bright);
  if (prop == "rgb") return std::to_string(s.rgb);
  if (prop == "name") return s.name;
  if (prop == "ct") return std::to_string(s.ct);
  if (prop == "flowing") return s.flowing ? "1" : "0";
  if (prop == "delayoff") return std::to_string(s.delayoff);
  if (prop == "color_mode") return "1";
  return "";
}

BulbState state_from_props(const std::vector<std::string>& values) {
  if (values.size() != kStateProps.size()) throw std::invalid_argument("get_prop returned the wrong number of values");
  const auto number = [](const std::string& v) {
    std::int64_t out = 0;
    auto [ptr, err] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (err != std::errc{} || ptr != v.data() + v.size()) throw std::invalid_argument("non-numeric property '" + v + "'");
    return out;
  };
  BulbState s;
  s.power = parse_power(values[0]);
  s.bright = static_cast<int>(number(values[1]));
  s.rgb = number(values[2]);
  s.name = values[3];
  s.ct = static_cast<int>(number(values[4]));
  if (!s.in_range()) throw std::invalid_argument("reported state out of range");
  return s;
}

BulbState state_from_json(const nlohmann::json& j) {
  BulbState s;
  s.power = parse_power(j.value("power", std::string("on")));
  s.rgb = j.value("rgb", s.rgb);
  s.bright = j.value("bright", s.bright);
  s.name = j.value("name", s.name);
  s.ct = j.value("ct", s.ct);
  if (!s.in_range()) throw std::invalid_argument("state out of range: " + j.dump());
  return s;
}

nlohmann::json state_to_json(const BulbState& s) {
  return {{"power", std::string(to_string(s.power))}, {"rgb", s.rgb}, {"bright", s.bright}, {"name", s.name}, {"ct", s.ct}};
}

SimProfile SimProfile::parse(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text.begin(), json_text.end());
  SimProfile p;
  for (const auto& m : doc.at("supported")) p.supported.insert(m.get<std::string>());
  if (doc.contains("initial")) p.initial = state_from_json(doc.at("initial"));
  return p;
}

SimProfile SimProfile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

SimProfile SimProfile::standard() {
  SimProfile p;
  p.supported = {"get_prop",  "set_ct_abx", "set_rgb",  "set_hsv",    "set_bright",    "set_power",
                 "toggle",    "start_cf",   "stop_cf",  "set_scene",  "cron_add",      "cron_get",
                 "cron_del",  "set_adjust", "set_name", "adjust_bright", "adjust_ct", "adjust_color"};
  return p;
}

Transition apply_command(const BulbState& state, const CommandMessage& cmd, const SimProfile& profile) {
  if (!profile.supported.contains(cmd.method)) {
    return {state, ResultMessage::failure(cmd.id, ec::kUnsupportedMethod, "method not supported")};
  }
  BulbState next = state;
  try {
    auto values = apply_supported(next, cmd);
    return {std::move(next), ResultMessage::success(cmd.id, std::move(values))};
  } catch (const InvalidParams& e) {
    return {state, ResultMessage::failure(cmd.id, ec::kGeneralError, e.message)};
  }
}

}  // namespace rliot::sim
