#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rliot/protocol/message.hpp"
#include "rliot/rng.hpp"

namespace rliot::protocol {

struct IntRange {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

struct EnumSet {
  std::vector<std::string> values;
};

struct FreeString {
  std::size_t max_length = 1;
};

struct ParamSpec {
  std::string name;
  std::variant<IntRange, EnumSet, FreeString> range;
};

/// Documented abstract effect of a method: which tracked attributes it can
/// change, optionally restricted to one split action and a power state.
/// Consumed by the optimal-path oracle only; the learner never reads it.
struct MethodEffect {
  std::string action;          // empty = any action of the method
  std::string requires_power;  // "", "on" or "off"
  std::vector<std::string> changes;
};

struct MethodSpec {
  std::string name;
  std::vector<ParamSpec> params;
  bool expected_supported = false;
  /// When set, each value of the first (enum) parameter becomes its own
  /// action labelled `<name>_<value>`.
  bool split_actions = false;
  std::vector<MethodEffect> effects;
};

/// One entry of the agent's action space.
struct Action {
  std::string label;
  std::size_t method = 0;  // index into MessageDictionary::methods()
  std::optional<std::string> fixed_first_param;
};

class DictionaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MessageDictionary {
 public:
  MessageDictionary() = default;
  explicit MessageDictionary(std::vector<MethodSpec> methods);

  /// Parses the JSON dictionary document. Empty input yields an empty
  /// dictionary.
  static MessageDictionary parse(std::string_view text);
  static MessageDictionary load(const std::filesystem::path& path);

  const std::vector<MethodSpec>& methods() const { return methods_; }
  const std::vector<Action>& actions() const { return actions_; }
  std::vector<std::string> action_labels() const;

  const MethodSpec* find_method(std::string_view name) const;
  std::optional<std::size_t> find_action(std::string_view label) const;

  /// Method name and freshly sampled parameters for an action.
  std::pair<std::string, std::vector<ParamValue>> instantiate(std::size_t action, Rng& rng) const;

 private:
  std::vector<MethodSpec> methods_;
  std::vector<Action> actions_;
};

/// Draws every parameter uniformly from its declared range.
std::vector<ParamValue> sample_params(const MethodSpec& spec, Rng& rng);

/// Characters used for sampled free strings.
inline constexpr std::string_view kStringAlphabet =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

}  // namespace rliot::protocol
