#include "rliot/protocol/dictionary.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace rliot::protocol {

namespace {

using nlohmann::json;

bool valid_method_name(std::string_view name) {
  if (name.empty()) return false;
  for (const char c : name) {
    if (!((c >= 'a' && c <= 'z') || c == '_')) return false;
  }
  return true;
}

void validate(const MethodSpec& m) {
  if (!valid_method_name(m.name)) throw DictionaryError("invalid method name '" + m.name + "'");
  for (const auto& p : m.params) {
    const std::string where = m.name + "." + p.name;
    if (const auto* r = std::get_if<IntRange>(&p.range); r && r->min > r->max) {
      throw DictionaryError("empty integer range for " + where);
    }
    if (const auto* e = std::get_if<EnumSet>(&p.range); e && e->values.empty()) {
      throw DictionaryError("empty enum for " + where);
    }
    if (const auto* s = std::get_if<FreeString>(&p.range); s && s->max_length == 0) {
      throw DictionaryError("zero max_length for " + where);
    }
  }
  if (m.split_actions && (m.params.empty() || !std::holds_alternative<EnumSet>(m.params.front().range))) {
    throw DictionaryError("split_actions on " + m.name + " needs a leading enum parameter");
  }
}

ParamSpec parse_param(const json& j, const std::string& method) {
  ParamSpec p;
  p.name = j.value("name", std::string{});
  const std::string kind = j.value("kind", std::string{});
  if (kind == "int") {
    p.range = IntRange{j.at("min").get<std::int64_t>(), j.at("max").get<std::int64_t>()};
  } else if (kind == "enum") {
    p.range = EnumSet{j.at("values").get<std::vector<std::string>>()};
  } else if (kind == "string") {
    p.range = FreeString{j.at("max_length").get<std::size_t>()};
  } else {
    throw DictionaryError("unknown parameter kind '" + kind + "' in " + method);
  }
  return p;
}

MethodEffect parse_effect(const json& j) {
  MethodEffect e;
  e.action = j.value("action", std::string{});
  e.requires_power = j.value("requires_power", std::string{});
  e.changes = j.value("changes", std::vector<std::string>{});
  return e;
}

}  // namespace

MessageDictionary::MessageDictionary(std::vector<MethodSpec> methods) : methods_(std::move(methods)) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < methods_.size(); ++i) {
    const auto& m = methods_[i];
    validate(m);
    if (!seen.insert(m.name).second) throw DictionaryError("duplicate method '" + m.name + "'");
    if (m.split_actions) {
      for (const auto& v : std::get<EnumSet>(m.params.front().range).values) {
        actions_.push_back({m.name + "_" + v, i, v});
      }
    } else {
      actions_.push_back({m.name, i, std::nullopt});
    }
  }
  std::set<std::string> labels;
  for (const auto& a : actions_) {
    if (!labels.insert(a.label).second) throw DictionaryError("duplicate action label '" + a.label + "'");
  }
}

MessageDictionary MessageDictionary::parse(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return MessageDictionary{};
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw DictionaryError(std::string("dictionary is not valid JSON: ") + e.what());
  }
  std::vector<MethodSpec> methods;
  try {
    for (const auto& jm : doc.at("methods")) {
      MethodSpec m;
      m.name = jm.at("name").get<std::string>();
      for (const auto& jp : jm.value("params", json::array())) m.params.push_back(parse_param(jp, m.name));
      m.expected_supported = jm.value("expected_supported", false);
      m.split_actions = jm.value("split_actions", false);
      for (const auto& je : jm.value("effects", json::array())) m.effects.push_back(parse_effect(je));
      methods.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw DictionaryError(std::string("malformed dictionary entry: ") + e.what());
  }
  return MessageDictionary(std::move(methods));
}

MessageDictionary MessageDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DictionaryError("cannot open dictionary " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> MessageDictionary::action_labels() const {
  std::vector<std::string> out;
  out.reserve(actions_.size());
  for (const auto& a : actions_) out.push_back(a.label);
  return out;
}

const MethodSpec* MessageDictionary::find_method(std::string_view name) const {
  for (const auto& m : methods_) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::optional<std::size_t> MessageDictionary::find_action(std::string_view label) const {
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (actions_[i].label == label) return i;
  }
  return std::nullopt;
}

std::pair<std::string, std::vector<ParamValue>> MessageDictionary::instantiate(std::size_t action,
                                                                               Rng& rng) const {
  const Action& a = actions_.at(action);
  const MethodSpec& m = methods_[a.method];
  auto params = sample_params(m, rng);
  if (a.fixed_first_param) params.front() = *a.fixed_first_param;
  return {m.name, std::move(params)};
}

std::vector<ParamValue> sample_params(const MethodSpec& spec, Rng& rng) {
  std::vector<ParamValue> out;
  out.reserve(spec.params.size());
  for (const auto& p : spec.params) {
    if (const auto* r = std::get_if<IntRange>(&p.range)) {
      out.emplace_back(rng.uniform_int(r->min, r->max));
    } else if (const auto* e = std::get_if<EnumSet>(&p.range)) {
      out.emplace_back(e->values[rng.index(e->values.size())]);
    } else {
      const auto& s = std::get<FreeString>(p.range);
      const auto len = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(s.max_length)));
      std::string str(len, ' ');
      for (auto& c : str) c = kStringAlphabet[rng.index(kStringAlphabet.size())];
      out.emplace_back(std::move(str));
    }
  }
  return out;
}

}  // namespace rliot::protocol
