#include "rliot/protocol/codec.hpp"

#include <charconv>
#include <nlohmann/json.hpp>

namespace rliot::protocol {

namespace {

using nlohmann::json;

std::string_view strip_terminator(std::string_view line) {
  if (line.ends_with("\r\n")) {
    line.remove_suffix(2);
  } else if (line.ends_with('\n')) {
    line.remove_suffix(1);
  }
  if (line.find_first_of("\r\n") != std::string_view::npos) {
    throw CodecError(CodecErrorKind::framing, "interior line break in frame");
  }
  return line;
}

json parse_line(std::string_view line) {
  const auto body = strip_terminator(line);
  try {
    return json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    throw CodecError(CodecErrorKind::framing, std::string("malformed JSON: ") + e.what());
  }
}

std::int64_t require_id(const json& doc) {
  const auto it = doc.find("id");
  if (it == doc.end() || !it->is_number_integer()) {
    throw CodecError(CodecErrorKind::protocol_violation, "missing or non-integer id");
  }
  if (it->is_number_unsigned() && it->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw CodecError(CodecErrorKind::protocol_violation, "id out of range");
  }
  return it->get<std::int64_t>();
}

void append_int(std::string& out, std::int64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void append_param(std::string& out, const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    append_int(out, *i);
  } else {
    out += quote_json_string(std::get<std::string>(v));
  }
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

std::string quote_json_string(std::string_view s) {
  if (!is_valid_utf8(s)) throw CodecError(CodecErrorKind::encoding, "string is not valid UTF-8");
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (const char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          static constexpr char kHex[] = "0123456789abcdef";
          out += "\\u00";
          out += kHex[(ch >> 4) & 0xF];
          out += kHex[ch & 0xF];
        } else {
          out += ch;
        }
    }
  }
  out += '"';
  return out;
}

std::string encode_command(const CommandMessage& cmd) {
  std::string out = "{\"id\": ";
  append_int(out, cmd.id);
  out += ", \"method\": ";
  out += quote_json_string(cmd.method);
  out += ", \"params\": [";
  for (std::size_t i = 0; i < cmd.params.size(); ++i) {
    if (i) out += ", ";
    append_param(out, cmd.params[i]);
  }
  out += "]}";
  out += kLineTerminator;
  return out;
}

CommandMessage decode_command(std::string_view line) {
  const json doc = parse_line(line);
  if (!doc.is_object()) throw CodecError(CodecErrorKind::protocol_violation, "command is not an object");
  CommandMessage cmd;
  cmd.id = require_id(doc);
  const auto method = doc.find("method");
  if (method == doc.end() || !method->is_string()) {
    throw CodecError(CodecErrorKind::protocol_violation, "missing method");
  }
  cmd.method = method->get<std::string>();
  const auto params = doc.find("params");
  if (params == doc.end()) return cmd;
  if (!params->is_array()) throw CodecError(CodecErrorKind::protocol_violation, "params is not an array");
  for (const auto& p : *params) {
    if (p.is_number_integer() && !(p.is_number_unsigned() && p.get<std::uint64_t>() > INT64_MAX)) {
      cmd.params.emplace_back(p.get<std::int64_t>());
    } else if (p.is_string()) {
      cmd.params.emplace_back(p.get<std::string>());
    } else {
      throw CodecError(CodecErrorKind::protocol_violation, "param must be an integer or a string");
    }
  }
  return cmd;
}

std::string encode_response(const ResultMessage& msg) {
  std::string out = "{\"id\": ";
  append_int(out, msg.id);
  if (msg.ok()) {
    out += ", \"result\": [";
    const auto& values = msg.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ", ";
      out += quote_json_string(values[i]);
    }
    out += "]}";
  } else {
    out += ", \"error\": {\"code\": ";
    append_int(out, msg.error().code);
    out += ", \"message\": ";
    out += quote_json_string(msg.error().message);
    out += "}}";
  }
  out += kLineTerminator;
  return out;
}

ResultMessage decode_response(std::string_view line) {
  const json doc = parse_line(line);
  if (!doc.is_object()) throw CodecError(CodecErrorKind::protocol_violation, "response is not an object");
  const std::int64_t id = require_id(doc);
  const auto result = doc.find("result");
  const auto error = doc.find("error");
  if ((result == doc.end()) == (error == doc.end())) {
    throw CodecError(CodecErrorKind::protocol_violation, "response needs exactly one of result/error");
  }
  if (result != doc.end()) {
    if (!result->is_array()) throw CodecError(CodecErrorKind::protocol_violation, "result is not an array");
    std::vector<std::string> values;
    for (const auto& v : *result) {
      values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    return ResultMessage::success(id, std::move(values));
  }
  if (!error->is_object()) throw CodecError(CodecErrorKind::protocol_violation, "error is not an object");
  const auto code = error->find("code");
  if (code == error->end() || !code->is_number_integer()) {
    throw CodecError(CodecErrorKind::protocol_violation, "error without integer code");
  }
  std::string message;
  if (const auto m = error->find("message"); m != error->end() && m->is_string()) message = m->get<std::string>();
  return ResultMessage::failure(id, code->get<std::int64_t>(), std::move(message));
}

std::optional<std::string> LineBuffer::next_line() {
  const auto pos = buffer_.find('\n');
  if (pos == std::string::npos) return std::nullopt;
  std::size_t end = pos;
  if (end > 0 && buffer_[end - 1] == '\r') --end;
  std::string line = buffer_.substr(0, end);
  buffer_.erase(0, pos + 1);
  return line;
}

}  // namespace rliot::protocol
