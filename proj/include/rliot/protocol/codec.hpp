#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rliot/protocol/message.hpp"

namespace rliot::protocol {

enum class CodecErrorKind {
  encoding,            // string content is not valid UTF-8
  framing,             // not a parseable JSON line
  protocol_violation,  // valid JSON with the wrong shape
};

class CodecError : public std::runtime_error {
 public:
  CodecError(CodecErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  CodecErrorKind kind() const { return kind_; }

 private:
  CodecErrorKind kind_;
};

inline constexpr std::string_view kLineTerminator = "\r\n";

// Encoders produce one line with fields in a fixed order and the
// `", "`/`": "` separators the bulbs use, terminated by CR LF. Decoders
// accept any field order and an optional trailing CR LF or LF.

std::string encode_command(const CommandMessage& cmd);
CommandMessage decode_command(std::string_view line);

std::string encode_response(const ResultMessage& msg);
ResultMessage decode_response(std::string_view line);

/// Quoted JSON string literal; throws CodecError(encoding) on invalid UTF-8.
std::string quote_json_string(std::string_view s);

bool is_valid_utf8(std::string_view s);

/// Splits a TCP byte stream into lines. Lines are returned without their
/// terminator; a lone LF is accepted as a terminator too.
class LineBuffer {
 public:
  void append(std::string_view bytes) { buffer_.append(bytes); }
  std::optional<std::string> next_line();
  std::size_t pending() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

}  // namespace rliot::protocol
