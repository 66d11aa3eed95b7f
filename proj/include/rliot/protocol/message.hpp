#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace rliot::protocol {

/// A single command parameter: the wire protocol only carries integers and
/// strings.
using ParamValue = std::variant<std::int64_t, std::string>;

struct CommandMessage {
  std::int64_t id = 0;
  std::string method;
  std::vector<ParamValue> params;

  friend bool operator==(const CommandMessage&, const CommandMessage&) = default;
};

struct ErrorInfo {
  std::int64_t code = 0;
  std::string message;

  friend bool operator==(const ErrorInfo&, const ErrorInfo&) = default;
};

/// Reply to a command: either a list of result strings or an error.
struct ResultMessage {
  std::int64_t id = 0;
  std::variant<std::vector<std::string>, ErrorInfo> outcome;

  static ResultMessage success(std::int64_t id, std::vector<std::string> values) {
    return {id, std::move(values)};
  }
  static ResultMessage failure(std::int64_t id, std::int64_t code, std::string message) {
    return {id, ErrorInfo{code, std::move(message)}};
  }

  bool ok() const { return std::holds_alternative<std::vector<std::string>>(outcome); }
  const std::vector<std::string>& values() const { return std::get<std::vector<std::string>>(outcome); }
  const ErrorInfo& error() const { return std::get<ErrorInfo>(outcome); }

  friend bool operator==(const ResultMessage&, const ResultMessage&) = default;
};

/// Error codes used in error responses.
namespace error_code {
inline constexpr std::int64_t kUnsupportedMethod = -1;
inline constexpr std::int64_t kInvalidCommand = -2;
inline constexpr std::int64_t kGeneralError = -5000;
inline constexpr std::int64_t kQuotaExceeded = -5001;
}  // namespace error_code

}  // namespace rliot::protocol
