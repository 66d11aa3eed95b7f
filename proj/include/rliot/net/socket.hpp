#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rliot/protocol/codec.hpp"

namespace rliot::net {

using namespace std::chrono_literals;

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Peer closed the stream.
class ConnectionClosed : public NetError {
 public:
  ConnectionClosed() : NetError("connection closed by peer") {}
};

/// Owning file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept;
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset(int fd = -1);

 private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  /// Parses "host:port".
  static Endpoint parse(std::string_view text);
  std::string str() const { return host + ":" + std::to_string(port); }

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Connected TCP stream with CR LF line framing on the read side.
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(Fd fd) : fd_(std::move(fd)) {}

  /// Connects with a deadline; throws NetError on failure or timeout.
  static TcpStream connect(const Endpoint& to, std::chrono::milliseconds timeout);

  void send_all(std::string_view bytes);

  /// Next complete line without its terminator, or nullopt if the timeout
  /// elapsed first. Throws ConnectionClosed on EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  bool is_open() const { return static_cast<bool>(fd_); }
  void close() { fd_.reset(); }

 private:
  Fd fd_;
  protocol::LineBuffer buffer_;
};

class TcpListener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port.
  TcpListener(const std::string& host, std::uint16_t port);

  std::uint16_t port() const { return port_; }
  std::optional<TcpStream> accept(std::chrono::milliseconds timeout);

 private:
  Fd fd_;
  std::uint16_t port_ = 0;
};

struct ReceivedDatagram {
  std::string payload;
  std::string sender;
};

class UdpSocket {
 public:
  /// Receiving socket bound to `port`; joins `group` when it is a multicast
  /// address.
  static UdpSocket receiver(const std::string& group, std::uint16_t port);
  /// Sending socket; multicast traffic loops back to local listeners.
  static UdpSocket sender();

  void send_to(const Endpoint& to, std::string_view payload);
  std::optional<ReceivedDatagram> receive(std::chrono::milliseconds timeout);

 private:
  Fd fd_;
};

bool is_multicast(const std::string& ipv4);

}  // namespace rliot::net
