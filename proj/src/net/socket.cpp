#include "rliot/net/socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace rliot::net {

namespace {

[[noreturn]] void fail(const std::string& what) { throw NetError(what + ": " + std::strerror(errno)); }

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (host == "localhost") {
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw NetError("not an IPv4 address: " + host);
  }
  return addr;
}

// Returns false on timeout.
bool wait_for(int fd, short events, std::chrono::milliseconds timeout) {
  pollfd pfd{fd, events, 0};
  for (;;) {
    const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) fail("poll");
  }
}

}  // namespace

Fd& Fd::operator=(Fd&& other) noexcept {
  if (this != &other) reset(other.release());
  return *this;
}

void Fd::reset(int fd) {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) throw NetError("expected host:port, got '" + std::string(text) + "'");
  unsigned port = 0;
  const auto digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || port > 65535) {
    throw NetError("bad port in '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

TcpStream TcpStream::connect(const Endpoint& to, std::chrono::milliseconds timeout) {
  Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd) fail("socket");
  const sockaddr_in addr = make_addr(to.host, to.port);
  const int flags = ::fcntl(fd.get(), F_GETFL);
  ::fcntl(fd.get(), F_SETFL, flags | O_NONBLOCK);
  if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    if (errno != EINPROGRESS) fail("connect " + to.str());
    if (!wait_for(fd.get(), POLLOUT, timeout)) throw NetError("connect " + to.str() + ": timed out");
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      errno = err;
      fail("connect " + to.str());
    }
  }
  ::fcntl(fd.get(), F_SETFL, flags);
  const int one = 1;
  ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return TcpStream(std::move(fd));
}

void TcpStream::send_all(std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd_.get(), bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::optional<std::string> TcpStream::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto line = buffer_.next_line()) return line;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0 || !wait_for(fd_.get(), POLLIN, left)) return std::nullopt;
    char buf[4096];
    const ssize_t n = ::recv(fd_.get(), buf, sizeof buf, 0);
    if (n == 0) throw ConnectionClosed();
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == ECONNRESET) throw ConnectionClosed();
      fail("recv");
    }
    buffer_.append(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_.reset(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd_) fail("socket");
  const int one = 1;
  ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const sockaddr_in addr = make_addr(host, port);
  if (::bind(fd_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    fail("bind " + host + ":" + std::to_string(port));
  }
  if (::listen(fd_.get(), 8) != 0) fail("listen");
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

std::optional<TcpStream> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (!wait_for(fd_.get(), POLLIN, timeout)) return std::nullopt;
  Fd client(::accept4(fd_.get(), nullptr, nullptr, SOCK_CLOEXEC));
  if (!client) {
    if (errno == EINTR || errno == EAGAIN || errno == ECONNABORTED) return std::nullopt;
    fail("accept");
  }
  const int one = 1;
  ::setsockopt(client.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return TcpStream(std::move(client));
}

bool is_multicast(const std::string& ipv4) {
  in_addr a{};
  if (inet_pton(AF_INET, ipv4.c_str(), &a) != 1) return false;
  return IN_MULTICAST(ntohl(a.s_addr));
}

UdpSocket UdpSocket::receiver(const std::string& group, std::uint16_t port) {
  UdpSocket s;
  s.fd_.reset(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (!s.fd_) fail("socket");
  const int one = 1;
  ::setsockopt(s.fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  ::setsockopt(s.fd_.get(), SOL_SOCKET, SO_REUSEPORT, &one, sizeof one);
  const bool multicast = is_multicast(group);
  const sockaddr_in addr = make_addr(multicast ? std::string{} : group, port);
  if (::bind(s.fd_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    fail("bind udp port " + std::to_string(port));
  }
  if (multicast) {
    ip_mreq mreq{};
    inet_pton(AF_INET, group.c_str(), &mreq.imr_multiaddr);
    mreq.imr_interface.s_addr = htonl(INADDR_ANY);
    if (::setsockopt(s.fd_.get(), IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof mreq) != 0) {
      // Hosts without a multicast route: loopback membership still works.
      mreq.imr_interface.s_addr = htonl(INADDR_LOOPBACK);
      if (::setsockopt(s.fd_.get(), IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof mreq) != 0) {
        fail("join multicast group " + group);
      }
    }
  }
  return s;
}

UdpSocket UdpSocket::sender() {
  UdpSocket s;
  s.fd_.reset(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (!s.fd_) fail("socket");
  const unsigned char loop = 1;
  ::setsockopt(s.fd_.get(), IPPROTO_IP, IP_MULTICAST_LOOP, &loop, sizeof loop);
  return s;
}

void UdpSocket::send_to(const Endpoint& to, std::string_view payload) {
  const sockaddr_in addr = make_addr(to.host, to.port);
  if (::sendto(fd_.get(), payload.data(), payload.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
    fail("sendto " + to.str());
  }
}

std::optional<ReceivedDatagram> UdpSocket::receive(std::chrono::milliseconds timeout) {
  if (!wait_for(fd_.get(), POLLIN, timeout)) return std::nullopt;
  char buf[2048];
  sockaddr_in from{};
  socklen_t len = sizeof from;
  const ssize_t n = ::recvfrom(fd_.get(), buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&from), &len);
  if (n < 0) {
    if (errno == EINTR || errno == EAGAIN) return std::nullopt;
    fail("recvfrom");
  }
  char ip[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &from.sin_addr, ip, sizeof ip);
  return ReceivedDatagram{std::string(buf, static_cast<std::size_t>(n)), std::string(ip) + ":" + std::to_string(ntohs(from.sin_port))};
}

}  // namespace rliot::net
