#include "rliot/device_sim/server.hpp"

#include <iostream>

#include "rliot/protocol/codec.hpp"

namespace rliot::sim {

namespace ec = protocol::error_code;
using namespace std::chrono_literals;

BulbServer::BulbServer(SimProfile profile, ServerOptions options)
    : profile_(std::move(profile)),
      options_(std::move(options)),
      listener_(options_.bind_address, options_.port),
      state_(profile_.initial),
      limiter_(options_.quota, options_.window) {
  if (!options_.clock) options_.clock = [] { return SteadyClock::now(); };
  thread_ = std::thread([this] { serve(); });
}

BulbServer::~BulbServer() { stop(); }

void BulbServer::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
}

BulbState BulbServer::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

void BulbServer::reset_device(const BulbState& state) {
  std::lock_guard lock(mutex_);
  state_ = state;
}

std::string BulbServer::handle_line(std::string_view line) {
  protocol::CommandMessage cmd;
  try {
    cmd = protocol::decode_command(line);
  } catch (const protocol::CodecError& e) {
    return protocol::encode_response(protocol::ResultMessage::failure(0, ec::kInvalidCommand, "invalid command"));
  }
  std::lock_guard lock(mutex_);
  ++handled_;
  if (options_.rate_limit && !limiter_.admit(options_.clock())) {
    return protocol::encode_response(protocol::ResultMessage::failure(cmd.id, ec::kQuotaExceeded, "client quota exceeded"));
  }
  auto [next, response] = apply_command(state_, cmd, profile_);
  state_ = std::move(next);
  return protocol::encode_response(response);
}

void BulbServer::serve() {
  while (!stopping_) {
    std::optional<net::TcpStream> conn;
    try {
      conn = listener_.accept(50ms);
    } catch (const net::NetError& e) {
      std::cerr << "bulbsim: accept failed: " << e.what() << '\n';
      continue;
    }
    if (!conn) continue;
    try {
      while (!stopping_) {
        const auto line = conn->read_line(50ms);
        if (!line) continue;
        conn->send_all(handle_line(*line));
      }
    } catch (const net::NetError&) {
      // client went away; wait for the next one
    }
  }
}

std::string format_advertisement(const std::string& device_id, const std::string& location, const BulbState& state,
                                 const std::vector<std::string>& supported) {
  std::string support;
  for (const auto& m : supported) {
    if (!support.empty()) support += ' ';
    support += m;
  }
  std::string out;
  out += "NOTIFY * HTTP/1.1\r\n";
  out += std::string("Host: ") + kAdvertiseGroup + ":" + std::to_string(kAdvertisePort) + "\r\n";
  out += "Cache-Control: max-age=3600\r\n";
  out += "Location: yeelight://" + location + "\r\n";
  out += "NTS: ssdp:alive\r\n";
  out += "Server: POSIX, UPnP/1.0 YGLC/1\r\n";
  out += "id: " + device_id + "\r\n";
  out += "model: color\r\n";
  out += "support: " + support + "\r\n";
  out += "power: " + std::string(to_string(state.power)) + "\r\n";
  out += "bright: " + std::to_string(state.bright) + "\r\n";
  out += "ct: " + std::to_string(state.ct) + "\r\n";
  out += "rgb: " + std::to_string(state.rgb) + "\r\n";
  out += "name: " + state.name + "\r\n";
  return out;
}

Advertiser::Advertiser(std::function<BulbState()> snapshot, AdvertiserOptions options)
    : snapshot_(std::move(snapshot)), options_(std::move(options)) {
  thread_ = std::thread([this] { run(); });
}

Advertiser::~Advertiser() { stop(); }

void Advertiser::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void Advertiser::run() {
  std::optional<net::UdpSocket> socket;
  std::unique_lock lock(mutex_);
  while (!stopping_) {
    try {
      if (!socket) socket = net::UdpSocket::sender();
      socket->send_to(options_.target,
                      format_advertisement(options_.device_id, options_.location, snapshot_(), options_.supported));
      ++sent_;
    } catch (const net::NetError& e) {
      std::cerr << "bulbsim: advertisement failed, retrying: " << e.what() << '\n';
      socket.reset();
    }
    wake_.wait_for(lock, options_.interval, [this] { return stopping_; });
  }
}

}  // namespace rliot::sim
