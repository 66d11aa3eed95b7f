#include "rliot/discoverer/discoverer.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "rliot/net/socket.hpp"
#include "rliot/protocol/codec.hpp"

namespace rliot::discovery {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::int64_t millis(WallClock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

}  // namespace

std::optional<std::map<std::string, std::string>> parse_advertisement(std::string_view payload) {
  std::map<std::string, std::string> headers;
  bool first = true;
  while (!payload.empty()) {
    const auto nl = payload.find('\n');
    auto line = trim(payload.substr(0, nl));
    payload = nl == std::string_view::npos ? std::string_view{} : payload.substr(nl + 1);
    if (first) {
      first = false;
      continue;  // request line
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    headers[lower(trim(line.substr(0, colon)))] = std::string(trim(line.substr(colon + 1)));
  }
  const auto loc = headers.find("location");
  if (loc == headers.end() || !headers.contains("id")) return std::nullopt;
  constexpr std::string_view kScheme = "yeelight://";
  if (!std::string_view(loc->second).starts_with(kScheme)) return std::nullopt;
  try {
    net::Endpoint::parse(std::string_view(loc->second).substr(kScheme.size()));
  } catch (const net::NetError&) {
    return std::nullopt;
  }
  return headers;
}

std::vector<DeviceRecord> collect_records(std::span<const Datagram> datagrams) {
  std::vector<DeviceRecord> records;
  for (const auto& d : datagrams) {
    const auto headers = parse_advertisement(d.payload);
    if (!headers) continue;
    const auto& id = headers->at("id");
    auto it = std::find_if(records.begin(), records.end(), [&](const DeviceRecord& r) { return r.id == id; });
    if (it == records.end()) {
      DeviceRecord r;
      r.id = id;
      r.address = headers->at("location").substr(std::string_view("yeelight://").size());
      r.first_seen = r.last_seen = d.at;
      r.sightings = 1;
      r.headers = *headers;
      records.push_back(std::move(r));
      continue;
    }
    it->first_seen = std::min(it->first_seen, d.at);
    if (d.at >= it->last_seen) {
      it->last_seen = d.at;
      it->headers = *headers;
      it->address = headers->at("location").substr(std::string_view("yeelight://").size());
    }
    ++it->sightings;
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const DeviceRecord& a, const DeviceRecord& b) { return a.first_seen < b.first_seen; });
  return records;
}

std::vector<DeviceRecord> listen(const std::string& group, std::uint16_t port, std::chrono::milliseconds duration) {
  auto socket = net::UdpSocket::receiver(group, port);
  std::vector<Datagram> captured;
  const auto deadline = std::chrono::steady_clock::now() + duration;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    if (auto d = socket.receive(left)) captured.push_back({WallClock::now(), std::move(d->payload)});
  }
  return collect_records(captured);
}

std::vector<std::string> expand_cidr(std::string_view cidr) {
  if (trim(cidr).empty()) return {};
  const auto slash = cidr.find('/');
  const std::string base(cidr.substr(0, slash));
  unsigned prefix = 32;
  if (slash != std::string_view::npos) {
    const auto digits = cidr.substr(slash + 1);
    auto [ptr, err] = std::from_chars(digits.data(), digits.data() + digits.size(), prefix);
    if (err != std::errc{} || ptr != digits.data() + digits.size() || prefix > 32) {
      throw std::invalid_argument("bad CIDR prefix in '" + std::string(cidr) + "'");
    }
  }
  if (prefix < 16) throw std::invalid_argument("refusing to scan a block larger than /16");
  in_addr addr{};
  if (inet_pton(AF_INET, base.c_str(), &addr) != 1) throw std::invalid_argument("bad CIDR address '" + base + "'");
  const std::uint32_t mask = prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - prefix);
  const std::uint32_t network = ntohl(addr.s_addr) & mask;
  const std::uint32_t size = std::uint32_t{1} << (32 - prefix);
  std::uint32_t first = network, last = network + size - 1;
  if (prefix <= 30) {
    ++first;  // skip network and broadcast addresses
    --last;
  }
  std::vector<std::string> hosts;
  for (std::uint64_t h = first; h <= last; ++h) {
    in_addr a{htonl(static_cast<std::uint32_t>(h))};
    char buf[INET_ADDRSTRLEN];
    inet_ntop(AF_INET, &a, buf, sizeof buf);
    hosts.emplace_back(buf);
  }
  return hosts;
}

std::vector<DeviceRecord> probe(std::span<const std::string> hosts, std::span<const std::uint16_t> ports,
                                std::chrono::milliseconds timeout) {
  std::vector<DeviceRecord> found;
  const protocol::CommandMessage fingerprint{1, "get_prop", {std::string("power")}};
  for (const auto& host : hosts) {
    for (const auto port : ports) {
      const net::Endpoint target{host, port};
      try {
        auto stream = net::TcpStream::connect(target, timeout);
        stream.send_all(protocol::encode_command(fingerprint));
        const auto line = stream.read_line(timeout);
        if (!line) continue;
        const auto reply = protocol::decode_response(*line);
        if (reply.id != fingerprint.id) continue;
        DeviceRecord r;
        r.id = target.str();
        r.address = target.str();
        r.first_seen = r.last_seen = WallClock::now();
        r.sightings = 1;
        if (reply.ok() && !reply.values().empty()) r.headers["power"] = reply.values().front();
        found.push_back(std::move(r));
      } catch (const net::NetError&) {
        // unreachable or closed: skipped
      } catch (const protocol::CodecError&) {
        // not speaking the protocol
      }
    }
  }
  return found;
}

nlohmann::json to_json(const DeviceRecord& record) {
  return {{"id", record.id},
          {"address", record.address},
          {"first_seen_ms", millis(record.first_seen)},
          {"last_seen_ms", millis(record.last_seen)},
          {"sightings", record.sightings},
          {"headers", record.headers}};
}

}  // namespace rliot::discovery
