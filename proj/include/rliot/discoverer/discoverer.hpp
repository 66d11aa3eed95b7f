#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rliot::discovery {

using WallClock = std::chrono::system_clock;

struct DeviceRecord {
  std::string id;
  std::string address;  // ip:port of the command socket
  WallClock::time_point first_seen;
  WallClock::time_point last_seen;
  std::size_t sightings = 0;
  std::map<std::string, std::string> headers;
};

/// One received advertisement with its arrival time.
struct Datagram {
  WallClock::time_point at;
  std::string payload;
};

/// Header map of an advertisement, or nullopt when the payload does not look
/// like one (no Location/id header). Header names are lower-cased.
std::optional<std::map<std::string, std::string>> parse_advertisement(std::string_view payload);

/// Deduplicates advertisements by device id; sorted by first sighting.
/// Pure in its input so captured datagram logs can be replayed.
std::vector<DeviceRecord> collect_records(std::span<const Datagram> datagrams);

/// Listens on the advertisement group for `duration`.
std::vector<DeviceRecord> listen(const std::string& group, std::uint16_t port, std::chrono::milliseconds duration);

/// Hosts of an IPv4 CIDR block ("10.0.0.0/30"). An empty string is an empty
/// range. Blocks larger than /16 are rejected.
std::vector<std::string> expand_cidr(std::string_view cidr);

/// Serial TCP-connect scan with a read-only get_prop fingerprint; only
/// endpoints that answer with a well-formed result are reported.
std::vector<DeviceRecord> probe(std::span<const std::string> hosts, std::span<const std::uint16_t> ports,
                                std::chrono::milliseconds timeout = std::chrono::milliseconds(250));

nlohmann::json to_json(const DeviceRecord& record);

}  // namespace rliot::discovery
