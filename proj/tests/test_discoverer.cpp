#include <atomic>
#include <chrono>
#include <thread>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "rliot/device_sim/server.hpp"
#include "rliot/discoverer/discoverer.hpp"
#include "rliot/net/socket.hpp"

using namespace rliot;
using namespace rliot::discovery;
using namespace std::chrono_literals;

namespace {

std::uint16_t test_port(int offset) { return static_cast<std::uint16_t>(43000 + (::getpid() % 500) * 2 + offset); }

sim::ServerOptions local() {
  sim::ServerOptions o;
  o.bind_address = "127.0.0.1";
  o.port = 0;
  o.rate_limit = false;
  return o;
}

std::unique_ptr<sim::Advertiser> advertise(const sim::BulbServer& server, const std::string& id, std::uint16_t udp_port) {
  sim::AdvertiserOptions o;
  o.target = {sim::kAdvertiseGroup, udp_port};
  o.interval = 300ms;
  o.device_id = id;
  o.location = "127.0.0.1:" + std::to_string(server.port());
  return std::make_unique<sim::Advertiser>([&server] { return server.snapshot(); }, o);
}

Datagram dgram(int ms, const std::string& id, const std::string& location) {
  return {WallClock::time_point{} + std::chrono::milliseconds(ms),
          sim::format_advertisement(id, location, sim::BulbState{}, {"get_prop"})};
}

}  // namespace

TEST(Advertisements, ParseHeaders) {
  const auto h = parse_advertisement(sim::format_advertisement("0x7", "10.1.2.3:55443", sim::BulbState{}, {}));
  ASSERT_TRUE(h);
  EXPECT_EQ(h->at("id"), "0x7");
  EXPECT_EQ(h->at("location"), "yeelight://10.1.2.3:55443");
  EXPECT_EQ(h->at("power"), "on");
  EXPECT_FALSE(parse_advertisement("M-SEARCH * HTTP/1.1\r\nMAN: \"ssdp:discover\"\r\n"));
  EXPECT_FALSE(parse_advertisement("NOTIFY * HTTP/1.1\r\nLocation: http://x\r\nid: 1\r\n"));
}

TEST(Advertisements, ReplayDeduplicatesAndSorts) {
  const std::vector<Datagram> log = {dgram(500, "b", "10.0.0.2:1"), dgram(100, "a", "10.0.0.1:1"), dgram(900, "a", "10.0.0.1:2"),
                                     {WallClock::time_point{}, "noise"}};
  const auto r = collect_records(log);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].id, "a");
  EXPECT_EQ(r[0].sightings, 2u);
  EXPECT_EQ(r[0].address, "10.0.0.1:2");
  EXPECT_GE(r[0].last_seen, r[0].first_seen);
  EXPECT_EQ(r[1].id, "b");
  // same log, same records
  const auto again = collect_records(log);
  ASSERT_EQ(again.size(), r.size());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(to_json(again[i]), to_json(r[i]));
}

TEST(Listen, SingleSimulator) {
  sim::BulbServer server(sim::SimProfile::standard(), local());
  const auto port = test_port(0);
  auto adv = advertise(server, "0x1", port);
  const auto records = listen(sim::kAdvertiseGroup, port, 1000ms);
  adv->stop();
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].address, "127.0.0.1:" + std::to_string(server.port()));
  EXPECT_GE(records[0].sightings, 2u);
  EXPECT_EQ(records[0].headers.at("location"), "yeelight://127.0.0.1:" + std::to_string(server.port()));
}

TEST(Listen, TwoSimulators) {
  sim::BulbServer a(sim::SimProfile::standard(), local());
  sim::BulbServer b(sim::SimProfile::standard(), local());
  const auto port = test_port(1);
  auto adv_a = advertise(a, "0xa", port);
  auto adv_b = advertise(b, "0xb", port);
  const auto records = listen(sim::kAdvertiseGroup, port, 1000ms);
  EXPECT_EQ(records.size(), 2u);
}

TEST(Listen, SilentNetwork) {
  EXPECT_TRUE(listen(sim::kAdvertiseGroup, static_cast<std::uint16_t>(test_port(0) + 1500), 300ms).empty());
}

TEST(Probe, FindsSimulator) {
  sim::BulbServer server(sim::SimProfile::standard(), local());
  const std::vector<std::string> hosts = {"127.0.0.1"};
  const std::vector<std::uint16_t> ports = {server.port()};
  const auto before = server.snapshot();
  const auto r = probe(hosts, ports);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].address, "127.0.0.1:" + std::to_string(server.port()));
  EXPECT_EQ(r[0].headers.at("power"), "on");
  // fingerprinting is read-only
  EXPECT_EQ(server.snapshot(), before);
}

TEST(Probe, SkipsNonJsonPort) {
  net::TcpListener listener("127.0.0.1", 0);
  std::atomic<bool> stop{false};
  std::thread t([&] {
    while (!stop) {
      if (auto conn = listener.accept(50ms)) {
        try {
          conn->send_all("SSH-2.0-OpenSSH\r\n");
          conn->read_line(300ms);
        } catch (const net::NetError&) {
        }
      }
    }
  });
  const std::vector<std::string> hosts = {"127.0.0.1"};
  const std::vector<std::uint16_t> ports = {listener.port()};
  EXPECT_TRUE(probe(hosts, ports).empty());
  stop = true;
  t.join();
}

TEST(Probe, ClosedPortAndEmptyRange) {
  std::uint16_t closed = 0;
  {
    net::TcpListener l("127.0.0.1", 0);
    closed = l.port();
  }
  const std::vector<std::string> hosts = {"127.0.0.1"};
  const std::vector<std::uint16_t> ports = {closed};
  EXPECT_TRUE(probe(hosts, ports).empty());
  const auto none = expand_cidr("");
  EXPECT_TRUE(probe(none, ports).empty());
}

TEST(Cidr, Expansion) {
  EXPECT_EQ(expand_cidr("10.0.0.0/30"), (std::vector<std::string>{"10.0.0.1", "10.0.0.2"}));
  EXPECT_EQ(expand_cidr("192.168.1.7/32"), (std::vector<std::string>{"192.168.1.7"}));
  EXPECT_EQ(expand_cidr("192.168.1.7"), (std::vector<std::string>{"192.168.1.7"}));
  EXPECT_EQ(expand_cidr("10.0.0.0/31").size(), 2u);
  EXPECT_EQ(expand_cidr("10.0.0.0/24").size(), 254u);
  EXPECT_THROW(expand_cidr("10.0.0.0/8"), std::invalid_argument);
  EXPECT_THROW(expand_cidr("10.0.0/24"), std::invalid_argument);
  EXPECT_THROW(expand_cidr("10.0.0.0/33"), std::invalid_argument);
}
