#include <chrono>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "rliot/device_sim/bulb.hpp"
#include "rliot/device_sim/rate_limiter.hpp"
#include "rliot/device_sim/server.hpp"
#include "rliot/net/socket.hpp"
#include "rliot/protocol/codec.hpp"
#include "rliot/protocol/dictionary.hpp"

using namespace rliot;
using namespace rliot::sim;
using protocol::CommandMessage;
using protocol::ParamValue;
using namespace std::chrono_literals;

namespace {

const std::string kData = RLIOT_DATA_DIR;

Transition run(const BulbState& s, std::string method, std::vector<ParamValue> params) {
  return apply_command(s, {1, std::move(method), std::move(params)}, SimProfile::standard());
}

ServerOptions local(bool rate_limit = false) {
  ServerOptions o;
  o.bind_address = "127.0.0.1";
  o.port = 0;
  o.rate_limit = rate_limit;
  return o;
}

std::string roundtrip(net::TcpStream& s, const std::string& frame) {
  s.send_all(frame);
  const auto line = s.read_line(2s);
  if (!line) throw std::runtime_error("no reply");
  return *line + "\r\n";
}

}  // namespace

TEST(Bulb, SetPowerOff) {
  const auto t = run(BulbState{}, "set_power", {std::string("off"), std::string("smooth"), std::int64_t{500}});
  EXPECT_EQ(t.state.power, Power::off);
  EXPECT_TRUE(t.response.ok());
}

TEST(Bulb, AdjustBrightToZeroTurnsOff) {
  BulbState s;
  s.bright = 50;
  const auto t = run(s, "adjust_bright", {std::int64_t{-50}, std::int64_t{500}});
  EXPECT_TRUE(t.response.ok());
  EXPECT_EQ(t.state.power, Power::off);
  EXPECT_TRUE(t.state.in_range());
}

TEST(Bulb, SetRgbZeroTurnsOff) {
  const auto t = run(BulbState{}, "set_rgb", {std::int64_t{0}, std::string("sudden"), std::int64_t{30}});
  EXPECT_EQ(t.state.power, Power::off);
  EXPECT_EQ(t.state.rgb, BulbState{}.rgb);
}

TEST(Bulb, SetBrightClampsInsteadOfSwitchingOff) {
  const auto t = run(BulbState{}, "set_bright", {std::int64_t{0}, std::string("sudden"), std::int64_t{30}});
  EXPECT_TRUE(t.response.ok());
  EXPECT_EQ(t.state.power, Power::on);
  EXPECT_EQ(t.state.bright, 1);
}

TEST(Bulb, UnsupportedMethodLeavesStateAlone) {
  BulbState s;
  s.name = "lab";
  const auto t = run(s, "bg_set_rgb", {std::int64_t{5}, std::string("sudden"), std::int64_t{30}});
  EXPECT_EQ(t.state, s);
  ASSERT_FALSE(t.response.ok());
  EXPECT_EQ(t.response.error().code, protocol::error_code::kUnsupportedMethod);
}

TEST(Bulb, IdempotentSet) {
  BulbState s;
  s.rgb = 255;
  const auto t = run(s, "set_rgb", {std::int64_t{255}, std::string("sudden"), std::int64_t{0}});
  // duration 0 is below the documented minimum of 30
  EXPECT_EQ(t.state, s);
  const auto u = run(s, "set_rgb", {std::int64_t{255}, std::string("sudden"), std::int64_t{30}});
  EXPECT_TRUE(u.response.ok());
  EXPECT_EQ(u.state, s);
}

TEST(Bulb, OutOfRangeRejected) {
  const BulbState s;
  for (const auto& [m, p] : std::vector<std::pair<std::string, std::vector<ParamValue>>>{
           {"set_rgb", {std::int64_t{16777216}, std::string("sudden"), std::int64_t{30}}},
           {"set_bright", {std::int64_t{101}, std::string("sudden"), std::int64_t{30}}},
           {"set_ct_abx", {std::int64_t{1699}, std::string("sudden"), std::int64_t{30}}},
           {"set_name", {std::string(65, 'x')}},
           {"set_power", {std::string("dim")}},
           {"set_rgb", {std::string("red")}}}) {
    const auto t = run(s, m, p);
    EXPECT_FALSE(t.response.ok()) << m;
    EXPECT_EQ(t.state, s) << m;
  }
}

TEST(Bulb, GetPropReportsState) {
  BulbState s;
  s.name = "lab";
  s.power = Power::off;
  const auto t = run(s, "get_prop", {std::string("power"), std::string("name"), std::string("nope")});
  EXPECT_EQ(t.response.values(), (std::vector<std::string>{"off", "lab", ""}));
  std::vector<std::string> props;
  for (const auto& p : kStateProps) props.push_back(property(s, p));
  EXPECT_EQ(state_from_props(props).name, "lab");
}

TEST(Bulb, NameChangeWorksWhileOff) {
  BulbState s;
  s.power = Power::off;
  EXPECT_EQ(run(s, "set_name", {std::string("lab")}).state.name, "lab");
  EXPECT_FALSE(run(s, "set_bright", {std::int64_t{10}, std::string("sudden"), std::int64_t{30}}).response.ok());
}

// Random valid commands from the dictionary, against a random walk of states.
TEST(Bulb, FuzzRangesPurityAndErrors) {
  const auto dict = protocol::MessageDictionary::load(kData + "/yeelight.dict");
  const auto profile = SimProfile::standard();
  Rng rng(404);
  BulbState s = profile.initial;
  std::size_t errors = 0;
  for (int i = 0; i < 100000; ++i) {
    auto [method, params] = dict.instantiate(rng.index(dict.actions().size()), rng);
    const CommandMessage cmd{i, method, params};
    const auto t = apply_command(s, cmd, profile);
    ASSERT_TRUE(t.state.in_range()) << method;
    ASSERT_EQ(t.response.id, i);
    const auto again = apply_command(s, cmd, profile);
    ASSERT_EQ(again.state, t.state);
    ASSERT_EQ(again.response, t.response);
    if (!t.response.ok()) {
      ++errors;
      ASSERT_EQ(t.state, s) << method;
    }
    s = t.state;
  }
  EXPECT_GT(errors, 10000u);
}

TEST(Bulb, ProfileFromFile) {
  const auto p = SimProfile::load(kData + "/bulb_profile.json");
  EXPECT_EQ(p.supported.size(), 18u);
  EXPECT_EQ(p.supported, SimProfile::standard().supported);
  EXPECT_EQ(p.initial, SimProfile::standard().initial);
}

TEST(RateLimiter, SixtyFirstInWindowRefused) {
  RateLimiter r(60, 60s);
  const SteadyClock::time_point t0{};
  for (int i = 0; i < 60; ++i) EXPECT_TRUE(r.admit(t0 + std::chrono::milliseconds(i * 100)));
  EXPECT_FALSE(r.admit(t0 + 10s));
  EXPECT_TRUE(r.admit(t0 + 60s));
}

TEST(RateLimiter, SlidingWindowProperty) {
  Rng rng(5);
  RateLimiter r(60, 60s);
  std::vector<SteadyClock::time_point> admitted;
  SteadyClock::time_point now{};
  for (int i = 0; i < 20000; ++i) {
    now += std::chrono::milliseconds(rng.uniform_int(0, 3000));
    if (r.admit(now)) admitted.push_back(now);
    ASSERT_LE(r.in_window(), r.quota());
  }
  // any 60 s window holds at most 60 admissions
  for (std::size_t i = 0; i + 60 < admitted.size(); ++i) ASSERT_GE(admitted[i + 60] - admitted[i], 60s);
}

TEST(Server, AnswersSetRgb) {
  BulbServer server(SimProfile::standard(), local());
  auto s = net::TcpStream::connect({"127.0.0.1", server.port()}, 2s);
  EXPECT_EQ(roundtrip(s, "{\"id\": 1, \"method\": \"set_rgb\", \"params\": [255, \"sudden\", 30]}\r\n"),
            "{\"id\": 1, \"result\": [\"ok\"]}\r\n");
  EXPECT_EQ(server.snapshot().rgb, 255);
}

TEST(Server, EchoesRepeatedIds) {
  BulbServer server(SimProfile::standard(), local());
  auto s = net::TcpStream::connect({"127.0.0.1", server.port()}, 2s);
  const std::string cmd = "{\"id\": 9, \"method\": \"toggle\", \"params\": []}\r\n";
  EXPECT_EQ(roundtrip(s, cmd), "{\"id\": 9, \"result\": [\"ok\"]}\r\n");
  EXPECT_EQ(roundtrip(s, cmd), "{\"id\": 9, \"result\": [\"ok\"]}\r\n");
}

TEST(Server, SequentialConnections) {
  BulbServer server(SimProfile::standard(), local());
  for (int i = 0; i < 3; ++i) {
    auto s = net::TcpStream::connect({"127.0.0.1", server.port()}, 2s);
    EXPECT_EQ(roundtrip(s, "{\"id\": 1, \"method\": \"set_name\", \"params\": [\"n" + std::to_string(i) + "\"]}\r\n"),
              "{\"id\": 1, \"result\": [\"ok\"]}\r\n");
  }
  EXPECT_EQ(server.snapshot().name, "n2");
}

TEST(Server, GarbageGetsInvalidCommand) {
  BulbServer server(SimProfile::standard(), local());
  EXPECT_EQ(server.handle_line("not json"), "{\"id\": 0, \"error\": {\"code\": -2, \"message\": \"invalid command\"}}\r\n");
}

TEST(Server, QuotaOverTcp) {
  auto opts = local(true);
  opts.clock = [] { return SteadyClock::time_point{} + 1s; };
  BulbServer server(SimProfile::standard(), opts);
  auto s = net::TcpStream::connect({"127.0.0.1", server.port()}, 2s);
  for (int i = 1; i <= 60; ++i) {
    const auto r = protocol::decode_response(roundtrip(s, protocol::encode_command({i, "get_prop", {std::string("power")}})));
    ASSERT_TRUE(r.ok()) << i;
  }
  const auto r = protocol::decode_response(roundtrip(s, protocol::encode_command({61, "get_prop", {std::string("power")}})));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.id, 61);
  EXPECT_EQ(r.error().code, protocol::error_code::kQuotaExceeded);
}

TEST(Server, ResetMidConnection) {
  BulbServer server(SimProfile::standard(), local());
  auto s = net::TcpStream::connect({"127.0.0.1", server.port()}, 2s);
  roundtrip(s, protocol::encode_command({1, "set_name", {std::string("before")}}));
  BulbState target;
  target.power = Power::off;
  target.name = "after";
  server.reset_device(target);
  const auto r = protocol::decode_response(roundtrip(s, protocol::encode_command({2, "get_prop", {std::string("name")}})));
  EXPECT_EQ(r.values(), std::vector<std::string>{"after"});
  EXPECT_EQ(server.snapshot(), target);
}

TEST(Server, ResetSoak) {
  BulbServer server(SimProfile::standard(), local());
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    BulbState s;
    s.power = rng.bernoulli(0.5) ? Power::on : Power::off;
    s.rgb = rng.uniform_int(0, kMaxRgb);
    s.bright = static_cast<int>(rng.uniform_int(1, 100));
    s.name = "b" + std::to_string(i);
    server.reset_device(s);
    ASSERT_EQ(server.snapshot(), s);
  }
}

TEST(Server, BindFailure) {
  BulbServer a(SimProfile::standard(), local());
  auto o = local();
  o.port = a.port();
  EXPECT_THROW(BulbServer(SimProfile::standard(), o), net::NetError);
}

TEST(Advertisement, Format) {
  BulbState s;
  s.name = "lab";
  const auto text = format_advertisement("0x1", "10.0.0.2:55443", s, {"get_prop", "toggle"});
  EXPECT_NE(text.find("Location: yeelight://10.0.0.2:55443\r\n"), std::string::npos);
  EXPECT_NE(text.find("name: lab\r\n"), std::string::npos);
  EXPECT_NE(text.find("id: 0x1\r\n"), std::string::npos);
  EXPECT_NE(text.find("support: get_prop toggle\r\n"), std::string::npos);
}

TEST(Advertisement, PeriodicAndReflectsState) {
  const std::uint16_t port = static_cast<std::uint16_t>(42000 + ::getpid() % 1000);
  auto rx = net::UdpSocket::receiver("127.0.0.1", port);
  BulbServer server(SimProfile::standard(), local());
  AdvertiserOptions o;
  o.target = {"127.0.0.1", port};
  o.interval = 200ms;
  o.location = "127.0.0.1:" + std::to_string(server.port());
  Advertiser adv([&server] { return server.snapshot(); }, o);
  std::size_t got = 0;
  const auto end = std::chrono::steady_clock::now() + 1000ms;
  while (std::chrono::steady_clock::now() < end) {
    if (rx.receive(50ms)) ++got;
  }
  // one per 200 ms over 1 s, with timer tolerance
  EXPECT_GE(got, 4u);
  EXPECT_LE(got, 7u);
  server.reset_device([] {
    BulbState s;
    s.name = "lab";
    return s;
  }());
  bool seen = false;
  for (int i = 0; i < 20 && !seen; ++i) {
    if (auto d = rx.receive(100ms)) seen = d->payload.find("name: lab\r\n") != std::string::npos;
  }
  EXPECT_TRUE(seen);
  adv.stop();
}
