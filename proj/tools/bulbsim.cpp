// bulbsim: virtual smart bulb.

#include <atomic>
#include <csignal>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "rliot/device_sim/server.hpp"

using namespace rliot;

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated Yeelight-style bulb"};
  std::uint16_t port = sim::kDefaultPort;
  std::string bind = "0.0.0.0";
  std::string profile_path;
  bool no_rate_limit = false;
  double advertise_interval = 0.0;
  std::string advertise_host = "127.0.0.1";
  std::string device_id = "0x0000000000000001";
  app.add_option("--port", port, "TCP command port (0 = any free port)");
  app.add_option("--bind", bind, "bind address");
  app.add_option("--profile", profile_path, "simulator profile (JSON)")->check(CLI::ExistingFile);
  app.add_flag("--no-rate-limit", no_rate_limit, "disable the 60 commands per minute quota");
  app.add_option("--advertise-interval", advertise_interval, "seconds between UDP advertisements (0 = off)");
  app.add_option("--advertise-host", advertise_host, "address put in the advertised Location");
  app.add_option("--id", device_id, "advertised device id");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto profile = profile_path.empty() ? sim::SimProfile::standard() : sim::SimProfile::load(profile_path);
    sim::ServerOptions options;
    options.bind_address = bind;
    options.port = port;
    options.rate_limit = !no_rate_limit;
    sim::BulbServer server(profile, options);
    std::cout << "bulbsim listening on " << bind << ":" << server.port() << std::endl;

    std::unique_ptr<sim::Advertiser> advertiser;
    if (advertise_interval > 0) {
      sim::AdvertiserOptions adv;
      adv.interval = std::chrono::milliseconds(static_cast<long>(advertise_interval * 1000));
      adv.device_id = device_id;
      adv.location = advertise_host + ":" + std::to_string(server.port());
      adv.supported.assign(profile.supported.begin(), profile.supported.end());
      advertiser = std::make_unique<sim::Advertiser>([&server] { return server.snapshot(); }, adv);
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (advertiser) advertiser->stop();
    server.stop();
    std::cout << "handled " << server.commands_handled() << " commands" << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "bulbsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
