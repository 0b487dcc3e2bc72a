// agribot: serve the farm chat service, replay scripts, dump stored streams.
//
// Exit codes: 0 success, 1 usage, 2 config, 3 runtime.

#include <pthread.h>

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "agribot/config.hpp"
#include "agribot/replay.hpp"
#include "agribot/service.hpp"
#include "agribot/store.hpp"

#ifndef AGRIBOT_DEFAULT_CONFIG
#define AGRIBOT_DEFAULT_CONFIG "data/farm.conf"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kConfig = 2;
constexpr int kRuntime = 3;

std::optional<std::int64_t> parse_bound(const std::string& s) {
  if (s == "MAX") return std::numeric_limits<std::int64_t>::max();
  if (s == "MIN") return std::numeric_limits<std::int64_t>::min();
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int cmd_serve(const std::string& config_path, agribot::ServiceOptions options) {
  agribot::LoadedConfig config;
  try {
    config = agribot::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "agribot serve: " << e.what() << "\n";
    return kConfig;
  }
  for (const auto& w : config.ruleset.warnings) std::cerr << "warning: " << w << "\n";
  // SIGINT/SIGTERM are taken synchronously by a waiter thread; every other
  // thread inherits the blocked mask.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  try {
    agribot::Service service(config, options);
    for (const auto& w : service.store().warnings()) std::cerr << "warning: " << w << "\n";
    const int port = service.bind();
    std::cerr << "agribot listening on " << options.host << ":" << port << "\n";
    std::thread waiter([&] {
      int sig = 0;
      sigwait(&stop_signals, &sig);
      service.stop();
    });
    service.run();
    // run() can also end on its own; wake the waiter so it can be joined.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  } catch (const std::exception& e) {
    std::cerr << "agribot serve: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_replay(const std::string& script_path, const std::string& out_path,
               const std::string& config_flag, const std::string& data_dir,
               std::optional<std::uint64_t> seed, bool sync) {
  agribot::ReplayScript script;
  agribot::LoadedConfig config;
  try {
    script = agribot::load_script(script_path);
    std::filesystem::path config_path = AGRIBOT_DEFAULT_CONFIG;
    if (!config_flag.empty()) {
      config_path = config_flag;
    } else if (script.header.config) {
      config_path = *script.header.config;
    }
    config = agribot::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "agribot replay: " << e.what() << "\n";
    return kConfig;
  }

  agribot::ReplayOptions options;
  if (!data_dir.empty()) options.data_dir = data_dir;
  options.seed = seed;
  options.sync = sync;

  agribot::ReplayResult result;
  try {
    result = agribot::run_replay(script, config, options);
  } catch (const agribot::ScriptError& e) {
    std::cerr << "agribot replay: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "agribot replay: " << e.what() << "\n";
    return kRuntime;
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  for (const auto& frame : result.transcript) out << frame << '\n';
  out.flush();
  if (!out) {
    std::cerr << "agribot replay: cannot write " << out_path << "\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_dump(const std::string& stream_name, const std::string& data_dir, const std::string& from,
             const std::string& to) {
  const auto stream = agribot::parse_stream(stream_name);
  if (!stream) {
    std::cerr << "agribot dump: unknown stream '" << stream_name << "'\n";
    return kUsage;
  }
  const auto lo = parse_bound(from);
  const auto hi = parse_bound(to);
  if (!lo || !hi) {
    std::cerr << "agribot dump: --from/--to must be integers or MAX\n";
    return kUsage;
  }
  if (*lo > *hi) {
    std::cerr << "agribot dump: BadRange: --from " << from << " is after --to " << to << "\n";
    return kUsage;
  }
  if (!std::filesystem::is_directory(data_dir)) {
    std::cerr << "agribot dump: data directory '" << data_dir << "' does not exist\n";
    return kConfig;
  }
  try {
    agribot::Store store(data_dir);
    for (const auto& w : store.warnings()) std::cerr << "warning: " << w << "\n";
    for (const auto& r : store.query(*stream, *lo, *hi)) {
      std::cout << agribot::format_record(r) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "agribot dump: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smart-farm chat assistant: gateway, intent matching, recommendations"};
  app.require_subcommand(1);

  std::string config_path = AGRIBOT_DEFAULT_CONFIG;
  agribot::ServiceOptions serve_opts;
  std::string serve_data = "data";
  std::optional<std::uint64_t> serve_seed;
  std::optional<std::int64_t> serve_start;
  bool serve_no_sync = false;
  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway and the wall-clock tick loop");
  serve->add_option("--config", config_path, "Farm config file");
  serve->add_option("--port", serve_opts.port, "Listen port (0 picks one)");
  serve->add_option("--host", serve_opts.host, "Listen address");
  serve->add_option("--data", serve_data, "Data directory for the stream logs");
  serve->add_option("--seed", serve_seed, "Simulation seed");
  serve->add_option("--start-ts", serve_start, "Simulated unix time at tick 0");
  serve->add_option("--tick-ms", serve_opts.tick_ms,
                    "Real milliseconds per tick; 0 = manual ticks via POST /tick");
  serve->add_flag("--no-sync", serve_no_sync, "Skip fdatasync after each append");

  std::string script_path;
  std::string out_path;
  std::string replay_config;
  std::string replay_data;
  std::optional<std::uint64_t> replay_seed;
  bool replay_no_sync = false;
  auto* replay = app.add_subcommand("replay", "Run a scripted scenario on the simulated clock");
  replay->add_option("script", script_path, "Replay script")->required();
  replay->add_option("out", out_path, "Where to write the outbound transcript")->required();
  replay->add_option("--config", replay_config, "Farm config (overrides the script header)");
  replay->add_option("--data", replay_data, "Persist the stream logs into this fresh directory");
  replay->add_option("--seed", replay_seed, "Simulation seed (overrides the script header)");
  replay->add_flag("--no-sync", replay_no_sync, "Skip fdatasync after each append");

  std::string dump_stream;
  std::string dump_data = "data";
  std::string dump_from = "MIN";
  std::string dump_to = "MAX";
  auto* dump = app.add_subcommand("dump", "Print stored records with ts in [from, to]");
  dump->add_option("stream", dump_stream, "sessions | telemetry | transcript | audit")->required();
  dump->add_option("--data", dump_data, "Data directory");
  dump->add_option("--from", dump_from, "Lower ts bound (inclusive), integer or MIN");
  dump->add_option("--to", dump_to, "Upper ts bound (inclusive), integer or MAX");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*serve) {
    serve_opts.data_dir = serve_data;
    serve_opts.seed = serve_seed;
    serve_opts.start_ts = serve_start;
    serve_opts.sync = !serve_no_sync;
    return cmd_serve(config_path, serve_opts);
  }
  if (*replay) {
    return cmd_replay(script_path, out_path, replay_config, replay_data, replay_seed,
                      !replay_no_sync);
  }
  return cmd_dump(dump_stream, dump_data, dump_from, dump_to);
}
