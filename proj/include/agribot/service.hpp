#pragma once

// HTTP front end for `agribot serve`.
//
//   POST /events          one inbound frame per line; replies come back as frames, one per line
//   GET  /poll?user_id=U  drains pushes queued for U
//   POST /tick?n=K        runs K ticks (manual clock only, i.e. tick_ms == 0)
//   GET  /health

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "agribot/config.hpp"
#include "agribot/gateway.hpp"
#include "agribot/orchestrator.hpp"
#include "agribot/store.hpp"

namespace httplib {
class Server;
}

namespace agribot {

struct ServiceOptions {
  std::string host = "0.0.0.0";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "data";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> start_ts;  // defaults to the wall clock
  // Real milliseconds per simulated tick; 0 disables the wall-clock driver and
  // enables POST /tick. Negative means tick_seconds * 1000.
  int tick_ms = -1;
  bool sync = true;
};

class Service {
 public:
  Service(const LoadedConfig& config, ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket; returns the bound port. Throws std::runtime_error.
  int bind();

  // Serves until stop(); starts the tick driver unless the clock is manual.
  void run();
  void stop();

  Gateway& gateway() noexcept { return *gateway_; }
  Store& store() noexcept { return *store_; }

 private:
  void install_routes();
  void tick_loop();

  ServiceOptions options_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<Orchestrator> orchestrator_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<httplib::Server> server_;

  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
  std::thread ticker_;
};

}  // namespace agribot
