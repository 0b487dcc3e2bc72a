#include "agribot/service.hpp"

#include <chrono>
#include <charconv>

#include <httplib.h>
#include <json.hpp>

namespace agribot {

namespace {

constexpr const char* kNdjson = "application/x-ndjson";

std::string frames(const std::vector<OutboundMessage>& msgs) {
  std::string out;
  for (const auto& m : msgs) out += encode_message(m) + "\n";
  return out;
}

std::string error_body(std::string_view code, std::string_view field, std::string_view detail) {
  nlohmann::ordered_json j;
  j["error"] = std::string(code);
  j["field"] = std::string(field);
  j["detail"] = std::string(detail);
  return j.dump();
}

}  // namespace

Service::Service(const LoadedConfig& config, ServiceOptions options)
    : options_(std::move(options)) {
  SimConfig sim = config.sim;
  if (options_.seed) sim.seed = *options_.seed;

  OrchestratorSettings settings;
  settings.start_ts = options_.start_ts.value_or(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  settings.briefing_time = config.farm.briefing_time;
  settings.tz_offset_minutes = config.farm.tz_offset_minutes;
  settings.playlist = config.farm.playlist;

  store_ = std::make_unique<Store>(options_.data_dir, StoreOptions{options_.sync});
  orchestrator_ = std::make_unique<Orchestrator>(settings, sim, config.ruleset.rules,
                                                 config.registry, store_.get());
  gateway_ = std::make_unique<Gateway>(*orchestrator_, store_.get());
  if (options_.tick_ms < 0) options_.tick_ms = sim.tick_seconds * 1000;

  server_ = std::make_unique<httplib::Server>();
  install_routes();
}

Service::~Service() { stop(); }

void Service::install_routes() {
  // The browser client may be served from another origin.
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok\n", "text/plain");
  });

  server_->Post("/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::vector<InboundEvent> events;
    std::string_view body = req.body;
    std::size_t pos = 0;
    while (pos < body.size()) {
      auto nl = body.find('\n', pos);
      if (nl == std::string_view::npos) nl = body.size();
      const auto line = body.substr(pos, nl - pos);
      pos = nl + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        events.push_back(decode_event(line));
      } catch (const ProtocolError& e) {
        res.status = 400;
        res.set_content(error_body(to_string(e.code()), e.field(), e.what()), "application/json");
        return;
      }
    }
    if (events.empty()) {
      res.status = 400;
      res.set_content(error_body("MalformedFrame", "", "no frame in request body"),
                      "application/json");
      return;
    }
    std::string out;
    for (const auto& ev : events) out += frames(gateway_->route_event(ev));
    res.set_content(out, kNdjson);
  });

  server_->Get("/poll", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("user_id")) {
      res.status = 400;
      res.set_content(error_body("MissingField", "user_id", "query parameter required"),
                      "application/json");
      return;
    }
    res.set_content(frames(gateway_->poll(req.get_param_value("user_id"))), kNdjson);
  });

  server_->Post("/tick", [this](const httplib::Request& req, httplib::Response& res) {
    if (options_.tick_ms != 0) {
      res.status = 409;
      res.set_content(error_body("ClockNotManual", "", "serve was started with a wall clock"),
                      "application/json");
      return;
    }
    long n = 1;
    if (req.has_param("n")) {
      const std::string v = req.get_param_value("n");
      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || p != v.data() + v.size() || n < 1) {
        res.status = 400;
        res.set_content(error_body("BadParam", "n", "positive integer expected"),
                        "application/json");
        return;
      }
    }
    for (long i = 0; i < n; ++i) gateway_->advance();
    nlohmann::ordered_json j;
    j["tick"] = gateway_->inspect([](const Orchestrator& o) { return o.clock().tick_index; });
    res.set_content(j.dump(), "application/json");
  });
}

int Service::bind() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.host);
  } else if (!server_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  return port;
}

void Service::tick_loop() {
  std::unique_lock lock(stop_mu_);
  const auto period = std::chrono::milliseconds(options_.tick_ms);
  auto next = std::chrono::steady_clock::now() + period;
  while (!stop_cv_.wait_until(lock, next, [this] { return stopping_; })) {
    lock.unlock();
    gateway_->advance();
    lock.lock();
    next += period;
  }
}

void Service::run() {
  if (options_.tick_ms > 0) ticker_ = std::thread([this] { tick_loop(); });
  server_->listen_after_bind();
}

void Service::stop() {
  {
    std::lock_guard lock(stop_mu_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  if (server_) server_->stop();
  if (ticker_.joinable()) ticker_.join();
}

}  // namespace agribot
