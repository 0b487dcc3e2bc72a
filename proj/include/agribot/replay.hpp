#pragma once

// Deterministic replay of a timed event script on the simulated clock.
//
// Script file: a header frame, then one timed event per line.
//   {"seed":42,"days":3,"start_ts":1700000000,"config":"../data/farm.conf",
//    "active_users":["u1"],"sim":{"noise_sigma":0.5}}
//   {"at_tick":0,"event":{"type":"postback","event_id":"e1","user_id":"u1","ts":1700000000,"action":"TOGGLE_SESSION"}}
// Events with at_tick = t are handled after t ticks have run. Blank lines and
// lines starting with '#' are ignored.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agribot/config.hpp"
#include "agribot/orchestrator.hpp"
#include "agribot/wire.hpp"

namespace agribot {

class ScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScriptHeader {
  std::optional<std::uint64_t> seed;
  int days = 1;
  std::optional<std::int64_t> ticks;  // overrides days when present
  std::int64_t start_ts = 1700000000;
  std::optional<std::filesystem::path> config;
  std::vector<std::string> active_users;
  std::string sim_overrides;  // JSON object text, empty when absent
};

struct TimedEvent {
  std::int64_t at_tick = 0;
  InboundEvent event;
};

struct ReplayScript {
  ScriptHeader header;
  std::vector<TimedEvent> events;
};

// Relative header paths resolve against `base_dir`.
ReplayScript parse_script(std::string_view text, const std::filesystem::path& base_dir);
ReplayScript load_script(const std::filesystem::path& path);

struct ReplayOptions {
  std::optional<std::filesystem::path> data_dir;  // persist the four streams here
  std::optional<std::uint64_t> seed;              // overrides the script header
  bool sync = true;
  // Called after every tick with the tick's report.
  std::function<void(const TickReport&, const Orchestrator&)> on_tick;
};

struct ReplayResult {
  std::vector<std::string> transcript;  // outbound frames in order
  std::int64_t ticks = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
};

// Total ticks the script runs for with the given tick length.
std::int64_t run_length(const ScriptHeader& header, int tick_seconds);

ReplayResult run_replay(const ReplayScript& script, const LoadedConfig& config,
                        const ReplayOptions& options = {});

}  // namespace agribot
