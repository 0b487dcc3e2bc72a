#include "agribot/replay.hpp"

#include <map>
#include <memory>
#include <set>

#include <json.hpp>

#include "agribot/gateway.hpp"
#include "agribot/store.hpp"
#include "file_util.hpp"

namespace agribot {

namespace {

using Json = nlohmann::json;

ScriptError at_line(std::size_t line, const std::string& msg) {
  return ScriptError("script line " + std::to_string(line) + ": " + msg);
}

ScriptHeader parse_header(const Json& j, std::size_t line, const std::filesystem::path& base) {
  if (!j.is_object()) throw at_line(line, "header must be a JSON object");
  ScriptHeader h;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      if (!value.is_number_integer()) throw at_line(line, "'seed' must be an integer");
      h.seed = value.is_number_unsigned() ? value.get<std::uint64_t>()
                                          : static_cast<std::uint64_t>(value.get<std::int64_t>());
    } else if (key == "days") {
      if (!value.is_number_integer() || value.get<int>() < 0) {
        throw at_line(line, "'days' must be a non-negative integer");
      }
      h.days = value.get<int>();
    } else if (key == "ticks") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
        throw at_line(line, "'ticks' must be a non-negative integer");
      }
      h.ticks = value.get<std::int64_t>();
    } else if (key == "start_ts") {
      if (!value.is_number_integer()) throw at_line(line, "'start_ts' must be an integer");
      h.start_ts = value.get<std::int64_t>();
    } else if (key == "config") {
      if (!value.is_string()) throw at_line(line, "'config' must be a path string");
      std::filesystem::path p = value.get<std::string>();
      h.config = p.is_absolute() ? p : base / p;
    } else if (key == "active_users") {
      if (!value.is_array()) throw at_line(line, "'active_users' must be an array");
      for (const auto& u : value) {
        if (!u.is_string()) throw at_line(line, "'active_users' entries must be strings");
        h.active_users.push_back(u.get<std::string>());
      }
    } else if (key == "sim") {
      if (!value.is_object()) throw at_line(line, "'sim' must be an object");
      h.sim_overrides = value.dump();
    } else {
      throw at_line(line, "unknown header key '" + key + "'");
    }
  }
  return h;
}

}  // namespace

ReplayScript parse_script(std::string_view text, const std::filesystem::path& base_dir) {
  ReplayScript script;
  bool have_header = false;
  std::size_t line_no = 0;
  std::set<std::string> event_ids;
  std::map<std::string, std::int64_t> last_ts;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;

    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw at_line(line_no, e.what());
    }
    if (!have_header) {
      script.header = parse_header(j, line_no, base_dir);
      have_header = true;
      continue;
    }
    if (!j.is_object() || !j.contains("at_tick") || !j["at_tick"].is_number_integer() ||
        !j.contains("event") || j.size() != 2) {
      throw at_line(line_no, "expected {\"at_tick\":N,\"event\":{...}}");
    }
    TimedEvent te;
    te.at_tick = j["at_tick"].get<std::int64_t>();
    if (te.at_tick < 0) throw at_line(line_no, "at_tick must be non-negative");
    if (!script.events.empty() && te.at_tick < script.events.back().at_tick) {
      throw at_line(line_no, "at_tick decreases");
    }
    try {
      te.event = decode_event(j["event"].dump());
    } catch (const ProtocolError& e) {
      throw at_line(line_no, e.what());
    }
    if (!event_ids.insert(te.event.event_id).second) {
      throw at_line(line_no, "duplicate event_id '" + te.event.event_id + "'");
    }
    auto [it, inserted] = last_ts.try_emplace(te.event.user_id, te.event.ts);
    if (!inserted) {
      if (te.event.ts < it->second) {
        throw at_line(line_no, "ts decreases for user '" + te.event.user_id + "'");
      }
      it->second = te.event.ts;
    }
    script.events.push_back(std::move(te));
  }
  if (!have_header) throw ScriptError("script has no header frame");
  return script;
}

ReplayScript load_script(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_text_file(path);
  } catch (const std::exception& e) {
    throw ScriptError(e.what());
  }
  try {
    return parse_script(text, path.parent_path());
  } catch (const ScriptError& e) {
    throw ScriptError(path.string() + ": " + e.what());
  }
}

std::int64_t run_length(const ScriptHeader& header, int tick_seconds) {
  if (header.ticks) return *header.ticks;
  return static_cast<std::int64_t>(header.days) * 86400 / tick_seconds;
}

ReplayResult run_replay(const ReplayScript& script, const LoadedConfig& config,
                        const ReplayOptions& options) {
  SimConfig sim = config.sim;
  if (!script.header.sim_overrides.empty()) {
    try {
      sim = parse_sim_config(script.header.sim_overrides, sim);
    } catch (const std::exception& e) {
      throw ScriptError(std::string("script 'sim' overrides: ") + e.what());
    }
  }
  if (script.header.seed) sim.seed = *script.header.seed;
  if (options.seed) sim.seed = *options.seed;

  const std::int64_t total = run_length(script.header, sim.tick_seconds);
  if (!script.events.empty() && script.events.back().at_tick > total) {
    throw ScriptError("event at tick " + std::to_string(script.events.back().at_tick) +
                      " is past the end of the run (" + std::to_string(total) + " ticks)");
  }

  std::unique_ptr<Store> store;
  if (options.data_dir) {
    for (auto s : kAllStreams) {
      const auto path = *options.data_dir / file_name(s);
      std::error_code ec;
      if (std::filesystem::exists(path, ec) && std::filesystem::file_size(path, ec) > 0) {
        throw ScriptError("data directory already holds " + path.string() +
                          "; replay needs a fresh directory");
      }
    }
    store = std::make_unique<Store>(*options.data_dir, StoreOptions{options.sync});
  }

  OrchestratorSettings settings;
  settings.start_ts = script.header.start_ts;
  settings.briefing_time = config.farm.briefing_time;
  settings.tz_offset_minutes = config.farm.tz_offset_minutes;
  settings.playlist = config.farm.playlist;

  Orchestrator orchestrator(settings, sim, config.ruleset.rules, config.registry, store.get());
  Gateway gateway(orchestrator, store.get());
  for (const auto& user : script.header.active_users) {
    gateway.allow(user);
    orchestrator.start_session_quietly(user);
  }

  ReplayResult result;
  result.warnings = config.ruleset.warnings;
  std::size_t next = 0;
  for (std::int64_t t = 0; t <= total; ++t) {
    while (next < script.events.size() && script.events[next].at_tick == t) {
      gateway.route_event(script.events[next].event);
      ++next;
    }
    if (t == total) break;
    TickReport report = gateway.advance();
    if (options.on_tick) options.on_tick(report, orchestrator);
  }

  result.ticks = total;
  result.transcript = gateway.transcript();
  result.errors = gateway.errors();
  const auto& w = orchestrator.warnings();
  result.warnings.insert(result.warnings.end(), w.begin(), w.end());
  if (store) {
    const auto sw = store->warnings();
    result.warnings.insert(result.warnings.end(), sw.begin(), sw.end());
  }
  return result;
}

}  // namespace agribot
