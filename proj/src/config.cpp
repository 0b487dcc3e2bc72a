#include "agribot/config.hpp"

#include <charconv>

#include <json.hpp>

#include "file_util.hpp"

namespace agribot {

int parse_time_of_day(std::string_view s) {
  auto bad = [&] { return ConfigError("bad time of day '" + std::string(s) + "', expected HH:MM"); };
  if (s.size() != 5 || s[2] != ':') throw bad();
  int h = 0;
  int m = 0;
  if (std::from_chars(s.data(), s.data() + 2, h).ptr != s.data() + 2 ||
      std::from_chars(s.data() + 3, s.data() + 5, m).ptr != s.data() + 5) {
    throw bad();
  }
  if (h < 0 || h > 23 || m < 0 || m > 59) throw bad();
  return h * 3600 + m * 60;
}

FarmConfig parse_farm_config(std::string_view text, const std::filesystem::path& base_dir) {
  using Json = nlohmann::json;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("farm config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("farm config must be a JSON object");

  FarmConfig cfg;
  auto path_of = [&](const std::string& key) {
    if (!doc.contains(key) || !doc[key].is_string()) {
      throw ConfigError("farm config: missing or non-string '" + key + "'");
    }
    std::filesystem::path p = doc[key].get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "briefing_time") {
      if (!value.is_string()) throw ConfigError("farm config: 'briefing_time' must be \"HH:MM\"");
      cfg.briefing_time = parse_time_of_day(value.get<std::string>());
    } else if (key == "tz_offset") {
      if (!value.is_number_integer()) throw ConfigError("farm config: 'tz_offset' must be minutes");
      cfg.tz_offset_minutes = value.get<int>();
      if (cfg.tz_offset_minutes < -14 * 60 || cfg.tz_offset_minutes > 14 * 60) {
        throw ConfigError("farm config: 'tz_offset' out of range");
      }
    } else if (key == "playlist") {
      if (!value.is_array()) throw ConfigError("farm config: 'playlist' must be an array");
      for (const auto& url : value) {
        if (!url.is_string() || url.get<std::string>().empty()) {
          throw ConfigError("farm config: playlist entries must be non-empty strings");
        }
        cfg.playlist.push_back(url.get<std::string>());
      }
    } else if (key != "ruleset" && key != "registry" && key != "simconfig") {
      throw ConfigError("farm config: unknown key '" + key + "'");
    }
  }
  cfg.ruleset_path = path_of("ruleset");
  cfg.registry_path = path_of("registry");
  cfg.sim_config_path = path_of("simconfig");
  return cfg;
}

FarmConfig load_farm_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_farm_config(text, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

LoadedConfig load_config(const std::filesystem::path& farm_config_path) {
  LoadedConfig out;
  out.farm = load_farm_config(farm_config_path);
  auto wrap = [](const std::filesystem::path& p, auto&& load) {
    try {
      return load();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(p.string() + ": " + e.what());
    }
  };
  out.sim = wrap(out.farm.sim_config_path, [&] { return load_sim_config(out.farm.sim_config_path); });
  out.ruleset = wrap(out.farm.ruleset_path, [&] { return load_ruleset(out.farm.ruleset_path); });
  out.registry = wrap(out.farm.registry_path, [&] { return load_registry(out.farm.registry_path); });
  if (out.registry.empty()) {
    throw ConfigError(out.farm.registry_path.string() + ": intent registry is empty");
  }
  return out;
}

}  // namespace agribot
