#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agribot/field_sim.hpp"
#include "agribot/intent.hpp"
#include "agribot/recommend.hpp"

namespace agribot {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Farm config file:
//   {"briefing_time":"06:00","tz_offset":420,"playlist":[URL...],
//    "ruleset":PATH,"registry":PATH,"simconfig":PATH}
// Relative paths resolve against the config file's directory.
struct FarmConfig {
  int briefing_time = 6 * 3600;  // seconds after local midnight
  int tz_offset_minutes = 0;
  std::vector<std::string> playlist;
  std::filesystem::path ruleset_path;
  std::filesystem::path registry_path;
  std::filesystem::path sim_config_path;
};

// "HH:MM" -> seconds after midnight.
int parse_time_of_day(std::string_view hhmm);

FarmConfig parse_farm_config(std::string_view json_text, const std::filesystem::path& base_dir);
FarmConfig load_farm_config(const std::filesystem::path& path);

// Everything the orchestrator needs, loaded from one farm config file.
struct LoadedConfig {
  FarmConfig farm;
  SimConfig sim;
  RuleSet ruleset;
  IntentRegistry registry;
};

// Any failure is rethrown as ConfigError naming the offending path.
LoadedConfig load_config(const std::filesystem::path& farm_config_path);

}  // namespace agribot
