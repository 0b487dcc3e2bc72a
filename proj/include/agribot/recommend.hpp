#pragma once

// Threshold rules over sensor telemetry for the five cultivation processes.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agribot/wire.hpp"

namespace agribot {

struct SensorSnapshot {
  std::int64_t ts = 0;
  double air_temp = 0;       // deg C
  double rel_humidity = 0;   // %, 0..100
  double soil_moisture = 0;  // %VWC, 0..100
  double light = 0;          // lux

  // Value of a field by its wire name, or nullopt for an unknown name.
  std::optional<double> field(std::string_view name) const;

  friend bool operator==(const SensorSnapshot&, const SensorSnapshot&) = default;
};

inline constexpr std::string_view kSensorFields[] = {"air_temp", "rel_humidity",
                                                     "soil_moisture", "light"};

bool is_sensor_field(std::string_view name);

// Throws std::invalid_argument naming the first field that breaks the ranges.
void validate(const SensorSnapshot& snapshot);

// {"ts":N,"air_temp":x,"rel_humidity":x,"soil_moisture":x,"light":x}
std::string encode_snapshot(const SensorSnapshot& snapshot);
SensorSnapshot decode_snapshot(std::string_view frame);

enum class Process {
  IRRIGATION,
  FERTILIZATION,
  DISEASE_CONTROL,
  INSECT_PEST_CONTROL,
  WEED_CONTROL,
};

inline constexpr Process kAllProcesses[] = {Process::IRRIGATION, Process::FERTILIZATION,
                                            Process::DISEASE_CONTROL,
                                            Process::INSECT_PEST_CONTROL,
                                            Process::WEED_CONTROL};

std::string_view to_string(Process process);
std::optional<Process> parse_process(std::string_view name);

enum class Comparator { LT, GT };

struct Rule {
  std::string id;
  Process process = Process::IRRIGATION;
  std::string field;
  Comparator comparator = Comparator::LT;
  double threshold = 0;
  int sustain_ticks = 1;
  int cooldown_ticks = 0;
  std::string message_template;  // {value} and {threshold} placeholders
  std::optional<MenuAction> advised_action;

  bool holds(double value) const {
    return comparator == Comparator::LT ? value < threshold : value > threshold;
  }
};

struct Recommendation {
  std::string rule_id;
  std::int64_t ts = 0;
  std::string message;
  std::optional<MenuAction> advised_action;
  Process process = Process::IRRIGATION;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct RuleCounters {
  int streak = 0;    // consecutive evaluations with the predicate true
  int cooldown = 0;  // evaluations left before the rule may fire again

  friend bool operator==(const RuleCounters&, const RuleCounters&) = default;
};

using RuleState = std::map<std::string, RuleCounters>;

class RuleError : public std::runtime_error {
 public:
  enum class Code { UnknownField, TemplateError, ParseError, ValidationError };

  RuleError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct EvaluationResult {
  std::vector<Recommendation> recommendations;  // ordered by rule id
  RuleState state;
};

// Rules missing from `state` start from zeroed counters. A rule fires when its
// predicate has held for sustain_ticks consecutive evaluations and its cooldown
// is 0; firing resets the streak and arms the cooldown. An armed cooldown
// decrements by one per evaluation instead of firing.
EvaluationResult evaluate(const SensorSnapshot& snapshot, const std::vector<Rule>& rules,
                          RuleState state);

// `{value}` is the observed field value, `{threshold}` the rule threshold, both
// with one decimal place.
std::string render_message(const Rule& rule, const SensorSnapshot& snapshot);

// Throws RuleError(TemplateError) for an unknown or unterminated placeholder.
void check_template(std::string_view message_template);

// Throws RuleError(ValidationError) naming the rule id.
void validate(const Rule& rule);

struct RuleSet {
  std::vector<Rule> rules;
  std::vector<std::string> warnings;
};

// Ruleset file: [{"id":S,"process":S,"field":S,"cmp":"lt"|"gt","threshold":N,
//   "sustain_ticks":N,"cooldown_ticks":N,"message":S,"advised_action":S|null}...]
RuleSet parse_ruleset(std::string_view json_text);
RuleSet load_ruleset(const std::filesystem::path& path);

// printf("%.1f") with negative zero printed as 0.0.
std::string format_one_decimal(double value);

}  // namespace agribot
