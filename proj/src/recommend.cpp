#include "agribot/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "file_util.hpp"

namespace agribot {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

RuleError parse_error(const std::string& msg) {
  return RuleError(RuleError::Code::ParseError, msg);
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

const Json& field_of(const Json& rec, const char* key, std::size_t index) {
  auto it = rec.find(key);
  if (it == rec.end()) {
    throw parse_error("record " + std::to_string(index) + ": missing '" + key + "'");
  }
  return *it;
}

std::string string_of(const Json& rec, const char* key, std::size_t index) {
  const Json& v = field_of(rec, key, index);
  if (!v.is_string()) {
    throw parse_error("record " + std::to_string(index) + ": '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

double number_of(const Json& rec, const char* key, std::size_t index) {
  const Json& v = field_of(rec, key, index);
  if (!v.is_number()) {
    throw parse_error("record " + std::to_string(index) + ": '" + key + "' must be a number");
  }
  return v.get<double>();
}

int int_of(const Json& rec, const char* key, std::size_t index) {
  const Json& v = field_of(rec, key, index);
  if (!v.is_number_integer()) {
    throw parse_error("record " + std::to_string(index) + ": '" + key + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

std::optional<double> SensorSnapshot::field(std::string_view name) const {
  if (name == "air_temp") return air_temp;
  if (name == "rel_humidity") return rel_humidity;
  if (name == "soil_moisture") return soil_moisture;
  if (name == "light") return light;
  return std::nullopt;
}

bool is_sensor_field(std::string_view name) {
  return std::find(std::begin(kSensorFields), std::end(kSensorFields), name) !=
         std::end(kSensorFields);
}

void validate(const SensorSnapshot& s) {
  for (auto name : kSensorFields) {
    if (!std::isfinite(*s.field(name))) {
      throw std::invalid_argument(std::string(name) + " is not finite");
    }
  }
  if (s.rel_humidity < 0 || s.rel_humidity > 100) {
    throw std::invalid_argument("rel_humidity outside [0,100]");
  }
  if (s.soil_moisture < 0 || s.soil_moisture > 100) {
    throw std::invalid_argument("soil_moisture outside [0,100]");
  }
  if (s.light < 0) throw std::invalid_argument("light is negative");
}

std::string encode_snapshot(const SensorSnapshot& s) {
  OrderedJson j;
  j["ts"] = s.ts;
  j["air_temp"] = s.air_temp;
  j["rel_humidity"] = s.rel_humidity;
  j["soil_moisture"] = s.soil_moisture;
  j["light"] = s.light;
  return j.dump();
}

SensorSnapshot decode_snapshot(std::string_view frame) {
  Json j;
  try {
    j = Json::parse(frame);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("snapshot frame: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("snapshot frame is not an object");
  auto number = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
      throw std::invalid_argument(std::string("snapshot frame: missing or non-numeric '") + key +
                                  "'");
    }
    return it->get<double>();
  };
  auto ts = j.find("ts");
  if (ts == j.end() || !ts->is_number_integer()) {
    throw std::invalid_argument("snapshot frame: missing or non-integer 'ts'");
  }
  SensorSnapshot s;
  s.ts = ts->get<std::int64_t>();
  s.air_temp = number("air_temp");
  s.rel_humidity = number("rel_humidity");
  s.soil_moisture = number("soil_moisture");
  s.light = number("light");
  validate(s);
  return s;
}

std::string_view to_string(Process process) {
  switch (process) {
    case Process::IRRIGATION: return "IRRIGATION";
    case Process::FERTILIZATION: return "FERTILIZATION";
    case Process::DISEASE_CONTROL: return "DISEASE_CONTROL";
    case Process::INSECT_PEST_CONTROL: return "INSECT_PEST_CONTROL";
    case Process::WEED_CONTROL: return "WEED_CONTROL";
  }
  return "?";
}

std::optional<Process> parse_process(std::string_view name) {
  for (auto p : kAllProcesses) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::string format_one_decimal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", value);
  std::string out(buf);
  if (out == "-0.0") out = "0.0";
  return out;
}

void check_template(std::string_view tpl) {
  std::size_t pos = 0;
  while ((pos = tpl.find('{', pos)) != std::string_view::npos) {
    const auto close = tpl.find('}', pos);
    if (close == std::string_view::npos) {
      throw RuleError(RuleError::Code::TemplateError, "unterminated placeholder in template");
    }
    const auto name = tpl.substr(pos + 1, close - pos - 1);
    if (name != "value" && name != "threshold") {
      throw RuleError(RuleError::Code::TemplateError,
                      "unknown placeholder {" + std::string(name) + "}");
    }
    pos = close + 1;
  }
}

std::string render_message(const Rule& rule, const SensorSnapshot& snapshot) {
  check_template(rule.message_template);
  const auto value = snapshot.field(rule.field);
  if (!value) {
    throw RuleError(RuleError::Code::UnknownField, "unknown sensor field '" + rule.field + "'");
  }
  const std::string_view tpl = rule.message_template;
  std::string out;
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const auto open = tpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      break;
    }
    out.append(tpl.substr(pos, open - pos));
    const auto close = tpl.find('}', open);
    const auto name = tpl.substr(open + 1, close - open - 1);
    out += format_one_decimal(name == "value" ? *value : rule.threshold);
    pos = close + 1;
  }
  return out;
}

EvaluationResult evaluate(const SensorSnapshot& snapshot, const std::vector<Rule>& rules,
                          RuleState state) {
  std::vector<const Rule*> ordered;
  ordered.reserve(rules.size());
  for (const auto& r : rules) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const Rule* a, const Rule* b) { return a->id < b->id; });

  EvaluationResult result;
  for (const Rule* rule : ordered) {
    const auto value = snapshot.field(rule->field);
    if (!value) {
      throw RuleError(RuleError::Code::UnknownField,
                      "rule '" + rule->id + "' references unknown field '" + rule->field + "'");
    }
    RuleCounters& c = state[rule->id];
    c.streak = rule->holds(*value) ? c.streak + 1 : 0;
    if (c.cooldown > 0) {
      --c.cooldown;
      continue;
    }
    if (c.streak >= rule->sustain_ticks) {
      result.recommendations.push_back({rule->id, snapshot.ts, render_message(*rule, snapshot),
                                        rule->advised_action, rule->process});
      c.cooldown = rule->cooldown_ticks;
      c.streak = 0;
    }
  }
  result.state = std::move(state);
  return result;
}

void validate(const Rule& rule) {
  auto fail = [&](const std::string& msg) {
    return RuleError(RuleError::Code::ValidationError,
                     "rule '" + rule.id + "': " + msg);
  };
  if (rule.id.empty()) throw fail("empty id");
  if (!is_sensor_field(rule.field)) throw fail("unknown sensor field '" + rule.field + "'");
  if (!std::isfinite(rule.threshold)) throw fail("threshold is not finite");
  if (rule.sustain_ticks < 1) throw fail("sustain_ticks must be >= 1");
  if (rule.cooldown_ticks < 0) throw fail("cooldown_ticks must be >= 0");
  if (rule.message_template.empty()) throw fail("empty message");
  try {
    check_template(rule.message_template);
  } catch (const RuleError& e) {
    throw fail(e.what());
  }
  if (rule.advised_action) {
    switch (*rule.advised_action) {
      case MenuAction::DRIP_ON:
      case MenuAction::DRIP_OFF:
      case MenuAction::MIST_ON:
      case MenuAction::MIST_OFF:
        break;
      default:
        throw fail("advised_action must be an irrigation command");
    }
  }
}

RuleSet parse_ruleset(std::string_view text) {
  RuleSet out;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    out.warnings.push_back("ruleset is empty; no recommendations will be produced");
    return out;
  }
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw parse_error("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_array()) throw parse_error("line 1: ruleset must be a JSON array");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& rec = doc[i];
    if (!rec.is_object()) throw parse_error("record " + std::to_string(i) + ": expected an object");
    Rule rule;
    rule.id = string_of(rec, "id", i);

    const std::string process = string_of(rec, "process", i);
    const auto p = parse_process(process);
    if (!p) {
      throw RuleError(RuleError::Code::ValidationError,
                      "rule '" + rule.id + "': unknown process '" + process + "'");
    }
    rule.process = *p;
    rule.field = string_of(rec, "field", i);

    const std::string cmp = string_of(rec, "cmp", i);
    if (cmp == "lt") {
      rule.comparator = Comparator::LT;
    } else if (cmp == "gt") {
      rule.comparator = Comparator::GT;
    } else {
      throw RuleError(RuleError::Code::ValidationError,
                      "rule '" + rule.id + "': cmp must be \"lt\" or \"gt\"");
    }
    rule.threshold = number_of(rec, "threshold", i);
    rule.sustain_ticks = int_of(rec, "sustain_ticks", i);
    rule.cooldown_ticks = int_of(rec, "cooldown_ticks", i);
    rule.message_template = string_of(rec, "message", i);

    const Json& action = field_of(rec, "advised_action", i);
    if (action.is_string()) {
      rule.advised_action = parse_menu_action(action.get<std::string>());
      if (!rule.advised_action) {
        throw RuleError(RuleError::Code::ValidationError,
                        "rule '" + rule.id + "': unknown advised_action '" +
                            action.get<std::string>() + "'");
      }
    } else if (!action.is_null()) {
      throw parse_error("record " + std::to_string(i) +
                        ": 'advised_action' must be a string or null");
    }

    validate(rule);
    if (!ids.insert(rule.id).second) {
      throw RuleError(RuleError::Code::ValidationError, "rule '" + rule.id + "': duplicate id");
    }
    out.rules.push_back(std::move(rule));
  }
  if (out.rules.empty()) {
    out.warnings.push_back("ruleset is empty; no recommendations will be produced");
  }
  return out;
}

RuleSet load_ruleset(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_text_file(path);
  } catch (const std::exception& e) {
    throw parse_error(e.what());
  }
  return parse_ruleset(text);
}

}  // namespace agribot
