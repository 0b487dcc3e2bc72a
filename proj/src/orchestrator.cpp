#include "agribot/orchestrator.hpp"

#include <chrono>
#include <cstdio>

#include <json.hpp>

#include "agribot/store.hpp"

namespace agribot {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string format_light(double lux) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f lux", lux);
  return buf;
}

std::string iso_date(std::int64_t days_since_epoch) {
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{days_since_epoch}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string quoted_list(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += "\"" + items[i] + "\"";
  }
  return out;
}

std::vector<std::string> first_phrases(const IntentRegistry& registry) {
  std::vector<std::string> out;
  for (const auto& intent : registry.intents()) out.push_back(intent.training_phrases.front());
  return out;
}

}  // namespace

std::string_view to_string(Page page) {
  switch (page) {
    case Page::MAIN: return "MAIN";
    case Page::DRIP: return "DRIP";
    case Page::MIST: return "MIST";
    case Page::MONITOR: return "MONITOR";
  }
  return "?";
}

std::string_view to_string(Irrigation target) {
  return target == Irrigation::DRIP ? "DRIP" : "MIST";
}

Orchestrator::Orchestrator(OrchestratorSettings settings, SimConfig sim, std::vector<Rule> rules,
                           IntentRegistry registry, Store* store)
    : settings_(std::move(settings)),
      sim_(sim),
      rules_(std::move(rules)),
      registry_(std::move(registry)),
      store_(store) {
  clock_.now = settings_.start_ts;
  clock_.tick_index = 0;
  clock_.briefing_time = settings_.briefing_time;
  clock_.tz_offset_minutes = settings_.tz_offset_minutes;

  sim_.start_time_of_day =
      settings_.start_ts + settings_.tz_offset_minutes * 60 -
      floor_div(settings_.start_ts + settings_.tz_offset_minutes * 60, kSecondsPerDay) *
          kSecondsPerDay;
  validate(sim_);
  for (const auto& rule : rules_) validate(rule);

  field_ = initial_state(sim_);
  latest_ = read_sensors(field_, clock_.now);
  for (const auto& rule : rules_) rule_state_[rule.id] = {};
}

std::int64_t Orchestrator::local_day(std::int64_t ts) const {
  return floor_div(ts + clock_.tz_offset_minutes * 60, kSecondsPerDay);
}

std::int64_t Orchestrator::briefing_day(std::int64_t ts) const {
  return floor_div(ts + clock_.tz_offset_minutes * 60 - clock_.briefing_time, kSecondsPerDay);
}

std::int64_t Orchestrator::day_index() const {
  return local_day(clock_.now) - local_day(settings_.start_ts);
}

void Orchestrator::warn(std::string message) { warnings_.push_back(std::move(message)); }

const Session* Orchestrator::session(const std::string& user_id) const {
  auto it = sessions_.find(user_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

bool Orchestrator::is_active(const std::string& user_id) const {
  const Session* s = session(user_id);
  return s != nullptr && s->active;
}

std::vector<std::string> Orchestrator::active_users() const {
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) {
    if (s.active) out.push_back(id);
  }
  return out;
}

Session& Orchestrator::touch_session(const std::string& user_id) {
  auto [it, inserted] = sessions_.try_emplace(user_id);
  if (inserted) it->second.user_id = user_id;
  return it->second;
}

void Orchestrator::persist(const Session& s) {
  if (store_ == nullptr) return;
  nlohmann::ordered_json j;
  j["user_id"] = s.user_id;
  j["active"] = s.active;
  j["started_at"] = s.started_at;
  j["last_page"] = std::string(to_string(s.last_page));
  store_->append(Stream::SESSIONS, clock_.now, j.dump());
}

void Orchestrator::set_page(Session& s, Page page) {
  if (s.last_page == page) return;
  s.last_page = page;
  persist(s);
}

ToggleResult Orchestrator::toggle_session(const std::string& user_id) {
  Session& s = touch_session(user_id);
  ToggleResult result;
  if (s.active) {
    s.active = false;
    persist(s);
    result.replies.push_back(OutboundMessage::text(user_id, std::string(kFarewell)));
  } else {
    s.active = true;
    s.started_at = clock_.now;
    s.last_page = Page::MAIN;
    persist(s);
    result.replies.push_back(OutboundMessage::text(user_id, std::string(kWelcome)));
    result.replies.push_back(main_card(user_id));
  }
  result.session = s;
  return result;
}

void Orchestrator::start_session_quietly(const std::string& user_id) {
  Session& s = touch_session(user_id);
  if (s.active) return;
  s.active = true;
  s.started_at = clock_.now;
  s.last_page = Page::MAIN;
  persist(s);
}

std::vector<OutboundMessage> Orchestrator::handle_event(const InboundEvent& event) {
  if (event.kind() == EventKind::POSTBACK && event.action() == MenuAction::TOGGLE_SESSION) {
    return toggle_session(event.user_id).replies;
  }
  if (!is_active(event.user_id)) {
    return {OutboundMessage::text(event.user_id, std::string(kPromptToStart))};
  }
  if (event.kind() == EventKind::POSTBACK) return handle_action(event.user_id, event.action());
  return handle_text(event.user_id, event.text());
}

OutboundMessage Orchestrator::monitor_card(const std::string& user_id) const {
  const SensorSnapshot& s = latest_;
  return OutboundMessage::card(
      user_id, "Field status",
      {{"soil_moisture", format_one_decimal(s.soil_moisture) + " %VWC"},
       {"air_temp", format_one_decimal(s.air_temp) + " °C"},
       {"rel_humidity", format_one_decimal(s.rel_humidity) + " %"},
       {"light", format_light(s.light)},
       {"drip", std::string(to_string(actuators_.drip))},
       {"mist", std::string(to_string(actuators_.mist))}});
}

OutboundMessage Orchestrator::main_card(const std::string& user_id) const {
  return OutboundMessage::card(
      user_id, "Main page",
      {{"crop", "Lettuce"},
       {"drip", std::string(to_string(actuators_.drip))},
       {"mist", std::string(to_string(actuators_.mist))},
       {"latest_advice", latest_advice_.empty() ? "No abnormal conditions" : latest_advice_},
       {"menu", "START/STOP, MAIN, DRIP, MIST, MONITOR"},
       {"ask", "Type a question, e.g. \"weather forecast\""}});
}

std::vector<OutboundMessage> Orchestrator::handle_action(const std::string& user_id,
                                                         MenuAction action) {
  if (action == MenuAction::TOGGLE_SESSION) return toggle_session(user_id).replies;
  if (!is_active(user_id)) {
    return {OutboundMessage::text(user_id, std::string(kPromptToStart))};
  }
  Session& s = sessions_.at(user_id);

  auto command_reply = [&](Irrigation target, Switch desired) {
    const CommandResult r = apply_command(user_id, target, desired);
    const std::string name = target == Irrigation::DRIP ? "Drip" : "Mist";
    const std::string state(to_string(desired));
    return std::vector<OutboundMessage>{OutboundMessage::text(
        user_id, name + " irrigation is " + (r.changed ? "now " : "already ") + state)};
  };

  switch (action) {
    case MenuAction::SHOW_MAIN:
      set_page(s, Page::MAIN);
      return {main_card(user_id)};
    case MenuAction::SHOW_MONITOR:
      set_page(s, Page::MONITOR);
      return {monitor_card(user_id)};
    case MenuAction::SHOW_DRIP:
      set_page(s, Page::DRIP);
      return {OutboundMessage::card(
          user_id, "Drip irrigation",
          {{"drip", std::string(to_string(actuators_.drip))},
           {"soil_moisture", format_one_decimal(latest_.soil_moisture) + " %VWC"},
           {"commands", "DRIP_ON, DRIP_OFF"}})};
    case MenuAction::SHOW_MIST:
      set_page(s, Page::MIST);
      return {OutboundMessage::card(
          user_id, "Mist irrigation",
          {{"mist", std::string(to_string(actuators_.mist))},
           {"air_temp", format_one_decimal(latest_.air_temp) + " °C"},
           {"rel_humidity", format_one_decimal(latest_.rel_humidity) + " %"},
           {"commands", "MIST_ON, MIST_OFF"}})};
    case MenuAction::DRIP_ON:
      set_page(s, Page::DRIP);
      return command_reply(Irrigation::DRIP, Switch::ON);
    case MenuAction::DRIP_OFF:
      set_page(s, Page::DRIP);
      return command_reply(Irrigation::DRIP, Switch::OFF);
    case MenuAction::MIST_ON:
      set_page(s, Page::MIST);
      return command_reply(Irrigation::MIST, Switch::ON);
    case MenuAction::MIST_OFF:
      set_page(s, Page::MIST);
      return command_reply(Irrigation::MIST, Switch::OFF);
    case MenuAction::TOGGLE_SESSION:
      break;
  }
  return {OutboundMessage::text(user_id, std::string(kPromptToStart))};
}

CommandResult Orchestrator::apply_command(const std::string& user_id, Irrigation target,
                                          Switch desired) {
  if (!is_active(user_id)) throw SessionInactive(user_id);
  Switch& sw = target == Irrigation::DRIP ? actuators_.drip : actuators_.mist;
  const bool changed = sw != desired;
  sw = desired;

  AuditEntry entry{user_id, clock_.now, target, desired, changed};
  audit_.push_back(entry);
  if (store_ != nullptr) {
    nlohmann::ordered_json j;
    j["user_id"] = entry.user_id;
    j["ts"] = entry.ts;
    j["target"] = std::string(to_string(entry.target));
    j["desired"] = std::string(to_string(entry.desired));
    j["changed"] = entry.changed;
    store_->append(Stream::AUDIT, entry.ts, j.dump());
  }
  return {actuators_, changed};
}

std::vector<OutboundMessage> Orchestrator::handle_text(const std::string& user_id,
                                                       const std::string& text) {
  MatchResult result;
  try {
    result = match_intent(text, registry_);
  } catch (const IntentError& e) {
    if (e.code() != IntentError::Code::EmptyUtterance) throw;
    result = MatchResult{};
  }
  return answer_intent(user_id, result);
}

std::string Orchestrator::forecast_text() const {
  const std::int64_t today = day_index();
  const std::int64_t first_date = local_day(clock_.now);
  std::string out = "7-day weather forecast:";
  for (std::int64_t i = 0; i < 7; ++i) {
    const Forecast f = weather_forecast(sim_, today + i);
    out += "\n" + iso_date(first_date + i) + ": " + format_one_decimal(f.min_temp) + "-" +
           format_one_decimal(f.max_temp) + " °C, rain " + std::to_string(f.rain_chance) +
           "%";
  }
  return out;
}

std::vector<OutboundMessage> Orchestrator::answer_intent(const std::string& user_id,
                                                         const MatchResult& result) {
  switch (result.outcome) {
    case MatchOutcome::MATCHED: {
      const Intent* intent = registry_.find(result.intent);
      if (intent == nullptr) break;
      switch (intent->handler) {
        case IntentHandler::WEATHER_FORECAST:
          return {OutboundMessage::text(user_id, forecast_text())};
        case IntentHandler::FIELD_STATUS:
          return {monitor_card(user_id)};
        case IntentHandler::HELP:
          return {OutboundMessage::text(
              user_id, "Menu: START/STOP, MAIN, DRIP, MIST, MONITOR.\nYou can ask: " +
                           quoted_list(first_phrases(registry_), ", ") + ".")};
        case IntentHandler::CROP_KNOWLEDGE:
          if (settings_.playlist.empty()) {
            return {OutboundMessage::text(user_id, "No knowledge video is available today.")};
          }
          return {OutboundMessage::video(
              user_id,
              settings_.playlist[static_cast<std::size_t>(day_index()) % settings_.playlist.size()])};
      }
      break;
    }
    case MatchOutcome::SUGGEST: {
      std::vector<std::string> phrases;
      for (const auto& s : result.suggestions) phrases.push_back(s.phrase);
      return {OutboundMessage::text(user_id, "Did you mean: " + quoted_list(phrases, " or ") + "?")};
    }
    case MatchOutcome::NO_MATCH:
      break;
  }
  return {OutboundMessage::text(user_id, "Sorry, I don't know that keyword. Try: " +
                                             quoted_list(first_phrases(registry_), ", ") + ".")};
}

std::vector<OutboundMessage> Orchestrator::morning_briefing(const std::string& user_id) {
  if (!is_active(user_id)) throw SessionInactive(user_id);
  std::vector<OutboundMessage> out;
  if (settings_.playlist.empty()) {
    warn("knowledge playlist is empty; briefing for '" + user_id + "' has no video");
  } else {
    out.push_back(OutboundMessage::video(
        user_id,
        settings_.playlist[static_cast<std::size_t>(day_index()) % settings_.playlist.size()]));
  }
  OutboundMessage card = monitor_card(user_id);
  std::get<CardContent>(card.content).title = "Good morning! Field status";
  out.push_back(std::move(card));
  return out;
}

TickReport Orchestrator::tick() {
  const std::int64_t previous = clock_.now;
  ++clock_.tick_index;
  clock_.now += sim_.tick_seconds;

  TickReport report;
  field_ = step(field_, actuators_, sim_);
  latest_ = read_sensors(field_, clock_.now);
  report.snapshot = latest_;

  if (store_ != nullptr) {
    try {
      store_->append(Stream::TELEMETRY, latest_.ts, encode_snapshot(latest_));
    } catch (const std::exception& e) {
      warn(std::string("telemetry append failed: ") + e.what());
    }
  }

  try {
    EvaluationResult eval = evaluate(latest_, rules_, rule_state_);
    rule_state_ = std::move(eval.state);
    report.recommendations = std::move(eval.recommendations);
  } catch (const std::exception& e) {
    warn(std::string("rule evaluation failed: ") + e.what());
  }

  const std::vector<std::string> users = active_users();
  if (!report.recommendations.empty()) {
    latest_advice_ = report.recommendations.back().message;
    for (const auto& user : users) {
      Delivery d{user, {}};
      for (const auto& rec : report.recommendations) {
        std::string text = rec.message;
        if (rec.advised_action) text += " Suggested action: " + std::string(to_string(*rec.advised_action));
        d.messages.push_back(OutboundMessage::text(user, std::move(text)));
      }
      report.deliveries.push_back(std::move(d));
    }
  }

  if (briefing_day(clock_.now) > briefing_day(previous)) {
    report.briefing = true;
    for (const auto& user : users) {
      report.deliveries.push_back({user, morning_briefing(user)});
    }
  }
  return report;
}

}  // namespace agribot
