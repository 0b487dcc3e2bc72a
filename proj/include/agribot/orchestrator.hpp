#pragma once

// Sessions, the simulate -> evaluate -> push tick loop, irrigation commands,
// the morning briefing and answers to matched intents.
//
// Not internally synchronized: the gateway serializes inbound events with
// tick() so an event is always handled between two ticks.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agribot/field_sim.hpp"
#include "agribot/intent.hpp"
#include "agribot/recommend.hpp"
#include "agribot/wire.hpp"

namespace agribot {

class Store;

enum class Page { MAIN, DRIP, MIST, MONITOR };
std::string_view to_string(Page page);

struct Session {
  std::string user_id;
  bool active = false;
  std::int64_t started_at = 0;
  Page last_page = Page::MAIN;
  friend bool operator==(const Session&, const Session&) = default;
};

struct Clock {
  std::int64_t now = 0;  // unix seconds
  std::int64_t tick_index = 0;
  int briefing_time = 6 * 3600;  // local seconds after midnight
  int tz_offset_minutes = 0;
};

enum class Irrigation { DRIP, MIST };
std::string_view to_string(Irrigation target);

struct AuditEntry {
  std::string user_id;
  std::int64_t ts = 0;
  Irrigation target = Irrigation::DRIP;
  Switch desired = Switch::OFF;
  bool changed = false;
};

struct CommandResult {
  ActuatorState state;
  bool changed = false;
};

class SessionInactive : public std::runtime_error {
 public:
  explicit SessionInactive(const std::string& user_id)
      : std::runtime_error("session for '" + user_id + "' is not active") {}
};

struct Delivery {
  std::string user_id;
  std::vector<OutboundMessage> messages;
};

struct TickReport {
  SensorSnapshot snapshot;
  std::vector<Recommendation> recommendations;
  std::vector<Delivery> deliveries;  // in push order
  bool briefing = false;
};

struct OrchestratorSettings {
  std::int64_t start_ts = 1700000000;
  int briefing_time = 6 * 3600;
  int tz_offset_minutes = 0;
  std::vector<std::string> playlist;
};

struct ToggleResult {
  Session session;
  std::vector<OutboundMessage> replies;
};

// Reply texts shared with tests and the gateway.
inline constexpr std::string_view kPromptToStart =
    "The farm assistant is stopped. Press START on the menu to begin.";
inline constexpr std::string_view kFarewell =
    "Farm assistant stopped. You will not receive updates until you press START again.";
inline constexpr std::string_view kWelcome =
    "Welcome to the lettuce farm assistant! Use the menu or type a question.";

class Orchestrator {
 public:
  // `store` may be null; otherwise sessions, telemetry and audit records are appended to it.
  Orchestrator(OrchestratorSettings settings, SimConfig sim, std::vector<Rule> rules,
               IntentRegistry registry, Store* store = nullptr);

  // Full dispatch of one inbound event, session gate included. Never returns an empty batch.
  std::vector<OutboundMessage> handle_event(const InboundEvent& event);

  ToggleResult toggle_session(const std::string& user_id);

  // Starts a session without welcome replies; used for pre-started replay users.
  void start_session_quietly(const std::string& user_id);

  std::vector<OutboundMessage> handle_action(const std::string& user_id, MenuAction action);

  // Throws SessionInactive. Takes effect on the next tick's simulation step.
  CommandResult apply_command(const std::string& user_id, Irrigation target, Switch desired);

  std::vector<OutboundMessage> handle_text(const std::string& user_id, const std::string& text);

  std::vector<OutboundMessage> answer_intent(const std::string& user_id, const MatchResult& result);

  // [VIDEO, CARD], or just [CARD] with an empty playlist. Throws SessionInactive.
  std::vector<OutboundMessage> morning_briefing(const std::string& user_id);

  TickReport tick();

  const Clock& clock() const noexcept { return clock_; }
  const SimConfig& sim_config() const noexcept { return sim_; }
  const FieldState& field() const noexcept { return field_; }
  const ActuatorState& actuators() const noexcept { return actuators_; }
  const SensorSnapshot& latest_snapshot() const noexcept { return latest_; }
  const RuleState& rule_state() const noexcept { return rule_state_; }
  const std::vector<AuditEntry>& audit_log() const noexcept { return audit_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const IntentRegistry& registry() const noexcept { return registry_; }

  const Session* session(const std::string& user_id) const;
  bool is_active(const std::string& user_id) const;
  std::vector<std::string> active_users() const;  // sorted by user_id

  // Local calendar days elapsed since the start of the simulation.
  std::int64_t day_index() const;

  OutboundMessage monitor_card(const std::string& user_id) const;
  OutboundMessage main_card(const std::string& user_id) const;
  std::string forecast_text() const;

 private:
  Session& touch_session(const std::string& user_id);
  void set_page(Session& session, Page page);
  void persist(const Session& session);
  void warn(std::string message);
  std::int64_t briefing_day(std::int64_t ts) const;
  std::int64_t local_day(std::int64_t ts) const;

  OrchestratorSettings settings_;
  SimConfig sim_;
  std::vector<Rule> rules_;
  IntentRegistry registry_;
  Store* store_;

  Clock clock_;
  FieldState field_;
  ActuatorState actuators_;
  SensorSnapshot latest_;
  RuleState rule_state_;
  std::string latest_advice_;
  std::map<std::string, Session> sessions_;
  std::vector<AuditEntry> audit_;
  std::vector<std::string> warnings_;
};

}  // namespace agribot
