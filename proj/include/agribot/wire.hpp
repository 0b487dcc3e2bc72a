#pragma once

// Chat wire protocol: one canonical JSON frame per line.
//
//   inbound : {"type":"message"|"postback","event_id":S,"user_id":S,"ts":N,("text":S|"action":S)}
//   outbound: {"type":"text"|"video"|"card","user_id":S,("text":S|"url":S|"card":{...})}
//
// Key order is fixed and no whitespace is emitted, so transcripts can be
// compared byte for byte.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace agribot {

enum class MenuAction {
  TOGGLE_SESSION,
  SHOW_MAIN,
  SHOW_DRIP,
  SHOW_MIST,
  SHOW_MONITOR,
  DRIP_ON,
  DRIP_OFF,
  MIST_ON,
  MIST_OFF,
};

inline constexpr MenuAction kAllMenuActions[] = {
    MenuAction::TOGGLE_SESSION, MenuAction::SHOW_MAIN, MenuAction::SHOW_DRIP,
    MenuAction::SHOW_MIST,      MenuAction::SHOW_MONITOR, MenuAction::DRIP_ON,
    MenuAction::DRIP_OFF,       MenuAction::MIST_ON,   MenuAction::MIST_OFF,
};

std::string_view to_string(MenuAction action);
std::optional<MenuAction> parse_menu_action(std::string_view name);

enum class EventKind { TEXT, POSTBACK };

struct InboundEvent {
  std::string event_id;
  std::string user_id;
  std::int64_t ts = 0;
  // Free text for TEXT events, the tapped menu action for POSTBACK events.
  std::variant<std::string, MenuAction> payload;

  EventKind kind() const {
    return std::holds_alternative<std::string>(payload) ? EventKind::TEXT
                                                         : EventKind::POSTBACK;
  }
  const std::string& text() const { return std::get<std::string>(payload); }
  MenuAction action() const { return std::get<MenuAction>(payload); }

  static InboundEvent message(std::string event_id, std::string user_id,
                              std::int64_t ts, std::string text);
  static InboundEvent postback(std::string event_id, std::string user_id,
                               std::int64_t ts, MenuAction action);

  friend bool operator==(const InboundEvent&, const InboundEvent&) = default;
};

enum class MessageKind { TEXT, VIDEO, CARD };

struct TextContent {
  std::string text;
  friend bool operator==(const TextContent&, const TextContent&) = default;
};

struct VideoContent {
  std::string url;
  friend bool operator==(const VideoContent&, const VideoContent&) = default;
};

struct CardField {
  std::string label;
  std::string value;
  friend bool operator==(const CardField&, const CardField&) = default;
};

struct CardContent {
  std::string title;
  std::vector<CardField> fields;
  friend bool operator==(const CardContent&, const CardContent&) = default;
};

struct OutboundMessage {
  std::string user_id;
  std::variant<TextContent, VideoContent, CardContent> content;

  MessageKind kind() const { return static_cast<MessageKind>(content.index()); }
  const TextContent& as_text() const { return std::get<TextContent>(content); }
  const VideoContent& as_video() const { return std::get<VideoContent>(content); }
  const CardContent& as_card() const { return std::get<CardContent>(content); }

  static OutboundMessage text(std::string user_id, std::string text);
  static OutboundMessage video(std::string user_id, std::string url);
  static OutboundMessage card(std::string user_id, std::string title,
                              std::vector<CardField> fields);

  friend bool operator==(const OutboundMessage&, const OutboundMessage&) = default;
};

std::string_view to_string(MessageKind kind);

class ProtocolError : public std::runtime_error {
 public:
  enum class Code {
    MalformedFrame,
    UnknownEventType,
    UnknownAction,
    MissingField,
    InvariantViolation,
  };

  ProtocolError(Code code, std::string field, const std::string& detail);

  Code code() const noexcept { return code_; }
  // Name of the offending field; empty when the frame as a whole is bad.
  const std::string& field() const noexcept { return field_; }

 private:
  Code code_;
  std::string field_;
};

std::string_view to_string(ProtocolError::Code code);

// Accepts a single frame, optionally terminated by one newline.
InboundEvent decode_event(std::string_view raw);
std::string encode_event(const InboundEvent& event);

std::string encode_message(const OutboundMessage& msg);
OutboundMessage decode_message(std::string_view raw);

// Throws ProtocolError(InvariantViolation) when the payload breaks its kind's rules.
void validate(const OutboundMessage& msg);

}  // namespace agribot
