#include "agribot/wire.hpp"

#include <array>
#include <initializer_list>
#include <utility>

#include <json.hpp>

namespace agribot {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;
using Code = ProtocolError::Code;

constexpr std::array<std::pair<MenuAction, std::string_view>, 9> kActionNames{{
    {MenuAction::TOGGLE_SESSION, "TOGGLE_SESSION"},
    {MenuAction::SHOW_MAIN, "SHOW_MAIN"},
    {MenuAction::SHOW_DRIP, "SHOW_DRIP"},
    {MenuAction::SHOW_MIST, "SHOW_MIST"},
    {MenuAction::SHOW_MONITOR, "SHOW_MONITOR"},
    {MenuAction::DRIP_ON, "DRIP_ON"},
    {MenuAction::DRIP_OFF, "DRIP_OFF"},
    {MenuAction::MIST_ON, "MIST_ON"},
    {MenuAction::MIST_OFF, "MIST_OFF"},
}};

std::string_view strip_line_end(std::string_view raw) {
  if (!raw.empty() && raw.back() == '\n') raw.remove_suffix(1);
  if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
  return raw;
}

Json parse_object(std::string_view raw) {
  raw = strip_line_end(raw);
  if (raw.find('\n') != std::string_view::npos) {
    throw ProtocolError(Code::MalformedFrame, "", "frame spans multiple lines");
  }
  Json j;
  try {
    j = Json::parse(raw);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(Code::MalformedFrame, "", e.what());
  }
  if (!j.is_object()) {
    throw ProtocolError(Code::MalformedFrame, "", "frame is not a JSON object");
  }
  return j;
}

const Json& require(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ProtocolError(Code::MissingField, key, "required field absent");
  }
  return *it;
}

std::string require_string(const Json& obj, const char* key) {
  const Json& v = require(obj, key);
  if (!v.is_string()) {
    throw ProtocolError(Code::MalformedFrame, key, "expected a string");
  }
  return v.get<std::string>();
}

void reject_extra_keys(const Json& obj, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) {
      throw ProtocolError(Code::MalformedFrame, key, "unexpected field");
    }
  }
}

std::string dump(const OrderedJson& j) {
  try {
    return j.dump();
  } catch (const OrderedJson::type_error& e) {
    // Invalid UTF-8 in a string payload.
    throw ProtocolError(Code::InvariantViolation, "", e.what());
  }
}

}  // namespace

std::string_view to_string(MenuAction action) {
  for (const auto& [a, name] : kActionNames) {
    if (a == action) return name;
  }
  return "?";
}

std::optional<MenuAction> parse_menu_action(std::string_view name) {
  for (const auto& [a, n] : kActionNames) {
    if (n == name) return a;
  }
  return std::nullopt;
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::TEXT: return "text";
    case MessageKind::VIDEO: return "video";
    case MessageKind::CARD: return "card";
  }
  return "?";
}

std::string_view to_string(ProtocolError::Code code) {
  switch (code) {
    case Code::MalformedFrame: return "MalformedFrame";
    case Code::UnknownEventType: return "UnknownEventType";
    case Code::UnknownAction: return "UnknownAction";
    case Code::MissingField: return "MissingField";
    case Code::InvariantViolation: return "InvariantViolation";
  }
  return "?";
}

ProtocolError::ProtocolError(Code code, std::string field, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) +
                         (field.empty() ? std::string() : " (" + field + ")") + ": " +
                         detail),
      code_(code),
      field_(std::move(field)) {}

InboundEvent InboundEvent::message(std::string event_id, std::string user_id,
                                   std::int64_t ts, std::string text) {
  return {std::move(event_id), std::move(user_id), ts, std::move(text)};
}

InboundEvent InboundEvent::postback(std::string event_id, std::string user_id,
                                    std::int64_t ts, MenuAction action) {
  return {std::move(event_id), std::move(user_id), ts, action};
}

OutboundMessage OutboundMessage::text(std::string user_id, std::string text) {
  return {std::move(user_id), TextContent{std::move(text)}};
}

OutboundMessage OutboundMessage::video(std::string user_id, std::string url) {
  return {std::move(user_id), VideoContent{std::move(url)}};
}

OutboundMessage OutboundMessage::card(std::string user_id, std::string title,
                                      std::vector<CardField> fields) {
  return {std::move(user_id), CardContent{std::move(title), std::move(fields)}};
}

InboundEvent decode_event(std::string_view raw) {
  const Json j = parse_object(raw);
  const std::string type = require_string(j, "type");
  if (type != "message" && type != "postback") {
    throw ProtocolError(Code::UnknownEventType, "type", "'" + type + "'");
  }
  const bool is_text = type == "message";
  reject_extra_keys(j, {"type", "event_id", "user_id", "ts", is_text ? "text" : "action"});

  InboundEvent ev;
  ev.event_id = require_string(j, "event_id");
  ev.user_id = require_string(j, "user_id");
  const Json& ts = require(j, "ts");
  if (!ts.is_number_integer()) {
    throw ProtocolError(Code::MalformedFrame, "ts", "expected an integer");
  }
  ev.ts = ts.get<std::int64_t>();

  if (is_text) {
    ev.payload = require_string(j, "text");
  } else {
    const std::string name = require_string(j, "action");
    auto action = parse_menu_action(name);
    if (!action) {
      throw ProtocolError(Code::UnknownAction, "action", "'" + name + "'");
    }
    ev.payload = *action;
  }
  return ev;
}

std::string encode_event(const InboundEvent& event) {
  OrderedJson j;
  j["type"] = event.kind() == EventKind::TEXT ? "message" : "postback";
  j["event_id"] = event.event_id;
  j["user_id"] = event.user_id;
  j["ts"] = event.ts;
  if (event.kind() == EventKind::TEXT) {
    j["text"] = event.text();
  } else {
    j["action"] = std::string(to_string(event.action()));
  }
  return dump(j);
}

void validate(const OutboundMessage& msg) {
  if (const auto* video = std::get_if<VideoContent>(&msg.content)) {
    if (video->url.empty()) {
      throw ProtocolError(Code::InvariantViolation, "url", "video needs a non-empty url");
    }
  } else if (const auto* card = std::get_if<CardContent>(&msg.content)) {
    if (card->fields.empty()) {
      throw ProtocolError(Code::InvariantViolation, "card",
                          "card needs at least one field");
    }
  }
}

std::string encode_message(const OutboundMessage& msg) {
  validate(msg);
  OrderedJson j;
  j["type"] = std::string(to_string(msg.kind()));
  j["user_id"] = msg.user_id;
  switch (msg.kind()) {
    case MessageKind::TEXT:
      j["text"] = msg.as_text().text;
      break;
    case MessageKind::VIDEO:
      j["url"] = msg.as_video().url;
      break;
    case MessageKind::CARD: {
      const auto& card = msg.as_card();
      OrderedJson fields = OrderedJson::array();
      for (const auto& f : card.fields) {
        OrderedJson field;
        field["label"] = f.label;
        field["value"] = f.value;
        fields.push_back(std::move(field));
      }
      OrderedJson c;
      c["title"] = card.title;
      c["fields"] = std::move(fields);
      j["card"] = std::move(c);
      break;
    }
  }
  return dump(j);
}

OutboundMessage decode_message(std::string_view raw) {
  const Json j = parse_object(raw);
  const std::string type = require_string(j, "type");
  OutboundMessage msg;
  if (type == "text") {
    reject_extra_keys(j, {"type", "user_id", "text"});
    msg.content = TextContent{require_string(j, "text")};
  } else if (type == "video") {
    reject_extra_keys(j, {"type", "user_id", "url"});
    msg.content = VideoContent{require_string(j, "url")};
  } else if (type == "card") {
    reject_extra_keys(j, {"type", "user_id", "card"});
    const Json& c = require(j, "card");
    if (!c.is_object()) throw ProtocolError(Code::MalformedFrame, "card", "expected an object");
    CardContent card;
    card.title = require_string(c, "title");
    const Json& fields = require(c, "fields");
    if (!fields.is_array()) {
      throw ProtocolError(Code::MalformedFrame, "fields", "expected an array");
    }
    for (const Json& f : fields) {
      if (!f.is_object()) throw ProtocolError(Code::MalformedFrame, "fields", "expected objects");
      card.fields.push_back({require_string(f, "label"), require_string(f, "value")});
    }
    msg.content = std::move(card);
  } else {
    throw ProtocolError(Code::UnknownEventType, "type", "'" + type + "'");
  }
  msg.user_id = require_string(j, "user_id");
  validate(msg);
  return msg;
}

}  // namespace agribot
