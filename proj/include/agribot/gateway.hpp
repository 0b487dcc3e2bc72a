#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agribot/orchestrator.hpp"
#include "agribot/wire.hpp"

namespace agribot {

class Store;

struct PushReceipt {
  std::size_t delivered = 0;
  std::size_t queued = 0;
  friend bool operator==(const PushReceipt&, const PushReceipt&) = default;
};

class UnknownUser : public std::runtime_error {
 public:
  explicit UnknownUser(const std::string& user_id)
      : std::runtime_error("unknown user '" + user_id + "'") {}
};

inline constexpr std::string_view kApology =
    "Sorry, something went wrong while handling your request. Please try again.";

// Routes inbound chat events to the orchestrator and pushes outbound messages.
//
// Every outbound message, reply or push, is appended to the transcript in the
// order it was produced. All public calls are serialized on one mutex, which
// also keeps inbound events from interleaving with a tick.
class Gateway {
 public:
  // Called with the gateway lock held; must not call back into the gateway.
  using DeliveryFn = std::function<void(const OutboundMessage&)>;

  explicit Gateway(Orchestrator& orchestrator, Store* store = nullptr);

  // Reply batch for one event; orchestrator failures become an apology reply.
  std::vector<OutboundMessage> route_event(const InboundEvent& event);

  // Throws std::invalid_argument on an empty batch and UnknownUser for a user
  // that never sent an event and is not on the allowlist.
  PushReceipt push(const std::string& user_id, std::vector<OutboundMessage> messages);

  // Runs one orchestrator tick and pushes what it produced.
  TickReport advance();

  void allow(const std::string& user_id);

  // Registers a live channel and flushes anything queued through it.
  std::size_t connect(const std::string& user_id, DeliveryFn deliver);
  void disconnect(const std::string& user_id);

  // Drains queued messages for a user without a live channel.
  std::vector<OutboundMessage> poll(const std::string& user_id);
  std::size_t queued(const std::string& user_id) const;

  std::vector<std::string> transcript() const;  // encoded frames
  std::vector<std::string> errors() const;

  // Runs `f(const Orchestrator&)` under the gateway lock.
  template <typename F>
  auto inspect(F&& f) const {
    std::lock_guard lock(mu_);
    return f(static_cast<const Orchestrator&>(orchestrator_));
  }

 private:
  struct Mailbox {
    DeliveryFn live;
    std::vector<OutboundMessage> pending;
  };

  PushReceipt push_locked(const std::string& user_id, std::vector<OutboundMessage> messages);
  void record(const OutboundMessage& msg);

  Orchestrator& orchestrator_;
  Store* store_;
  mutable std::mutex mu_;
  std::set<std::string> known_;
  std::map<std::string, Mailbox> mailboxes_;
  std::vector<std::string> transcript_;
  std::vector<std::string> errors_;
};

}  // namespace agribot
