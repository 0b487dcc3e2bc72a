#include "agribot/gateway.hpp"

#include "agribot/store.hpp"

namespace agribot {

Gateway::Gateway(Orchestrator& orchestrator, Store* store)
    : orchestrator_(orchestrator), store_(store) {}

void Gateway::record(const OutboundMessage& msg) {
  std::string frame = encode_message(msg);
  if (store_ != nullptr) store_->append(Stream::TRANSCRIPT, orchestrator_.clock().now, frame);
  transcript_.push_back(std::move(frame));
}

std::vector<OutboundMessage> Gateway::route_event(const InboundEvent& event) {
  std::lock_guard lock(mu_);
  known_.insert(event.user_id);

  std::vector<OutboundMessage> replies;
  try {
    replies = orchestrator_.handle_event(event);
  } catch (const std::exception& e) {
    errors_.push_back("event " + event.event_id + " from " + event.user_id + ": " + e.what());
    replies = {OutboundMessage::text(event.user_id, std::string(kApology))};
  }
  if (!orchestrator_.is_active(event.user_id)) {
    // Stopping a session drops whatever was waiting for it.
    auto it = mailboxes_.find(event.user_id);
    if (it != mailboxes_.end()) it->second.pending.clear();
  }
  for (const auto& msg : replies) record(msg);
  return replies;
}

PushReceipt Gateway::push(const std::string& user_id, std::vector<OutboundMessage> messages) {
  std::lock_guard lock(mu_);
  return push_locked(user_id, std::move(messages));
}

PushReceipt Gateway::push_locked(const std::string& user_id,
                                 std::vector<OutboundMessage> messages) {
  if (messages.empty()) throw std::invalid_argument("push needs at least one message");
  if (!known_.contains(user_id)) throw UnknownUser(user_id);
  for (const auto& msg : messages) validate(msg);

  Mailbox& box = mailboxes_[user_id];
  PushReceipt receipt;
  for (auto& msg : messages) {
    record(msg);
    if (box.live) {
      box.live(msg);
      ++receipt.delivered;
    } else {
      box.pending.push_back(std::move(msg));
      ++receipt.queued;
    }
  }
  return receipt;
}

TickReport Gateway::advance() {
  std::lock_guard lock(mu_);
  TickReport report = orchestrator_.tick();
  for (const auto& d : report.deliveries) {
    try {
      push_locked(d.user_id, d.messages);
    } catch (const std::exception& e) {
      errors_.push_back("push to " + d.user_id + " at tick " +
                        std::to_string(orchestrator_.clock().tick_index) + ": " + e.what());
    }
  }
  return report;
}

void Gateway::allow(const std::string& user_id) {
  std::lock_guard lock(mu_);
  known_.insert(user_id);
}

std::size_t Gateway::connect(const std::string& user_id, DeliveryFn deliver) {
  std::lock_guard lock(mu_);
  Mailbox& box = mailboxes_[user_id];
  box.live = std::move(deliver);
  const std::size_t flushed = box.pending.size();
  for (const auto& msg : box.pending) box.live(msg);
  box.pending.clear();
  return flushed;
}

void Gateway::disconnect(const std::string& user_id) {
  std::lock_guard lock(mu_);
  auto it = mailboxes_.find(user_id);
  if (it != mailboxes_.end()) it->second.live = nullptr;
}

std::vector<OutboundMessage> Gateway::poll(const std::string& user_id) {
  std::lock_guard lock(mu_);
  auto it = mailboxes_.find(user_id);
  if (it == mailboxes_.end()) return {};
  return std::exchange(it->second.pending, {});
}

std::size_t Gateway::queued(const std::string& user_id) const {
  std::lock_guard lock(mu_);
  auto it = mailboxes_.find(user_id);
  return it == mailboxes_.end() ? 0 : it->second.pending.size();
}

std::vector<std::string> Gateway::transcript() const {
  std::lock_guard lock(mu_);
  return transcript_;
}

std::vector<std::string> Gateway::errors() const {
  std::lock_guard lock(mu_);
  return errors_;
}

}  // namespace agribot
