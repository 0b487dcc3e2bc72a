#include "agribot/gateway.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <random>

#include <gtest/gtest.h>

#include "../temp_dir.hpp"
#include "agribot/config.hpp"
#include "agribot/store.hpp"

namespace agribot {
namespace {

const LoadedConfig& defaults() {
  static const LoadedConfig cfg =
      load_config(std::filesystem::path(AGRIBOT_SOURCE_DIR) / "data" / "farm.conf");
  return cfg;
}

struct Rig {
  explicit Rig(Store* store = nullptr, SimConfig sim = defaults().sim)
      : orch(
            [] {
              OrchestratorSettings s;
              s.briefing_time = defaults().farm.briefing_time;
              s.tz_offset_minutes = defaults().farm.tz_offset_minutes;
              s.playlist = defaults().farm.playlist;
              return s;
            }(),
            sim, defaults().ruleset.rules, defaults().registry, store),
        gw(orch, store) {}

  std::vector<OutboundMessage> send(const std::string& user, MenuAction a) {
    return gw.route_event(InboundEvent::postback("e" + std::to_string(++n), user, n, a));
  }
  std::vector<OutboundMessage> say(const std::string& user, const std::string& text) {
    return gw.route_event(InboundEvent::message("e" + std::to_string(++n), user, n, text));
  }

  Orchestrator orch;
  Gateway gw;
  std::int64_t n = 0;
};

TEST(Push, UnknownUserAndEmptyBatch) {
  Rig rig;
  EXPECT_THROW(rig.gw.push("ghost", {OutboundMessage::text("ghost", "hi")}), UnknownUser);
  rig.gw.allow("u1");
  EXPECT_THROW(rig.gw.push("u1", {}), std::invalid_argument);
  EXPECT_TRUE(rig.gw.transcript().empty());
}

TEST(Push, InvalidMessageRejectedWhole) {
  Rig rig;
  rig.gw.allow("u1");
  EXPECT_THROW(rig.gw.push("u1", {OutboundMessage::text("u1", "ok"), OutboundMessage::video("u1", "")}),
               ProtocolError);
  EXPECT_EQ(rig.gw.queued("u1"), 0u);
  EXPECT_TRUE(rig.gw.transcript().empty());
}

TEST(Push, QueuedThenDeliveredOnConnect) {
  Rig rig;
  rig.send("u1", MenuAction::TOGGLE_SESSION);
  const auto r = rig.gw.push("u1", {OutboundMessage::text("u1", "a"), OutboundMessage::text("u1", "b")});
  EXPECT_EQ(r, (PushReceipt{0, 2}));
  EXPECT_EQ(rig.gw.queued("u1"), 2u);

  std::vector<std::string> seen;
  EXPECT_EQ(rig.gw.connect("u1", [&](const OutboundMessage& m) { seen.push_back(m.as_text().text); }),
            2u);
  EXPECT_EQ(rig.gw.push("u1", {OutboundMessage::text("u1", "c")}), (PushReceipt{1, 0}));
  EXPECT_EQ(seen, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(rig.gw.queued("u1"), 0u);

  rig.gw.disconnect("u1");
  rig.gw.push("u1", {OutboundMessage::text("u1", "d")});
  const auto polled = rig.gw.poll("u1");
  ASSERT_EQ(polled.size(), 1u);
  EXPECT_EQ(polled[0].as_text().text, "d");
  EXPECT_TRUE(rig.gw.poll("u1").empty());
}

TEST(Push, PerUserOrderIsPreserved) {
  Rig rig;
  for (const char* u : {"a", "b"}) rig.gw.allow(u);
  std::mt19937_64 rng(1);
  std::map<std::string, std::vector<std::string>> sent;
  for (int i = 0; i < 200; ++i) {
    const std::string user = rng() % 2 ? "a" : "b";
    const std::string body = std::to_string(i);
    sent[user].push_back(body);
    rig.gw.push(user, {OutboundMessage::text(user, body)});
  }
  for (const auto& [user, bodies] : sent) {
    std::vector<std::string> got;
    for (const auto& m : rig.gw.poll(user)) got.push_back(m.as_text().text);
    EXPECT_EQ(got, bodies) << user;
  }
}

TEST(RouteEvent, EveryEventGetsAReply) {
  Rig rig;
  std::mt19937_64 rng(2);
  const std::string texts[] = {"weather", "", "help me", "ความรู้", "!!!", "status", "qqqq"};
  for (int i = 0; i < 500; ++i) {
    const std::string user = "u" + std::to_string(rng() % 3);
    std::vector<OutboundMessage> replies;
    if (rng() % 2) {
      replies = rig.send(user, kAllMenuActions[rng() % std::size(kAllMenuActions)]);
    } else {
      replies = rig.say(user, texts[rng() % std::size(texts)]);
    }
    ASSERT_FALSE(replies.empty());
    for (const auto& m : replies) {
      ASSERT_EQ(m.user_id, user);
      ASSERT_NO_THROW(validate(m));
    }
    if (rng() % 10 == 0) rig.gw.advance();
  }
  EXPECT_TRUE(rig.gw.errors().empty());
}

TEST(RouteEvent, TranscriptRecordsRepliesAndPushesInOrder) {
  test::TempDir dir;
  Store store(dir.path());
  Rig rig(&store);
  const auto start = rig.send("u1", MenuAction::TOGGLE_SESSION);
  rig.gw.push("u1", {OutboundMessage::text("u1", "pushed")});
  const auto mon = rig.send("u1", MenuAction::SHOW_MONITOR);

  std::vector<std::string> expected;
  for (const auto& m : start) expected.push_back(encode_message(m));
  expected.push_back(encode_message(OutboundMessage::text("u1", "pushed")));
  expected.push_back(encode_message(mon.at(0)));
  EXPECT_EQ(rig.gw.transcript(), expected);

  std::vector<std::string> stored;
  for (const auto& r : store.records(Stream::TRANSCRIPT)) stored.push_back(r.body);
  EXPECT_EQ(stored, expected);
}

// Points the store's descriptor for `name` at a read-only file so the next write fails.
void break_stream_file(const std::filesystem::path& dir, const std::string& name) {
  const auto target = std::filesystem::canonical(dir) / name;
  for (const auto& entry : std::filesystem::directory_iterator("/proc/self/fd")) {
    std::error_code ec;
    const auto link = std::filesystem::read_symlink(entry.path(), ec);
    if (ec || link != target) continue;
    const int fd = std::stoi(entry.path().filename().string());
    const int ro = ::open("/dev/null", O_RDONLY | O_CLOEXEC);
    ASSERT_GE(ro, 0);
    ASSERT_EQ(::dup2(ro, fd), fd);
    ::close(ro);
    return;
  }
  FAIL() << "no open descriptor for " << target;
}

TEST(RouteEvent, FailureBecomesApology) {
  test::TempDir dir;
  Store store(dir.path());
  Rig rig(&store);
  break_stream_file(dir.path(), "sessions.log");
  const auto replies = rig.send("u1", MenuAction::TOGGLE_SESSION);
  ASSERT_EQ(replies.size(), 1u);
  EXPECT_EQ(replies[0].as_text().text, kApology);
  ASSERT_EQ(rig.gw.errors().size(), 1u);
  EXPECT_NE(rig.gw.errors()[0].find("u1"), std::string::npos);
  // the gateway keeps serving
  EXPECT_FALSE(rig.say("u2", "help").empty());
}

TEST(Advance, PushesRecommendationsAndStopCancelsQueue) {
  SimConfig sim = defaults().sim;
  sim.initial_soil_moisture = 10;
  Rig rig(nullptr, sim);
  rig.send("u1", MenuAction::TOGGLE_SESSION);
  for (int i = 0; i < 3; ++i) rig.gw.advance();
  ASSERT_EQ(rig.gw.queued("u1"), 1u);

  const auto bye = rig.send("u1", MenuAction::TOGGLE_SESSION);
  EXPECT_EQ(bye.at(0).as_text().text, kFarewell);
  EXPECT_EQ(rig.gw.queued("u1"), 0u);
  EXPECT_TRUE(rig.gw.poll("u1").empty());

  // nothing reaches a stopped user for a whole day
  const auto before = rig.gw.transcript().size();
  for (int i = 0; i < 144; ++i) rig.gw.advance();
  EXPECT_EQ(rig.gw.transcript().size(), before);
  EXPECT_EQ(rig.gw.queued("u1"), 0u);
}

TEST(Advance, LiveChannelGetsPushesInTickOrder) {
  SimConfig sim = defaults().sim;
  sim.initial_soil_moisture = 10;
  Rig rig(nullptr, sim);
  rig.send("u1", MenuAction::TOGGLE_SESSION);
  std::vector<OutboundMessage> got;
  rig.gw.connect("u1", [&](const OutboundMessage& m) { got.push_back(m); });
  std::vector<OutboundMessage> expected;
  for (int i = 0; i < 144; ++i) {
    for (const auto& d : rig.gw.advance().deliveries) {
      expected.insert(expected.end(), d.messages.begin(), d.messages.end());
    }
  }
  EXPECT_FALSE(got.empty());
  EXPECT_EQ(got, expected);
}

}  // namespace
}  // namespace agribot
