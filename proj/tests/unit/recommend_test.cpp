#include "agribot/recommend.hpp"

#include <random>
#include <set>

#include <gtest/gtest.h>

namespace agribot {
namespace {

std::filesystem::path data_dir() { return std::filesystem::path(AGRIBOT_SOURCE_DIR) / "data"; }

Rule dry_rule(int sustain = 3, int cooldown = 36) {
  Rule r;
  r.id = "soil-dry";
  r.process = Process::IRRIGATION;
  r.field = "soil_moisture";
  r.comparator = Comparator::LT;
  r.threshold = 20;
  r.sustain_ticks = sustain;
  r.cooldown_ticks = cooldown;
  r.message_template = "Soil moisture {value}% below {threshold}%, turn drip ON";
  r.advised_action = MenuAction::DRIP_ON;
  return r;
}

SensorSnapshot soil(double value, std::int64_t ts = 0) {
  SensorSnapshot s;
  s.ts = ts;
  s.air_temp = 25;
  s.rel_humidity = 60;
  s.soil_moisture = value;
  s.light = 1000;
  return s;
}

TEST(Evaluate, FiresAfterSustainTicks) {
  const std::vector<Rule> rules{dry_rule()};
  RuleState state;
  auto r1 = evaluate(soil(18, 1), rules, state);
  EXPECT_TRUE(r1.recommendations.empty());
  EXPECT_EQ(r1.state.at("soil-dry"), (RuleCounters{1, 0}));
  auto r2 = evaluate(soil(17, 2), rules, r1.state);
  EXPECT_TRUE(r2.recommendations.empty());
  auto r3 = evaluate(soil(16, 3), rules, r2.state);
  ASSERT_EQ(r3.recommendations.size(), 1u);
  const auto& rec = r3.recommendations[0];
  EXPECT_EQ(rec.rule_id, "soil-dry");
  EXPECT_EQ(rec.ts, 3);
  EXPECT_EQ(rec.advised_action, MenuAction::DRIP_ON);
  EXPECT_EQ(rec.process, Process::IRRIGATION);
  EXPECT_EQ(rec.message, "Soil moisture 16.0% below 20.0%, turn drip ON");
  EXPECT_EQ(r3.state.at("soil-dry"), (RuleCounters{0, 36}));
}

TEST(Evaluate, NominalProducesNothing) {
  const auto rules = load_ruleset(data_dir() / "lettuce_rules.json").rules;
  SensorSnapshot nominal{0, 25.0, 70.0, 30.0, 20000.0};
  const auto r = evaluate(nominal, rules, {});
  EXPECT_TRUE(r.recommendations.empty());
  ASSERT_EQ(r.state.size(), rules.size());
  for (const auto& [id, c] : r.state) EXPECT_EQ(c, (RuleCounters{0, 0})) << id;
}

TEST(Evaluate, CooldownSuppressesAndDecrements) {
  const std::vector<Rule> rules{dry_rule(1, 5)};
  RuleState state{{"soil-dry", {4, 3}}};
  const auto r = evaluate(soil(10), rules, state);
  EXPECT_TRUE(r.recommendations.empty());
  EXPECT_EQ(r.state.at("soil-dry"), (RuleCounters{5, 2}));
}

TEST(Evaluate, StreakBreaksOnNominalReading) {
  const std::vector<Rule> rules{dry_rule(3, 0)};
  RuleState state;
  for (double v : {18.0, 17.0, 25.0, 16.0, 15.0}) {
    auto r = evaluate(soil(v), rules, state);
    EXPECT_TRUE(r.recommendations.empty()) << v;
    state = r.state;
  }
  EXPECT_EQ(evaluate(soil(14), rules, state).recommendations.size(), 1u);
}

TEST(Evaluate, OutputOrderedByRuleId) {
  Rule b = dry_rule(1, 0);
  b.id = "b";
  Rule a = dry_rule(1, 0);
  a.id = "a";
  a.advised_action.reset();
  const auto r = evaluate(soil(10), {b, a}, {});
  ASSERT_EQ(r.recommendations.size(), 2u);
  EXPECT_EQ(r.recommendations[0].rule_id, "a");
  EXPECT_EQ(r.recommendations[1].rule_id, "b");
}

TEST(Evaluate, UnknownField) {
  Rule r = dry_rule();
  r.field = "ph";
  try {
    evaluate(soil(10), {r}, {});
    FAIL();
  } catch (const RuleError& e) {
    EXPECT_EQ(e.code(), RuleError::Code::UnknownField);
  }
}

TEST(Evaluate, IsPure) {
  const auto rules = load_ruleset(data_dir() / "lettuce_rules.json").rules;
  RuleState state{{"irrigation-soil-dry", {2, 0}}};
  const auto a = evaluate(soil(5), rules, state);
  const auto b = evaluate(soil(5), rules, state);
  EXPECT_EQ(a.recommendations, b.recommendations);
  EXPECT_EQ(a.state, b.state);
}

// Walks random predicate streams and checks the two timing guarantees.
TEST(EvaluateProperty, SustainAndCooldownSpacing) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int sustain = 1 + static_cast<int>(rng() % 5);
    const int cooldown = static_cast<int>(rng() % 8);
    const std::vector<Rule> rules{dry_rule(sustain, cooldown)};
    const double p_true = 0.5 + 0.5 * static_cast<double>(rng() % 100) / 100.0;

    RuleState state;
    int run = 0;  // consecutive true predicates so far
    std::vector<int> fires;
    for (int t = 0; t < 300; ++t) {
      const bool low = std::uniform_real_distribution<double>(0, 1)(rng) < p_true;
      run = low ? run + 1 : 0;
      auto r = evaluate(soil(low ? 10 : 30), rules, state);
      state = r.state;
      if (!r.recommendations.empty()) {
        ASSERT_GE(run, sustain) << "fired before the predicate held for sustain_ticks";
        fires.push_back(t);
      }
    }
    for (std::size_t i = 1; i < fires.size(); ++i) {
      ASSERT_GE(fires[i] - fires[i - 1], std::max(cooldown + 1, sustain))
          << "sustain=" << sustain << " cooldown=" << cooldown;
    }
  }
}

TEST(RenderMessage, Substitution) {
  const Rule r = dry_rule();
  EXPECT_EQ(render_message(r, soil(16.0)), "Soil moisture 16.0% below 20.0%, turn drip ON");
  EXPECT_EQ(render_message(r, soil(16.04)), "Soil moisture 16.0% below 20.0%, turn drip ON");
  EXPECT_EQ(render_message(r, soil(16.06)), "Soil moisture 16.1% below 20.0%, turn drip ON");
}

TEST(RenderMessage, TemplateErrors) {
  Rule r = dry_rule();
  r.message_template = "value {bogus}";
  try {
    render_message(r, soil(1));
    FAIL();
  } catch (const RuleError& e) {
    EXPECT_EQ(e.code(), RuleError::Code::TemplateError);
  }
  r.message_template = "value {value";
  EXPECT_THROW(render_message(r, soil(1)), RuleError);
}

TEST(FormatOneDecimal, Rounding) {
  EXPECT_EQ(format_one_decimal(16.04), "16.0");
  EXPECT_EQ(format_one_decimal(-0.04), "0.0");
  EXPECT_EQ(format_one_decimal(60000), "60000.0");
}

TEST(LoadRuleset, DefaultCoversAllFiveProcesses) {
  const RuleSet set = load_ruleset(data_dir() / "lettuce_rules.json");
  EXPECT_GE(set.rules.size(), 5u);
  EXPECT_TRUE(set.warnings.empty());
  std::set<Process> covered;
  for (const auto& r : set.rules) covered.insert(r.process);
  // irrigation, fertilization, disease control, insect pest control, weed control
  for (auto p : {Process::IRRIGATION, Process::FERTILIZATION, Process::DISEASE_CONTROL,
                 Process::INSECT_PEST_CONTROL, Process::WEED_CONTROL}) {
    EXPECT_TRUE(covered.contains(p)) << to_string(p);
  }
}

TEST(LoadRuleset, DefaultIrrigationThresholds) {
  const RuleSet set = load_ruleset(data_dir() / "lettuce_rules.json");
  auto find = [&](std::string_view id) -> const Rule& {
    for (const auto& r : set.rules) {
      if (r.id == id) return r;
    }
    throw std::out_of_range(std::string(id));
  };
  const Rule& dry = find("irrigation-soil-dry");
  EXPECT_EQ(dry.field, "soil_moisture");
  EXPECT_EQ(dry.comparator, Comparator::LT);
  EXPECT_EQ(dry.threshold, 20);
  EXPECT_EQ(dry.advised_action, MenuAction::DRIP_ON);
  EXPECT_EQ(find("irrigation-soil-wet").advised_action, MenuAction::DRIP_OFF);
  EXPECT_EQ(find("irrigation-heat").advised_action, MenuAction::MIST_ON);
  EXPECT_EQ(find("disease-high-humidity").advised_action, MenuAction::MIST_OFF);
  EXPECT_FALSE(find("pest-strong-light").advised_action);
}

TEST(LoadRuleset, UnknownFieldIsValidationError) {
  const auto text = R"([{"id":"acid","process":"FERTILIZATION","field":"ph","cmp":"lt",
    "threshold":5.5,"sustain_ticks":1,"cooldown_ticks":0,"message":"pH {value}","advised_action":null}])";
  try {
    parse_ruleset(text);
    FAIL();
  } catch (const RuleError& e) {
    EXPECT_EQ(e.code(), RuleError::Code::ValidationError);
    EXPECT_NE(std::string(e.what()).find("acid"), std::string::npos);
  }
}

TEST(LoadRuleset, EmptyFileWarns) {
  const RuleSet set = parse_ruleset("");
  EXPECT_TRUE(set.rules.empty());
  EXPECT_EQ(set.warnings.size(), 1u);
  EXPECT_EQ(parse_ruleset("[]").warnings.size(), 1u);
}

TEST(LoadRuleset, ParseErrorNamesLine) {
  try {
    parse_ruleset("[\n{\"id\": \"x\",\n oops}\n]");
    FAIL();
  } catch (const RuleError& e) {
    EXPECT_EQ(e.code(), RuleError::Code::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    parse_ruleset(R"([{"id":"x"}])");
    FAIL();
  } catch (const RuleError& e) {
    EXPECT_EQ(e.code(), RuleError::Code::ParseError);
    EXPECT_NE(std::string(e.what()).find("record 0"), std::string::npos) << e.what();
  }
}

TEST(LoadRuleset, Validation) {
  auto rule_json = [](std::string_view overrides) {
    std::string base = R"({"id":"r","process":"IRRIGATION","field":"soil_moisture","cmp":"lt",
      "threshold":20,"sustain_ticks":1,"cooldown_ticks":0,"message":"m","advised_action":null)";
    return "[" + base + std::string(overrides) + "}]";
  };
  EXPECT_NO_THROW(parse_ruleset(rule_json("")));
  EXPECT_THROW(parse_ruleset(rule_json(R"(,"sustain_ticks":0)")), RuleError);
  EXPECT_THROW(parse_ruleset(R"([{"id":"r","process":"IRRIGATION","field":"soil_moisture","cmp":"eq",
      "threshold":20,"sustain_ticks":1,"cooldown_ticks":0,"message":"m","advised_action":null}])"),
               RuleError);
  EXPECT_THROW(parse_ruleset(R"([{"id":"r","process":"HARVEST","field":"soil_moisture","cmp":"lt",
      "threshold":20,"sustain_ticks":1,"cooldown_ticks":0,"message":"m","advised_action":null}])"),
               RuleError);
  EXPECT_THROW(parse_ruleset(R"([{"id":"r","process":"IRRIGATION","field":"soil_moisture","cmp":"lt",
      "threshold":20,"sustain_ticks":1,"cooldown_ticks":0,"message":"m {x}","advised_action":null}])"),
               RuleError);
  EXPECT_THROW(parse_ruleset(R"([{"id":"r","process":"IRRIGATION","field":"soil_moisture","cmp":"lt",
      "threshold":20,"sustain_ticks":1,"cooldown_ticks":0,"message":"m","advised_action":"SHOW_MAIN"}])"),
               RuleError);
  EXPECT_THROW(load_ruleset("/nonexistent/rules.json"), RuleError);
}

TEST(Snapshot, CodecAndValidation) {
  const SensorSnapshot s{1700000600, 27.5, 71.25, 23.4, 12000};
  const std::string frame = encode_snapshot(s);
  EXPECT_EQ(frame,
            R"({"ts":1700000600,"air_temp":27.5,"rel_humidity":71.25,"soil_moisture":23.4,"light":12000.0})");
  EXPECT_EQ(decode_snapshot(frame), s);
  EXPECT_THROW(decode_snapshot(R"({"ts":1,"air_temp":1,"rel_humidity":1,"light":1})"),
               std::invalid_argument);
  EXPECT_THROW(decode_snapshot(R"({"ts":1,"air_temp":1,"rel_humidity":101,"soil_moisture":1,"light":1})"),
               std::invalid_argument);
}

}  // namespace
}  // namespace agribot
