#include "agribot/field_sim.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

namespace agribot {
namespace {

constexpr ActuatorState kOff{Switch::OFF, Switch::OFF};
constexpr ActuatorState kDrip{Switch::ON, Switch::OFF};
constexpr ActuatorState kMist{Switch::OFF, Switch::ON};

SimConfig quiet() {
  SimConfig c;
  c.seed = 42;
  return c;
}

TEST(Step, DripExample) {
  const SimConfig cfg = quiet();
  FieldState s;
  s.soil_moisture = 30;
  s.air_temp = 25;
  const FieldState next = step(s, kDrip, cfg);
  // 30 + 1.5 - 0.4 * 1.0
  EXPECT_NEAR(next.soil_moisture, 31.1, 1e-9);
  EXPECT_EQ(next.tick, 1);
}

TEST(Step, EvaporationGrowsWithHeat) {
  const SimConfig cfg = quiet();
  FieldState s;
  s.soil_moisture = 30;
  s.air_temp = 35;
  // factor 1.5 at 35 deg C
  EXPECT_NEAR(step(s, kOff, cfg).soil_moisture, 30 - 0.4 * 1.5, 1e-9);
  EXPECT_DOUBLE_EQ(evap_factor(20), 1.0);
  EXPECT_DOUBLE_EQ(evap_factor(27), 1.1);
}

TEST(Step, ClampsAtZero) {
  const SimConfig cfg = quiet();
  FieldState s;
  s.soil_moisture = 0.2;
  s.air_temp = 25;
  EXPECT_EQ(step(s, kOff, cfg).soil_moisture, 0.0);
}

TEST(Step, ClampsAtHundred) {
  SimConfig cfg = quiet();
  cfg.k_drip = 50;
  FieldState s;
  s.soil_moisture = 99;
  EXPECT_EQ(step(s, kDrip, cfg).soil_moisture, 100.0);
}

TEST(Step, MistCoolsAndHumidifies) {
  const SimConfig cfg = quiet();
  const FieldState s = initial_state(cfg);
  const FieldState off = step(s, kOff, cfg);
  const FieldState on = step(s, kMist, cfg);
  EXPECT_NEAR(off.air_temp - on.air_temp, cfg.k_mist_temp, 1e-9);
  EXPECT_NEAR(on.rel_humidity - off.rel_humidity, cfg.k_mist_hum, 1e-9);
  EXPECT_EQ(on.soil_moisture, off.soil_moisture);
}

TEST(Diurnal, ShapeOfTheDay) {
  SimConfig cfg = quiet();
  cfg.tick_seconds = 3600;
  cfg.start_time_of_day = 0;
  // tick index == local hour
  EXPECT_NEAR(diurnal_temp(cfg, 15), cfg.temp_mean + cfg.temp_amplitude, 1e-9);
  EXPECT_NEAR(diurnal_temp(cfg, 3), cfg.temp_mean - cfg.temp_amplitude, 1e-9);
  EXPECT_NEAR(diurnal_humidity(cfg, 15), cfg.humidity_mean - cfg.humidity_amplitude, 1e-9);
  EXPECT_NEAR(diurnal_light(cfg, 12), cfg.light_peak, 1e-6);
  EXPECT_EQ(diurnal_light(cfg, 2), 0.0);
  EXPECT_EQ(diurnal_light(cfg, 20), 0.0);
  EXPECT_EQ(diurnal_light(cfg, 6), 0.0);
  EXPECT_GT(diurnal_light(cfg, 7), 0.0);
  // period of one day
  EXPECT_NEAR(diurnal_temp(cfg, 15 + 24 * 5), diurnal_temp(cfg, 15), 1e-9);
}

TEST(ReadSensors, QuantizesToHundredths) {
  FieldState s;
  s.soil_moisture = 23.456789;
  s.air_temp = 27.001;
  s.rel_humidity = 64.995;
  s.light = 1234.5678;
  const auto snap = read_sensors(s, 99);
  EXPECT_EQ(snap.ts, 99);
  EXPECT_DOUBLE_EQ(snap.soil_moisture, 23.46);
  EXPECT_DOUBLE_EQ(snap.air_temp, 27.0);
  EXPECT_DOUBLE_EQ(snap.light, 1234.57);
}

std::vector<FieldState> run(const SimConfig& cfg, const std::vector<ActuatorState>& acts) {
  std::vector<FieldState> out{initial_state(cfg)};
  for (const auto& a : acts) out.push_back(step(out.back(), a, cfg));
  return out;
}

std::vector<ActuatorState> random_actuators(std::mt19937_64& rng, int n) {
  std::vector<ActuatorState> acts;
  for (int i = 0; i < n; ++i) {
    acts.push_back({rng() % 2 ? Switch::ON : Switch::OFF, rng() % 2 ? Switch::ON : Switch::OFF});
  }
  return acts;
}

TEST(SimProperty, Deterministic) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    SimConfig cfg = quiet();
    cfg.seed = rng();
    cfg.noise = {0.3, 0.2, 1.0, 500};
    const auto acts = random_actuators(rng, 300);
    EXPECT_EQ(run(cfg, acts), run(cfg, acts));
  }
}

TEST(SimProperty, NoiseDependsOnSeedOnlyWhenEnabled) {
  std::mt19937_64 rng(6);
  const auto acts = random_actuators(rng, 144);
  SimConfig a = quiet();
  SimConfig b = quiet();
  b.seed = 43;
  EXPECT_EQ(run(a, acts), run(b, acts));
  a.noise = b.noise = {0.3, 0.3, 0.3, 0.3};
  EXPECT_NE(run(a, acts), run(b, acts));
}

TEST(SimProperty, DripNeverLowersSoilMoisture) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    SimConfig cfg = quiet();
    cfg.seed = rng();
    FieldState s;
    s.soil_moisture = std::uniform_real_distribution<double>(0, 100)(rng);
    s.air_temp = std::uniform_real_distribution<double>(5, 45)(rng);
    s.tick = static_cast<std::int64_t>(rng() % 10000);
    const Switch mist = rng() % 2 ? Switch::ON : Switch::OFF;
    const auto with = step(s, {Switch::ON, mist}, cfg);
    const auto without = step(s, {Switch::OFF, mist}, cfg);
    ASSERT_GE(with.soil_moisture, without.soil_moisture);
  }
}

TEST(SimProperty, StaysInBounds) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    SimConfig cfg = quiet();
    cfg.seed = rng();
    cfg.noise = {5, 5, 20, 20000};
    for (const auto& s : run(cfg, random_actuators(rng, 1000))) {
      ASSERT_GE(s.soil_moisture, 0);
      ASSERT_LE(s.soil_moisture, 100);
      ASSERT_GE(s.rel_humidity, 0);
      ASSERT_LE(s.rel_humidity, 100);
      ASSERT_GE(s.light, 0);
      ASSERT_TRUE(std::isfinite(s.air_temp));
    }
  }
}

TEST(SimConfigParse, KeysAndErrors) {
  const auto cfg = parse_sim_config(R"({"seed": 7, "k_drip": 2.0, "noise_sigma": 0.5, "noise_light": 100})");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.k_drip, 2.0);
  EXPECT_EQ(cfg.noise.soil, 0.5);
  EXPECT_EQ(cfg.noise.light, 100);
  EXPECT_EQ(cfg.k_evap, SimConfig{}.k_evap);
  EXPECT_THROW(parse_sim_config(R"({"k_drp": 1})"), std::invalid_argument);
  EXPECT_THROW(parse_sim_config(R"({"k_drip": -1})"), std::invalid_argument);
  EXPECT_THROW(parse_sim_config(R"({"tick_seconds": 0})"), std::invalid_argument);
  EXPECT_THROW(parse_sim_config(R"({"seed": "x"})"), std::invalid_argument);
  EXPECT_THROW(parse_sim_config("[1]"), std::invalid_argument);
}

TEST(Forecast, PureAndOrdered) {
  SimConfig cfg = quiet();
  for (std::int64_t d = 0; d < 60; ++d) {
    const auto f = weather_forecast(cfg, d);
    EXPECT_EQ(f, weather_forecast(cfg, d));
    EXPECT_LE(f.min_temp, f.max_temp);
    EXPECT_GE(f.rain_chance, 0);
    EXPECT_LE(f.rain_chance, 100);
    EXPECT_EQ(f.day_index, d);
    EXPECT_NEAR(f.min_temp * 10, std::round(f.min_temp * 10), 1e-6);
  }
  // Independent of the simulation's progress and the time of day.
  SimConfig shifted = cfg;
  shifted.start_time_of_day = 12345;
  shifted.noise = {1, 1, 1, 1};
  EXPECT_EQ(weather_forecast(cfg, 3), weather_forecast(shifted, 3));
}

TEST(Forecast, GoldenSeed42) {
  std::ifstream in(std::filesystem::path(AGRIBOT_SOURCE_DIR) / "tests/golden/forecast_seed42.txt");
  ASSERT_TRUE(in);
  SimConfig cfg = quiet();
  int rows = 0;
  std::int64_t day = 0;
  double lo = 0;
  double hi = 0;
  int rain = 0;
  while (in >> day >> lo >> hi >> rain) {
    const auto f = weather_forecast(cfg, day);
    EXPECT_NEAR(f.min_temp, lo, 1e-9) << "day " << day;
    EXPECT_NEAR(f.max_temp, hi, 1e-9) << "day " << day;
    EXPECT_EQ(f.rain_chance, rain) << "day " << day;
    ++rows;
  }
  EXPECT_EQ(rows, 7);
}

}  // namespace
}  // namespace agribot
