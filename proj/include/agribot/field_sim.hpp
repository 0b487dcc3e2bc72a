#pragma once

// Deterministic discrete-time model of a lettuce plot standing in for the
// real sensors and irrigation hardware.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "agribot/recommend.hpp"

namespace agribot {

enum class Switch { OFF, ON };

std::string_view to_string(Switch s);

struct ActuatorState {
  Switch drip = Switch::OFF;
  Switch mist = Switch::OFF;
  friend bool operator==(const ActuatorState&, const ActuatorState&) = default;
};

struct FieldState {
  double soil_moisture = 0;  // %VWC, clamped to [0,100]
  double air_temp = 0;       // deg C
  double rel_humidity = 0;   // %, clamped to [0,100]
  double light = 0;          // lux, >= 0
  std::int64_t tick = 0;
  friend bool operator==(const FieldState&, const FieldState&) = default;
};

struct NoiseSigma {
  double soil = 0;
  double temp = 0;
  double humidity = 0;
  double light = 0;
};

struct SimConfig {
  std::uint64_t seed = 0;
  int tick_seconds = 600;

  double k_drip = 1.5;       // %VWC per tick while drip is ON
  double k_evap = 0.4;       // %VWC per tick at or below 25 deg C
  double k_mist_temp = 0.8;  // deg C drop while mist is ON
  double k_mist_hum = 1.2;   // % humidity rise while mist is ON

  double temp_mean = 27.0;
  double temp_amplitude = 6.0;  // peak at 15:00 local
  double humidity_mean = 70.0;
  double humidity_amplitude = 15.0;  // trough at 15:00 local
  double light_peak = 80000.0;       // lux at solar noon, dark 18:00-06:00

  double initial_soil_moisture = 30.0;
  NoiseSigma noise;

  // Local seconds after midnight at tick 0; set from the orchestrator clock.
  std::int64_t start_time_of_day = 0;
};

// Throws std::invalid_argument on negative rates, tick_seconds < 1, and the like.
void validate(const SimConfig& cfg);

// Flat JSON object whose keys match the SimConfig member names, plus
// `noise_sigma` (all fields) and noise_soil/noise_temp/noise_humidity/noise_light.
SimConfig parse_sim_config(std::string_view json_text, SimConfig base = {});
SimConfig load_sim_config(const std::filesystem::path& path, SimConfig base = {});

double diurnal_temp(const SimConfig& cfg, std::int64_t tick);
double diurnal_humidity(const SimConfig& cfg, std::int64_t tick);
double diurnal_light(const SimConfig& cfg, std::int64_t tick);

// 1 + 0.05 * max(0, temp - 25)
double evap_factor(double air_temp);

FieldState initial_state(const SimConfig& cfg);

// Advances one tick. Noise is a pure function of (seed, next tick, field) and
// is exactly zero when the field's sigma is zero.
FieldState step(const FieldState& state, const ActuatorState& act, const SimConfig& cfg);

// Sensor reading of the state at time `ts`, quantized to 0.01 units.
SensorSnapshot read_sensors(const FieldState& state, std::int64_t ts);

struct Forecast {
  std::int64_t day_index = 0;
  double min_temp = 0;  // deg C, one decimal
  double max_temp = 0;
  int rain_chance = 0;  // %, 0..100
  friend bool operator==(const Forecast&, const Forecast&) = default;
};

// Pure function of (cfg.seed, climate means, day_index).
Forecast weather_forecast(const SimConfig& cfg, std::int64_t day_index);

}  // namespace agribot
