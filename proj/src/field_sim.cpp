#include "agribot/field_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "file_util.hpp"

namespace agribot {

namespace {

constexpr double kSecondsPerDay = 86400.0;

// splitmix64 finalizer; decorrelates neighbouring (seed, tick, field) tuples.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix(mix(mix(seed) ^ a) ^ b);
}

double noise(const SimConfig& cfg, std::int64_t tick, std::uint64_t field, double sigma) {
  if (sigma == 0) return 0;
  std::mt19937_64 gen(stream_seed(cfg.seed, static_cast<std::uint64_t>(tick), field));
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(gen);
}

double local_hour(const SimConfig& cfg, std::int64_t tick) {
  const double secs = static_cast<double>(cfg.start_time_of_day) +
                      static_cast<double>(tick) * cfg.tick_seconds;
  double tod = std::fmod(secs, kSecondsPerDay);
  if (tod < 0) tod += kSecondsPerDay;
  return tod / 3600.0;
}

double clamp_pct(double v) { return std::clamp(v, 0.0, 100.0); }

double quantize(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

std::string_view to_string(Switch s) { return s == Switch::ON ? "ON" : "OFF"; }

void validate(const SimConfig& cfg) {
  if (cfg.tick_seconds < 1) throw std::invalid_argument("tick_seconds must be >= 1");
  const std::pair<const char*, double> non_negative[] = {
      {"k_drip", cfg.k_drip},
      {"k_evap", cfg.k_evap},
      {"k_mist_temp", cfg.k_mist_temp},
      {"k_mist_hum", cfg.k_mist_hum},
      {"temp_amplitude", cfg.temp_amplitude},
      {"humidity_amplitude", cfg.humidity_amplitude},
      {"light_peak", cfg.light_peak},
      {"noise_soil", cfg.noise.soil},
      {"noise_temp", cfg.noise.temp},
      {"noise_humidity", cfg.noise.humidity},
      {"noise_light", cfg.noise.light},
  };
  for (const auto& [name, v] : non_negative) {
    if (!std::isfinite(v) || v < 0) {
      throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
    }
  }
  if (!std::isfinite(cfg.temp_mean) || !std::isfinite(cfg.humidity_mean)) {
    throw std::invalid_argument("climate means must be finite");
  }
  if (!(cfg.initial_soil_moisture >= 0 && cfg.initial_soil_moisture <= 100)) {
    throw std::invalid_argument("initial_soil_moisture must be in [0,100]");
  }
}

SimConfig parse_sim_config(std::string_view text, SimConfig cfg) {
  using Json = nlohmann::json;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("sim config: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("sim config must be a JSON object");

  // The blanket sigma applies first so per-field keys override it.
  if (auto it = doc.find("noise_sigma"); it != doc.end()) {
    if (!it->is_number()) throw std::invalid_argument("sim config: 'noise_sigma' must be a number");
    const double s = it->get<double>();
    cfg.noise = {s, s, s, s};
  }
  for (const auto& [key, value] : doc.items()) {
    auto number = [&] {
      if (!value.is_number()) throw std::invalid_argument("sim config: '" + key + "' must be a number");
      return value.get<double>();
    };
    if (key == "seed") {
      if (!value.is_number_integer()) throw std::invalid_argument("sim config: 'seed' must be an integer");
      cfg.seed = value.is_number_unsigned() ? value.get<std::uint64_t>()
                                            : static_cast<std::uint64_t>(value.get<std::int64_t>());
    } else if (key == "tick_seconds") {
      if (!value.is_number_integer()) {
        throw std::invalid_argument("sim config: 'tick_seconds' must be an integer");
      }
      cfg.tick_seconds = value.get<int>();
    } else if (key == "k_drip") {
      cfg.k_drip = number();
    } else if (key == "k_evap") {
      cfg.k_evap = number();
    } else if (key == "k_mist_temp") {
      cfg.k_mist_temp = number();
    } else if (key == "k_mist_hum") {
      cfg.k_mist_hum = number();
    } else if (key == "temp_mean") {
      cfg.temp_mean = number();
    } else if (key == "temp_amplitude") {
      cfg.temp_amplitude = number();
    } else if (key == "humidity_mean") {
      cfg.humidity_mean = number();
    } else if (key == "humidity_amplitude") {
      cfg.humidity_amplitude = number();
    } else if (key == "light_peak") {
      cfg.light_peak = number();
    } else if (key == "initial_soil_moisture") {
      cfg.initial_soil_moisture = number();
    } else if (key == "noise_sigma") {
    } else if (key == "noise_soil") {
      cfg.noise.soil = number();
    } else if (key == "noise_temp") {
      cfg.noise.temp = number();
    } else if (key == "noise_humidity") {
      cfg.noise.humidity = number();
    } else if (key == "noise_light") {
      cfg.noise.light = number();
    } else {
      throw std::invalid_argument("sim config: unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path, SimConfig base) {
  return parse_sim_config(detail::read_text_file(path), base);
}

double diurnal_temp(const SimConfig& cfg, std::int64_t tick) {
  const double h = local_hour(cfg, tick);
  return cfg.temp_mean + cfg.temp_amplitude * std::cos(2 * std::numbers::pi * (h - 15) / 24);
}

double diurnal_humidity(const SimConfig& cfg, std::int64_t tick) {
  const double h = local_hour(cfg, tick);
  return clamp_pct(cfg.humidity_mean -
                   cfg.humidity_amplitude * std::cos(2 * std::numbers::pi * (h - 15) / 24));
}

double diurnal_light(const SimConfig& cfg, std::int64_t tick) {
  const double h = local_hour(cfg, tick);
  if (h <= 6 || h >= 18) return 0;
  return cfg.light_peak * std::sin(std::numbers::pi * (h - 6) / 12);
}

double evap_factor(double air_temp) { return 1 + 0.05 * std::max(0.0, air_temp - 25); }

FieldState initial_state(const SimConfig& cfg) {
  FieldState s;
  s.soil_moisture = clamp_pct(cfg.initial_soil_moisture);
  s.air_temp = diurnal_temp(cfg, 0);
  s.rel_humidity = diurnal_humidity(cfg, 0);
  s.light = diurnal_light(cfg, 0);
  s.tick = 0;
  return s;
}

FieldState step(const FieldState& s, const ActuatorState& act, const SimConfig& cfg) {
  const std::int64_t next = s.tick + 1;
  const double drip = act.drip == Switch::ON ? 1.0 : 0.0;
  const double mist = act.mist == Switch::ON ? 1.0 : 0.0;

  FieldState out;
  out.tick = next;
  out.soil_moisture = clamp_pct(s.soil_moisture + cfg.k_drip * drip -
                                cfg.k_evap * evap_factor(s.air_temp) +
                                noise(cfg, next, 1, cfg.noise.soil));
  out.air_temp = diurnal_temp(cfg, next) - cfg.k_mist_temp * mist +
                 noise(cfg, next, 2, cfg.noise.temp);
  out.rel_humidity = clamp_pct(diurnal_humidity(cfg, next) + cfg.k_mist_hum * mist +
                               noise(cfg, next, 3, cfg.noise.humidity));
  out.light = std::max(0.0, diurnal_light(cfg, next) + noise(cfg, next, 4, cfg.noise.light));
  return out;
}

SensorSnapshot read_sensors(const FieldState& s, std::int64_t ts) {
  SensorSnapshot snap;
  snap.ts = ts;
  snap.air_temp = quantize(s.air_temp);
  snap.rel_humidity = quantize(s.rel_humidity);
  snap.soil_moisture = quantize(s.soil_moisture);
  snap.light = quantize(s.light);
  return snap;
}

Forecast weather_forecast(const SimConfig& cfg, std::int64_t day_index) {
  std::mt19937_64 gen(stream_seed(cfg.seed, 0xF0CA57ULL, static_cast<std::uint64_t>(day_index)));
  std::normal_distribution<double> jitter(0.0, 1.5);
  std::uniform_int_distribution<int> rain(0, 100);

  double lo = cfg.temp_mean - cfg.temp_amplitude + jitter(gen);
  double hi = cfg.temp_mean + cfg.temp_amplitude + jitter(gen);
  if (lo > hi) std::swap(lo, hi);

  Forecast f;
  f.day_index = day_index;
  f.min_temp = std::round(lo * 10.0) / 10.0;
  f.max_temp = std::round(hi * 10.0) / 10.0;
  f.rain_chance = rain(gen);
  return f;
}

}  // namespace agribot
