#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmsim/engine.hpp"
#include "swarmsim/optimize.hpp"

namespace swarmsim {

using json = nlohmann::json;

// 64-bit FNV-1a over the canonical (sorted-key) JSON dump; stable across runs
// and platforms.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

// ---- grid JSON ----

inline json grid_to_json(const TileGrid& g) {
  json j;
  j["rows"] = g.rows;
  j["cols"] = g.cols;
  j["tile_size_mm"] = g.tile_size_mm;
  j["tiles"] = json::array();
  for (auto t : g.tiles) j["tiles"].push_back(static_cast<int>(t));
  return j;
}

inline TileGrid grid_from_json(const json& j) {
  TileGrid g;
  g.rows = j.at("rows").get<int>();
  g.cols = j.at("cols").get<int>();
  g.tile_size_mm = j.value("tile_size_mm", 200.0);
  for (const auto& t : j.at("tiles")) {
    const int v = t.get<int>();
    if (v != 0 && v != 1) throw std::invalid_argument("grid json: tiles must be 0 or 1");
    g.tiles.push_back(static_cast<std::uint8_t>(v));
  }
  validate_grid(g);
  return g;
}

// ---- sim config JSON ----

inline json gamma_to_json(const GammaSpec& g) {
  return json{{"shape", g.shape}, {"scale", g.scale}, {"shift", g.shift}};
}

inline GammaSpec gamma_from_json(const json& j, const GammaSpec& fallback) {
  GammaSpec g = fallback;
  if (j.contains("shape")) g.shape = j.at("shape").get<double>();
  if (j.contains("scale")) g.scale = j.at("scale").get<double>();
  if (j.contains("shift")) g.shift = j.at("shift").get<double>();
  return g;
}

inline json sim_config_to_json(const SimConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["t_end_ms"] = cfg.t_end_ms;
  j["dt_ms"] = cfg.dt_ms;
  j["swarm_size"] = cfg.swarm_size;

  json grid;
  switch (cfg.grid.kind) {
    case GridSource::Kind::Inline:
      grid["kind"] = "inline";
      grid["grid"] = grid_to_json(cfg.grid.inline_grid);
      break;
    case GridSource::Kind::Random:
      grid["kind"] = "random";
      break;
    case GridSource::Kind::Pattern:
      grid["kind"] = "pattern";
      grid["pattern"] = to_string(cfg.grid.pattern);
      break;
  }
  if (cfg.grid.kind != GridSource::Kind::Inline) {
    grid["rows"] = cfg.grid.rows;
    grid["cols"] = cfg.grid.cols;
    grid["fill"] = cfg.grid.fill;
    if (cfg.grid.tile_size_mm > 0.0) grid["tile_size_mm"] = cfg.grid.tile_size_mm;
  }
  j["grid"] = grid;

  j["robot"] = {{"walk_location_ms", cfg.robot.walk_location_ms},
                {"walk_scale_ms", cfg.robot.walk_scale_ms},
                {"sample_interval_ms", cfg.robot.sample_interval_ms},
                {"collision_range_mm", cfg.robot.collision_range_mm},
                {"min_updates", cfg.robot.min_updates},
                {"decision_threshold", cfg.robot.decision_threshold},
                {"set_speed", cfg.robot.set_speed}};
  j["actuation"] = {{"misalign_lo", cfg.actuation.misalign_lo},
                    {"misalign_hi", cfg.actuation.misalign_hi},
                    {"speed_factor", gamma_to_json(cfg.actuation.speed_factor)},
                    {"battery_horizon", cfg.actuation.battery_horizon}};
  j["sensor"] = {{"mode", cfg.sensor.mode == SensorMode::Statistical ? "statistical" : "signal_pipeline"},
                 {"rms_threshold", cfg.sensor.rms_threshold},
                 {"filter", json::array({cfg.sensor.filter_a1, cfg.sensor.filter_a2, cfg.sensor.filter_a3})},
                 {"sample_rate_hz", cfg.sensor.sample_rate_hz},
                 {"stabilize_ms", cfg.sensor.stabilize_ms},
                 {"sense_window_ms", cfg.sensor.sense_window_ms},
                 {"vib_rms", gamma_to_json(cfg.sensor.vib_rms)},
                 {"nonvib_rms", gamma_to_json(cfg.sensor.nonvib_rms)},
                 {"vib_freq_hz", cfg.sensor.vib_freq_hz},
                 {"vib_amplitude", cfg.sensor.vib_amplitude},
                 {"noise_sigma", cfg.sensor.noise_sigma}};
  j["network"] = {{"loss_prob", cfg.network.loss_prob}};
  j["strategies"] = json::array();
  for (const StrategySpec& s : cfg.strategies) {
    json js{{"kind", to_string(s.kind)}};
    if (s.kind == FeedbackKind::SoftFeedback) {
      js["eta"] = s.eta;
      js["kappa"] = s.kappa;
    }
    j["strategies"].push_back(js);
  }
  j["stop_when_all_decided"] = cfg.stop_when_all_decided;
  return j;
}

inline SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.t_end_ms = j.value("t_end_ms", cfg.t_end_ms);
  cfg.dt_ms = j.value("dt_ms", cfg.dt_ms);
  cfg.swarm_size = j.value("swarm_size", cfg.swarm_size);

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    const std::string kind = g.value("kind", "random");
    if (kind == "inline") {
      cfg.grid.kind = GridSource::Kind::Inline;
      cfg.grid.inline_grid = grid_from_json(g.at("grid"));
    } else if (kind == "random" || kind == "pattern") {
      cfg.grid.kind = kind == "random" ? GridSource::Kind::Random : GridSource::Kind::Pattern;
      cfg.grid.rows = g.value("rows", cfg.grid.rows);
      cfg.grid.cols = g.value("cols", cfg.grid.cols);
      cfg.grid.fill = g.value("fill", cfg.grid.fill);
      cfg.grid.tile_size_mm = g.value("tile_size_mm", 0.0);
      if (kind == "pattern") cfg.grid.pattern = pattern_kind_from_string(g.at("pattern").get<std::string>());
    } else {
      throw std::invalid_argument("config: unknown grid kind: " + kind);
    }
  }

  if (j.contains("robot")) {
    const json& r = j.at("robot");
    cfg.robot.walk_location_ms = r.value("walk_location_ms", cfg.robot.walk_location_ms);
    cfg.robot.walk_scale_ms = r.value("walk_scale_ms", cfg.robot.walk_scale_ms);
    cfg.robot.sample_interval_ms = r.value("sample_interval_ms", cfg.robot.sample_interval_ms);
    cfg.robot.collision_range_mm = r.value("collision_range_mm", cfg.robot.collision_range_mm);
    cfg.robot.min_updates = r.value("min_updates", cfg.robot.min_updates);
    cfg.robot.decision_threshold = r.value("decision_threshold", cfg.robot.decision_threshold);
    cfg.robot.set_speed = r.value("set_speed", cfg.robot.set_speed);
  }
  if (j.contains("actuation")) {
    const json& a = j.at("actuation");
    cfg.actuation.misalign_lo = a.value("misalign_lo", cfg.actuation.misalign_lo);
    cfg.actuation.misalign_hi = a.value("misalign_hi", cfg.actuation.misalign_hi);
    if (a.contains("speed_factor"))
      cfg.actuation.speed_factor = gamma_from_json(a.at("speed_factor"), cfg.actuation.speed_factor);
    cfg.actuation.battery_horizon = a.value("battery_horizon", cfg.actuation.battery_horizon);
  }
  if (j.contains("sensor")) {
    const json& s = j.at("sensor");
    const std::string mode = s.value("mode", "statistical");
    if (mode == "statistical")
      cfg.sensor.mode = SensorMode::Statistical;
    else if (mode == "signal_pipeline")
      cfg.sensor.mode = SensorMode::SignalPipeline;
    else
      throw std::invalid_argument("config: unknown sensor mode: " + mode);
    cfg.sensor.rms_threshold = s.value("rms_threshold", cfg.sensor.rms_threshold);
    if (s.contains("filter")) {
      const auto& f = s.at("filter");
      if (!f.is_array() || f.size() != 3)
        throw std::invalid_argument("config: sensor.filter must be [a1, a2, a3]");
      cfg.sensor.filter_a1 = f[0].get<double>();
      cfg.sensor.filter_a2 = f[1].get<double>();
      cfg.sensor.filter_a3 = f[2].get<double>();
    }
    cfg.sensor.sample_rate_hz = s.value("sample_rate_hz", cfg.sensor.sample_rate_hz);
    cfg.sensor.stabilize_ms = s.value("stabilize_ms", cfg.sensor.stabilize_ms);
    cfg.sensor.sense_window_ms = s.value("sense_window_ms", cfg.sensor.sense_window_ms);
    if (s.contains("vib_rms")) cfg.sensor.vib_rms = gamma_from_json(s.at("vib_rms"), cfg.sensor.vib_rms);
    if (s.contains("nonvib_rms"))
      cfg.sensor.nonvib_rms = gamma_from_json(s.at("nonvib_rms"), cfg.sensor.nonvib_rms);
    cfg.sensor.vib_freq_hz = s.value("vib_freq_hz", cfg.sensor.vib_freq_hz);
    cfg.sensor.vib_amplitude = s.value("vib_amplitude", cfg.sensor.vib_amplitude);
    cfg.sensor.noise_sigma = s.value("noise_sigma", cfg.sensor.noise_sigma);
  }
  if (j.contains("network")) cfg.network.loss_prob = j.at("network").value("loss_prob", 0.0);

  if (j.contains("strategies")) {
    cfg.strategies.clear();
    for (const auto& js : j.at("strategies")) {
      StrategySpec s;
      s.kind = feedback_kind_from_string(js.at("kind").get<std::string>());
      s.eta = js.value("eta", s.eta);
      s.kappa = js.value("kappa", s.kappa);
      cfg.strategies.push_back(s);
    }
  }
  cfg.stop_when_all_decided = j.value("stop_when_all_decided", cfg.stop_when_all_decided);
  validate(cfg);
  return cfg;
}

// ---- batch / pso / grid-search configs ----

struct BatchConfig {
  SimConfig sim;
  int replicates = 100;
  BatchOptions options;
};

inline BatchConfig batch_config_from_json(const json& j) {
  BatchConfig cfg;
  cfg.sim = sim_config_from_json(j);
  if (j.contains("batch")) {
    const json& b = j.at("batch");
    cfg.replicates = b.value("replicates", cfg.replicates);
    if (j.at("batch").contains("randomize")) {
      const json& r = b.at("randomize");
      cfg.options.randomize_grid = r.value("grid", true);
      cfg.options.randomize_placement = r.value("placement", true);
    }
  }
  if (cfg.replicates < 1) throw std::invalid_argument("config: batch.replicates must be >= 1");
  return cfg;
}

struct PsoCliConfig {
  SimConfig sim;        // evaluation environment (strategy list used as-is)
  PsoConfig pso;
};

inline PsoCliConfig pso_config_from_json(const json& j) {
  PsoCliConfig cfg;
  cfg.sim = sim_config_from_json(j);
  cfg.pso.seed = cfg.sim.seed;
  if (j.contains("pso")) {
    const json& p = j.at("pso");
    cfg.pso.n_particles = p.value("particles", cfg.pso.n_particles);
    cfg.pso.n_iterations = p.value("iterations", cfg.pso.n_iterations);
    cfg.pso.cognitive = p.value("cognitive", cfg.pso.cognitive);
    cfg.pso.social = p.value("social", cfg.pso.social);
    cfg.pso.inertia_start = p.value("inertia_start", cfg.pso.inertia_start);
    cfg.pso.inertia_end = p.value("inertia_end", cfg.pso.inertia_end);
    cfg.pso.evals_base = p.value("evals_base", cfg.pso.evals_base);
    cfg.pso.evals_elite_extra = p.value("evals_elite_extra", cfg.pso.evals_elite_extra);
    cfg.pso.elite_fraction = p.value("elite_fraction", cfg.pso.elite_fraction);
    cfg.pso.fitness_norm_exponent = p.value("fitness_norm_exponent", cfg.pso.fitness_norm_exponent);
    if (p.contains("bounds")) {
      const json& b = p.at("bounds");
      auto read5 = [](const json& arr, ParamVector& out) {
        if (!arr.is_array() || arr.size() != kParamDims)
          throw std::invalid_argument("config: pso.bounds entries need 5 values");
        for (int d = 0; d < kParamDims; ++d) out[static_cast<std::size_t>(d)] = arr[static_cast<std::size_t>(d)].get<double>();
      };
      if (b.contains("lo")) read5(b.at("lo"), cfg.pso.bounds.lo);
      if (b.contains("hi")) read5(b.at("hi"), cfg.pso.bounds.hi);
    }
    if (p.contains("initial_guess")) {
      if (p.at("initial_guess").is_null()) {
        cfg.pso.initial_guess.reset();
      } else {
        ParamVector v{};
        const auto& arr = p.at("initial_guess");
        if (!arr.is_array() || arr.size() != kParamDims)
          throw std::invalid_argument("config: pso.initial_guess needs 5 values");
        for (int d = 0; d < kParamDims; ++d) v[static_cast<std::size_t>(d)] = arr[static_cast<std::size_t>(d)].get<double>();
        cfg.pso.initial_guess = v;
      }
    }
  }
  for (int d = 0; d < kParamDims; ++d)
    if (!(cfg.pso.bounds.lo[static_cast<std::size_t>(d)] <= cfg.pso.bounds.hi[static_cast<std::size_t>(d)]))
      throw std::invalid_argument("config: pso.bounds lo must not exceed hi");
  return cfg;
}

struct GridSearchConfig {
  SimConfig sim;
  std::vector<double> etas{750, 1000, 1250, 1500, 1750, 2000, 2250, 2500};
  std::vector<double> kappas{1, 2, 3, 4};
  int replicates = 100;
};

inline GridSearchConfig grid_search_config_from_json(const json& j) {
  GridSearchConfig cfg;
  cfg.sim = sim_config_from_json(j);
  if (j.contains("grid_search")) {
    const json& g = j.at("grid_search");
    if (g.contains("etas")) cfg.etas = g.at("etas").get<std::vector<double>>();
    if (g.contains("kappas")) cfg.kappas = g.at("kappas").get<std::vector<double>>();
    cfg.replicates = g.value("replicates", cfg.replicates);
  }
  if (cfg.etas.empty() || cfg.kappas.empty())
    throw std::invalid_argument("config: grid_search axes must be nonempty");
  if (cfg.replicates < 1) throw std::invalid_argument("config: grid_search.replicates must be >= 1");
  return cfg;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// Hash of the effective config, for provenance lines.
inline std::string config_hash(const json& j) { return hex64(fnv1a64(j.dump())); }

}  // namespace swarmsim
