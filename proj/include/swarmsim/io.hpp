#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

#include "swarmsim/config.hpp"
#include "swarmsim/engine.hpp"
#include "swarmsim/optimize.hpp"
#include "swarmsim/version.hpp"

namespace swarmsim {

namespace detail {

// Shortest round-trip decimal representation, fixed notation preferred.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

}  // namespace detail

inline std::string provenance_line(const std::string& hash, std::uint64_t seed) {
  return "# config_hash=" + hash + " seed=" + std::to_string(seed) + " version=" + kVersion + "\n";
}

inline std::string strategy_label(const std::vector<StrategySpec>& strategies, int idx) {
  const auto& s = strategies.at(static_cast<std::size_t>(idx));
  int same = 0;
  for (const auto& other : strategies)
    if (other.kind == s.kind) ++same;
  std::string label = to_string(s.kind);
  if (same > 1) label += "_" + std::to_string(idx);
  return label;
}

// One row per robot per strategy.
inline std::string stats_csv(const std::vector<RobotStrategyStats>& rows,
                             const std::vector<StrategySpec>& strategies, const std::string& hash,
                             std::uint64_t seed) {
  std::string out = provenance_line(hash, seed);
  out += "replicate,robot_id,strategy,decision_time_s,correct,ca_time_per_sample_s,intersample_mm,loss_measured\n";
  for (const auto& r : rows) {
    out += detail::fmt(r.replicate) + ',' + detail::fmt(r.robot) + ',' +
           strategy_label(strategies, r.strategy) + ',' + detail::fmt(r.decision_time_s) + ',' +
           (r.correct ? "1" : "0") + ',' + detail::fmt(r.ca_time_per_sample_s) + ',' +
           detail::fmt(r.intersample_mm) + ',' + detail::fmt(r.loss_measured) + '\n';
  }
  return out;
}

// Aggregates per strategy; both decision-time conventions side by side.
inline std::string summary_csv(const std::vector<StrategyAggregate>& aggs,
                               const std::vector<StrategySpec>& strategies, const std::string& hash,
                               std::uint64_t seed) {
  std::string out = provenance_line(hash, seed);
  out += "strategy,rows,undecided,mean_decision_time_decided_s,se_decision_time_decided_s,"
         "mean_decision_time_all_s,se_decision_time_all_s,accuracy,se_accuracy,"
         "mean_ca_time_per_sample_s,mean_intersample_mm,mean_abs_fill_error,mean_loss\n";
  for (const auto& a : aggs) {
    out += strategy_label(strategies, a.strategy) + ',' + detail::fmt(a.rows) + ',' +
           detail::fmt(a.undecided) + ',' + detail::fmt(a.mean_decision_time_decided_s) + ',' +
           detail::fmt(a.se_decision_time_decided_s) + ',' + detail::fmt(a.mean_decision_time_all_s) +
           ',' + detail::fmt(a.se_decision_time_all_s) + ',' + detail::fmt(a.accuracy) + ',' +
           detail::fmt(a.se_accuracy) + ',' + detail::fmt(a.mean_ca_time_per_sample_s) + ',' +
           detail::fmt(a.mean_intersample_mm) + ',' + detail::fmt(a.mean_abs_fill_error) + ',' +
           detail::fmt(a.mean_loss) + '\n';
  }
  return out;
}

inline std::string grid_search_csv(const std::vector<GridSearchCell>& cells, const std::string& hash,
                                   std::uint64_t seed) {
  std::string out = provenance_line(hash, seed);
  out += "eta,kappa,rows,undecided,mean_decision_time_all_s,se_decision_time_all_s,"
         "mean_decision_time_decided_s,se_decision_time_decided_s,accuracy,se_accuracy\n";
  for (const auto& c : cells) {
    out += detail::fmt(c.eta) + ',' + detail::fmt(c.kappa) + ',' + detail::fmt(c.rows) + ',' +
           detail::fmt(c.undecided) + ',' + detail::fmt(c.mean_decision_time_all_s) + ',' +
           detail::fmt(c.se_decision_time_all_s) + ',' + detail::fmt(c.mean_decision_time_decided_s) +
           ',' + detail::fmt(c.se_decision_time_decided_s) + ',' + detail::fmt(c.accuracy) + ',' +
           detail::fmt(c.se_accuracy) + '\n';
  }
  return out;
}

inline std::string pso_trace_csv(const std::vector<PsoTraceRow>& trace, const std::string& hash,
                                 std::uint64_t seed) {
  std::string out = provenance_line(hash, seed);
  out += "iteration,particle,eval_mean,fitness,best_fitness,global_best_fitness,"
         "walk_location_ms,walk_scale_ms,sample_interval_ms,collision_range_mm,min_updates\n";
  for (const auto& r : trace) {
    out += detail::fmt(r.iteration) + ',' + detail::fmt(r.particle) + ',' +
           detail::fmt(r.eval_mean) + ',' + detail::fmt(r.fitness) + ',' +
           detail::fmt(r.best_fitness) + ',' + detail::fmt(r.global_best_fitness);
    for (double v : r.position) out += ',' + detail::fmt(v);
    out += '\n';
  }
  return out;
}

// Newline-delimited JSON events, globally time-sorted with a stable tiebreak.
inline std::string runlog_ndjson(const RunLog& log) {
  json header;
  header["event"] = "run_header";
  header["seed"] = log.seed;
  header["swarm_size"] = log.swarm_size;
  header["t_end_ms"] = log.t_end_ms;
  header["dt_ms"] = log.dt_ms;
  header["end_ms"] = log.end_ms;
  header["truth"] = log.truth;
  header["grid"] = grid_to_json(log.grid);
  header["strategies"] = json::array();
  for (const auto& s : log.strategies) {
    json js{{"kind", to_string(s.kind)}};
    if (s.kind == FeedbackKind::SoftFeedback) {
      js["eta"] = s.eta;
      js["kappa"] = s.kappa;
    }
    header["strategies"].push_back(js);
  }
  header["initial_poses"] = json::array();
  for (const auto& p : log.initial_poses)
    header["initial_poses"].push_back({{"x_mm", p.x_mm}, {"y_mm", p.y_mm}, {"heading_rad", p.heading_rad}});
  header["actuation"] = json::array();
  for (const auto& a : log.actuation)
    header["actuation"].push_back({{"misalign", a.misalign},
                                   {"speed_factor", a.speed_factor},
                                   {"battery_horizon", a.battery_horizon}});

  struct Line {
    double t;
    int order;   // stable type rank
    int robot;
    std::string text;
  };
  std::vector<Line> lines;
  for (const auto& e : log.transitions) {
    json j{{"event", "transition"}, {"t_ms", e.t_ms}, {"robot", e.robot},
           {"from", to_string(e.from)}, {"to", to_string(e.to)}};
    if (e.to == FsmState::RandomTurn)
      j["cause"] = e.cause == TurnCause::Obstacle ? "obstacle" : "walk_timeout";
    lines.push_back({e.t_ms, 0, e.robot, j.dump()});
  }
  for (const auto& e : log.observations) {
    json j{{"event", "observation"}, {"t_ms", e.t_ms}, {"robot", e.robot}, {"x_mm", e.x_mm},
           {"y_mm", e.y_mm}, {"tile_bit", e.tile_bit}, {"e_hat", e.e_hat}, {"obs_bit", e.obs_bit},
           {"odometer_mm", e.odometer_mm}};
    lines.push_back({e.t_ms, 1, e.robot, j.dump()});
  }
  for (const auto& e : log.messages) {
    json j{{"event", "message"}, {"t_ms", e.t_ms}, {"sender", e.sender}, {"strategy", e.strategy},
           {"bit", e.bit}, {"delivered_mask", e.delivered_mask}, {"delivered", e.delivered},
           {"dropped", e.dropped}};
    lines.push_back({e.t_ms, 2, e.sender, j.dump()});
  }
  for (const auto& e : log.posteriors) {
    json j{{"event", "posterior"}, {"t_ms", e.t_ms}, {"robot", e.robot}, {"strategy", e.strategy},
           {"alpha", e.alpha}, {"beta", e.beta}, {"belief", e.belief_p}};
    lines.push_back({e.t_ms, 3, e.robot, j.dump()});
  }
  for (const auto& e : log.decisions) {
    json j{{"event", "decision"}, {"t_ms", e.t_ms}, {"robot", e.robot}, {"strategy", e.strategy},
           {"value", e.value}, {"previous", e.previous}};
    lines.push_back({e.t_ms, 4, e.robot, j.dump()});
  }
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.order != b.order) return a.order < b.order;
    return a.robot < b.robot;
  });

  std::string out = header.dump() + '\n';
  for (const auto& l : lines) out += l.text + '\n';
  for (const auto& f : log.finals) {
    json j{{"event", "final"}, {"robot", f.robot}, {"strategy", f.strategy}, {"alpha", f.alpha},
           {"beta", f.beta}, {"decision", f.decision}, {"first_decision_ms", f.first_decision_ms},
           {"last_decision_ms", f.last_decision_ms}, {"own_observations", f.own_observations},
           {"applied_messages", f.applied_messages}};
    out += j.dump() + '\n';
  }
  return out;
}

}  // namespace swarmsim
