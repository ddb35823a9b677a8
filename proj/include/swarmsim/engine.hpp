#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "swarmsim/agent.hpp"
#include "swarmsim/decision.hpp"
#include "swarmsim/env.hpp"
#include "swarmsim/network.hpp"
#include "swarmsim/rng.hpp"
#include "swarmsim/sensing.hpp"

namespace swarmsim {

// How the arena floor for a run is obtained.
struct GridSource {
  enum class Kind { Inline, Random, Pattern };
  Kind kind = Kind::Random;
  TileGrid inline_grid;                          // Kind::Inline
  int rows = 5, cols = 5;
  double tile_size_mm = 0.0;                     // 0 = pick for a 1 m arena
  double fill = 0.48;
  PatternKind pattern = PatternKind::Stripe;     // Kind::Pattern
};

struct SimConfig {
  std::uint64_t seed = 1;
  double t_end_ms = 1'200'000.0;
  double dt_ms = 50.0;
  int swarm_size = 5;
  GridSource grid;
  RobotParams robot;
  ActuationModel actuation;
  SensorConfig sensor;
  NetworkConfig network;
  std::vector<StrategySpec> strategies{{FeedbackKind::NoFeedback}};
  bool stop_when_all_decided = true;
  // Pinned placement stream; unset derives it from the run seed.
  std::optional<std::uint64_t> placement_seed;
};

inline void validate(const SimConfig& cfg) {
  if (!(cfg.dt_ms > 0.0 && cfg.dt_ms <= 100.0))
    throw std::invalid_argument("config: dt_ms must be in (0, 100]");
  if (!(cfg.t_end_ms > 0.0)) throw std::invalid_argument("config: t_end_ms must be positive");
  if (cfg.swarm_size < 1) throw std::invalid_argument("config: swarm_size must be >= 1");
  if (cfg.swarm_size > 64) throw std::invalid_argument("config: swarm_size must be <= 64");
  if (cfg.strategies.empty() || cfg.strategies.size() > 3)
    throw std::invalid_argument("config: 1 to 3 concurrent strategies");
  if (!(cfg.network.loss_prob >= 0.0 && cfg.network.loss_prob <= 1.0))
    throw std::invalid_argument("config: loss_prob must be in [0, 1]");
  if (!(cfg.robot.decision_threshold > 0.5 && cfg.robot.decision_threshold <= 1.0))
    throw std::invalid_argument("config: decision threshold must be in (0.5, 1]");
  if (cfg.robot.min_updates < 0) throw std::invalid_argument("config: min_updates must be >= 0");
  if (!(cfg.robot.sample_interval_ms > 0.0))
    throw std::invalid_argument("config: sample_interval_ms must be positive");
  if (cfg.grid.kind == GridSource::Kind::Inline) {
    validate_grid(cfg.grid.inline_grid);
    if (cfg.grid.inline_grid.ones() * 2 == cfg.grid.inline_grid.tile_count())
      throw std::invalid_argument("config: fill ratio 0.5 has no correct decision");
  } else {
    if (cfg.grid.rows < 1 || cfg.grid.cols < 1)
      throw std::invalid_argument("config: grid rows/cols must be >= 1");
    const int total = cfg.grid.rows * cfg.grid.cols;
    if (2 * std::llround(total * cfg.grid.fill) == total)
      throw std::invalid_argument("config: fill ratio 0.5 has no correct decision");
  }
}

struct MessageEvent {
  double t_ms = 0.0;
  int sender = 0;
  int strategy = 0;
  int bit = 0;
  std::uint64_t delivered_mask = 0;
  int delivered = 0;
  int dropped = 0;
};

struct PosteriorEvent {
  double t_ms = 0.0;
  int robot = 0;
  int strategy = 0;
  long long alpha = 1;
  long long beta = 1;
  double belief_p = 0.5;
};

struct DecisionEvent {
  double t_ms = 0.0;
  int robot = 0;
  int strategy = 0;
  int value = -1;
  int previous = -1;
};

// Final per-robot, per-strategy outcome.
struct FinalState {
  int robot = 0;
  int strategy = 0;
  long long alpha = 1;
  long long beta = 1;
  int decision = -1;
  double first_decision_ms = -1.0;
  double last_decision_ms = -1.0;
  long long own_observations = 0;
  long long applied_messages = 0;
};

struct RunLog {
  std::uint64_t seed = 0;
  int swarm_size = 0;
  double t_end_ms = 0.0;
  double dt_ms = 0.0;
  double end_ms = 0.0;  // actual end (early stop when everyone decided)
  TileGrid grid;
  int truth = 0;        // 1 when fill > 0.5
  std::vector<StrategySpec> strategies;
  std::vector<Pose> initial_poses;
  std::vector<ActuationNoise> actuation;
  std::vector<StateTransition> transitions;
  std::vector<ObservationSample> observations;
  std::vector<MessageEvent> messages;
  std::vector<PosteriorEvent> posteriors;
  std::vector<DecisionEvent> decisions;
  std::vector<FinalState> finals;
};

namespace detail {

inline TileGrid materialize_grid(const GridSource& src, std::uint64_t run_seed) {
  switch (src.kind) {
    case GridSource::Kind::Inline:
      return src.inline_grid;
    case GridSource::Kind::Random: {
      Rng rng(derive_seed(run_seed, Stream::GridGen));
      return gen_random(src.rows, src.cols, src.fill, rng, src.tile_size_mm);
    }
    case GridSource::Kind::Pattern:
      return gen_pattern(src.pattern, src.rows, src.cols, src.fill, src.tile_size_mm);
  }
  throw std::logic_error("materialize_grid: bad kind");
}

inline std::vector<Pose> place_robots(int n, const TileGrid& grid, std::uint64_t placement_seed) {
  Rng rng(placement_seed);
  const double w = grid.arena_width_mm(), h = grid.arena_height_mm();
  if (w < 2.0 * kBodyRadiusMm || h < 2.0 * kBodyRadiusMm)
    throw std::invalid_argument("placement: arena smaller than one robot");
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      Pose p;
      p.x_mm = rng.uniform(kBodyRadiusMm, w - kBodyRadiusMm);
      p.y_mm = rng.uniform(kBodyRadiusMm, h - kBodyRadiusMm);
      p.heading_rad = rng.uniform(-kPi, kPi);
      placed = true;
      for (const Pose& q : poses) {
        if (std::hypot(p.x_mm - q.x_mm, p.y_mm - q.y_mm) < 2.0 * kBodyRadiusMm) {
          placed = false;
          break;
        }
      }
      if (placed) poses.push_back(p);
    }
    if (!placed) throw std::runtime_error("placement: no collision-free pose found (arena too crowded)");
  }
  return poses;
}

}  // namespace detail

// One deterministic simulation. Fixed-dt outer loop; per-robot inner events at
// exact sub-step times. Within a step: roll inboxes, advance robots in id
// order (observations update models, broadcast one message per strategy, then
// a decision attempt), then drain inboxes in id order.
inline RunLog run(const SimConfig& cfg) {
  validate(cfg);
  const int n = cfg.swarm_size;
  const std::size_t n_strat = cfg.strategies.size();

  RunLog log;
  log.seed = cfg.seed;
  log.swarm_size = n;
  log.t_end_ms = cfg.t_end_ms;
  log.dt_ms = cfg.dt_ms;
  log.grid = detail::materialize_grid(cfg.grid, cfg.seed);
  validate_grid(log.grid);
  if (log.grid.ones() * 2 == log.grid.tile_count())
    throw std::invalid_argument("run: grid fill ratio is exactly 0.5");
  log.truth = log.grid.fill_ratio() > 0.5 ? 1 : 0;
  log.strategies = cfg.strategies;
  log.initial_poses = detail::place_robots(
      n, log.grid, cfg.placement_seed ? *cfg.placement_seed : derive_seed(cfg.seed, Stream::Placement));

  std::vector<Rng> walk_rng, turn_rng, sense_rng, net_rng;
  std::vector<std::vector<Rng>> msg_rng(static_cast<std::size_t>(n));
  std::vector<RobotMotion> motion(static_cast<std::size_t>(n));
  std::vector<Pose> poses(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto id = static_cast<std::uint64_t>(i) + 1;
    walk_rng.emplace_back(derive_seed(cfg.seed, Stream::Walk, id));
    turn_rng.emplace_back(derive_seed(cfg.seed, Stream::Turn, id));
    sense_rng.emplace_back(derive_seed(cfg.seed, Stream::Sense, id));
    net_rng.emplace_back(derive_seed(cfg.seed, Stream::NetworkLoss, id));
    for (std::size_t s = 0; s < n_strat; ++s)
      msg_rng[static_cast<std::size_t>(i)].emplace_back(
          derive_seed(cfg.seed, Stream::Message, id * 8 + s));
    Rng act(derive_seed(cfg.seed, Stream::Actuation, id));
    log.actuation.push_back(draw_actuation(cfg.actuation, act));
    motion[static_cast<std::size_t>(i)].pose = log.initial_poses[static_cast<std::size_t>(i)];
    motion[static_cast<std::size_t>(i)].walk_remaining_ms =
        draw_walk_duration_ms(cfg.robot, walk_rng.back());
    poses[static_cast<std::size_t>(i)] = motion[static_cast<std::size_t>(i)].pose;
  }

  struct Slot {
    BetaModel model;
    int decision = -1;
    double first_decision_ms = -1.0;
    double last_decision_ms = -1.0;
    long long own_observations = 0;
    long long applied_messages = 0;
  };
  std::vector<std::vector<Slot>> slots(static_cast<std::size_t>(n),
                                       std::vector<Slot>(n_strat));
  int undecided_slots = n * static_cast<int>(n_strat);

  const DecisionParams dparams{cfg.robot.min_updates, cfg.robot.decision_threshold};
  Inboxes inboxes(n);
  std::vector<ObservationSample> step_obs;

  auto attempt = [&](int robot, int strat, double t_now) {
    Slot& sl = slots[static_cast<std::size_t>(robot)][static_cast<std::size_t>(strat)];
    const int before = sl.decision;
    const long long count = sl.model.updates();
    const int after = try_decide(sl.model, count, before, dparams, cfg.strategies[static_cast<std::size_t>(strat)].kind);
    if (after != before) {
      sl.decision = after;
      if (before == -1) {
        sl.first_decision_ms = t_now;
        --undecided_slots;
      }
      sl.last_decision_ms = t_now;
      log.decisions.push_back({t_now, robot, strat, after, before});
    }
  };

  double t = 0.0;
  while (t < cfg.t_end_ms - 1e-9) {
    const double dt = std::min(cfg.dt_ms, cfg.t_end_ms - t);
    const double t_next = t + dt;
    inboxes.roll();

    for (int i = 0; i < n; ++i) {
      RobotMotion& m = motion[static_cast<std::size_t>(i)];
      step_obs.clear();
      StepRngs rngs{&walk_rng[static_cast<std::size_t>(i)], &turn_rng[static_cast<std::size_t>(i)],
                    &sense_rng[static_cast<std::size_t>(i)]};
      fsm_step(i, m, cfg.robot, log.actuation[static_cast<std::size_t>(i)], cfg.sensor,
               log.grid, poses, t, dt, cfg.t_end_ms, rngs, log.transitions, step_obs);
      poses[static_cast<std::size_t>(i)] = m.pose;
      for (const ObservationSample& obs : step_obs) {
        log.observations.push_back(obs);
        for (std::size_t s = 0; s < n_strat; ++s) {
          Slot& sl = slots[static_cast<std::size_t>(i)][s];
          sl.model = updated(sl.model, obs.obs_bit);
          sl.own_observations += 1;
          const double p = belief(sl.model);
          log.posteriors.push_back({obs.t_ms, i, static_cast<int>(s), sl.model.alpha,
                                    sl.model.beta, p});
          const int bit = construct_message(cfg.strategies[s], p, obs.obs_bit, sl.decision,
                                            variance(sl.model),
                                            msg_rng[static_cast<std::size_t>(i)][s]);
          if (n > 1) {
            const Message msg{i, static_cast<int>(s), bit};
            const BroadcastRecord rec = broadcast(msg, n, cfg.network.loss_prob,
                                                  net_rng[static_cast<std::size_t>(i)], inboxes);
            log.messages.push_back({obs.t_ms, i, static_cast<int>(s), bit, rec.delivered_mask,
                                    rec.delivered, rec.dropped});
          }
          attempt(i, static_cast<int>(s), obs.t_ms);
        }
      }
    }

    for (int i = 0; i < n; ++i) {
      auto& box = inboxes.readable[static_cast<std::size_t>(i)];
      if (box.empty()) continue;
      bool touched[3] = {false, false, false};
      for (const Message& msg : box) {
        Slot& sl = slots[static_cast<std::size_t>(i)][static_cast<std::size_t>(msg.strategy)];
        sl.model = updated(sl.model, msg.bit);
        sl.applied_messages += 1;
        touched[msg.strategy] = true;
      }
      box.clear();
      for (std::size_t s = 0; s < n_strat; ++s) {
        if (!touched[s]) continue;
        Slot& sl = slots[static_cast<std::size_t>(i)][s];
        log.posteriors.push_back({t_next, i, static_cast<int>(s), sl.model.alpha, sl.model.beta,
                                  belief(sl.model)});
        attempt(i, static_cast<int>(s), t_next);
      }
    }

    t = t_next;
    if (cfg.stop_when_all_decided && undecided_slots == 0) break;
  }
  log.end_ms = t;

  for (int i = 0; i < n; ++i)
    for (std::size_t s = 0; s < n_strat; ++s) {
      const Slot& sl = slots[static_cast<std::size_t>(i)][s];
      log.finals.push_back({i, static_cast<int>(s), sl.model.alpha, sl.model.beta, sl.decision,
                            sl.first_decision_ms, sl.last_decision_ms, sl.own_observations,
                            sl.applied_messages});
    }
  return log;
}

struct RobotStrategyStats {
  int replicate = 0;
  int robot = 0;
  int strategy = 0;
  bool decided = false;
  double decision_time_s = 0.0;  // first decision; T_end when undecided
  bool correct = false;
  double ca_time_per_sample_s = 0.0;
  double intersample_mm = 0.0;
  double loss_measured = 0.0;
  double f_est = 0.5;
};

struct RunStats {
  std::vector<RobotStrategyStats> rows;
  double loss_measured = 0.0;
};

inline RunStats summarize(const RunLog& log) {
  const int n = log.swarm_size;
  // Per-robot collision-avoidance turning time and observation spacing.
  std::vector<double> ca_ms(static_cast<std::size_t>(n), 0.0);
  std::vector<long long> obs_count(static_cast<std::size_t>(n), 0);
  std::vector<double> spacing_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<long long> spacing_count(static_cast<std::size_t>(n), 0);
  std::vector<double> last_odometer(static_cast<std::size_t>(n), 0.0);
  {
    std::vector<double> entered(static_cast<std::size_t>(n), -1.0);  // in obstacle turn since
    for (const StateTransition& tr : log.transitions) {
      const auto r = static_cast<std::size_t>(tr.robot);
      if (tr.to == FsmState::RandomTurn && tr.cause == TurnCause::Obstacle)
        entered[r] = tr.t_ms;
      else if (tr.from == FsmState::RandomTurn && entered[r] >= 0.0) {
        ca_ms[r] += tr.t_ms - entered[r];
        entered[r] = -1.0;
      } else if (tr.to == FsmState::RandomTurn) {
        entered[r] = -1.0;
      }
    }
    for (int i = 0; i < n; ++i)
      if (entered[static_cast<std::size_t>(i)] >= 0.0)
        ca_ms[static_cast<std::size_t>(i)] += log.end_ms - entered[static_cast<std::size_t>(i)];
  }
  for (const ObservationSample& obs : log.observations) {
    const auto r = static_cast<std::size_t>(obs.robot);
    if (obs_count[r] > 0) {
      spacing_sum[r] += obs.odometer_mm - last_odometer[r];
      spacing_count[r] += 1;
    }
    last_odometer[r] = obs.odometer_mm;
    obs_count[r] += 1;
  }

  long long delivered = 0, dropped = 0;
  for (const MessageEvent& mv : log.messages) {
    delivered += mv.delivered;
    dropped += mv.dropped;
  }
  const double loss = (delivered + dropped) > 0
                          ? static_cast<double>(dropped) / static_cast<double>(delivered + dropped)
                          : 0.0;

  RunStats stats;
  stats.loss_measured = loss;
  for (const FinalState& fs : log.finals) {
    const auto r = static_cast<std::size_t>(fs.robot);
    RobotStrategyStats row;
    row.robot = fs.robot;
    row.strategy = fs.strategy;
    row.decided = fs.decision != -1;
    row.decision_time_s = (row.decided ? fs.first_decision_ms : log.t_end_ms) / 1000.0;
    row.correct = fs.decision == log.truth;
    row.ca_time_per_sample_s =
        obs_count[r] > 0 ? ca_ms[r] / 1000.0 / static_cast<double>(obs_count[r]) : 0.0;
    row.intersample_mm =
        spacing_count[r] > 0 ? spacing_sum[r] / static_cast<double>(spacing_count[r]) : 0.0;
    row.loss_measured = loss;
    row.f_est = static_cast<double>(fs.alpha) / static_cast<double>(fs.alpha + fs.beta);
    stats.rows.push_back(row);
  }
  return stats;
}

// Mean and standard-error aggregates per strategy, in the two decision-time
// conventions (undecided excluded vs. counted at T_end).
struct StrategyAggregate {
  int strategy = 0;
  long long rows = 0;
  long long undecided = 0;
  double mean_decision_time_decided_s = 0.0;
  double se_decision_time_decided_s = 0.0;
  double mean_decision_time_all_s = 0.0;
  double se_decision_time_all_s = 0.0;
  double accuracy = 0.0;
  double se_accuracy = 0.0;
  double mean_ca_time_per_sample_s = 0.0;
  double mean_intersample_mm = 0.0;
  double mean_abs_fill_error = 0.0;
  double mean_loss = 0.0;
};

struct BatchResult {
  std::vector<RobotStrategyStats> rows;           // replicate-major, robot-major
  std::vector<StrategyAggregate> aggregates;      // by strategy index
  std::vector<double> fill_ratios;                // per replicate
};

struct BatchOptions {
  bool randomize_grid = true;
  bool randomize_placement = true;
  int workers = 1;
};

// fill_ratios is indexed by replicate; undecided rows carry t = T_end and enter
// only the "all" time aggregate.
inline std::vector<StrategyAggregate> aggregate_rows(const std::vector<RobotStrategyStats>& rows,
                                                     const std::vector<double>& fill_ratios) {
  std::vector<StrategyAggregate> aggregates;
  const int n_strat = rows.empty() ? 0 : 1 + std::max_element(rows.begin(), rows.end(),
                          [](const auto& a, const auto& b) { return a.strategy < b.strategy; })->strategy;
  for (int s = 0; s < n_strat; ++s) {
    StrategyAggregate agg;
    agg.strategy = s;
    std::vector<double> t_dec, t_all, acc;
    double ca = 0.0, spacing = 0.0, abs_err = 0.0, loss = 0.0;
    for (const auto& row : rows) {
      if (row.strategy != s) continue;
      agg.rows += 1;
      if (row.decided)
        t_dec.push_back(row.decision_time_s);
      else
        agg.undecided += 1;
      t_all.push_back(row.decision_time_s);
      acc.push_back(row.correct ? 1.0 : 0.0);
      ca += row.ca_time_per_sample_s;
      spacing += row.intersample_mm;
      loss += row.loss_measured;
      abs_err += std::fabs(row.f_est - fill_ratios.at(static_cast<std::size_t>(row.replicate)));
    }
    auto mean_se = [](const std::vector<double>& xs, double& mean, double& se) {
      if (xs.empty()) {
        mean = se = 0.0;
        return;
      }
      double m = 0.0;
      for (double x : xs) m += x;
      m /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - m) * (x - m);
      var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
      mean = m;
      se = std::sqrt(var / static_cast<double>(xs.size()));
    };
    mean_se(t_dec, agg.mean_decision_time_decided_s, agg.se_decision_time_decided_s);
    mean_se(t_all, agg.mean_decision_time_all_s, agg.se_decision_time_all_s);
    mean_se(acc, agg.accuracy, agg.se_accuracy);
    if (agg.rows > 0) {
      agg.mean_ca_time_per_sample_s = ca / static_cast<double>(agg.rows);
      agg.mean_intersample_mm = spacing / static_cast<double>(agg.rows);
      agg.mean_abs_fill_error = abs_err / static_cast<double>(agg.rows);
      agg.mean_loss = loss / static_cast<double>(agg.rows);
    }
    aggregates.push_back(agg);
  }
  return aggregates;
}

inline std::uint64_t replicate_seed(std::uint64_t batch_seed, int replicate) {
  return derive_seed(batch_seed, Stream::Replicate, static_cast<std::uint64_t>(replicate));
}

namespace detail {

inline SimConfig replicate_config(const SimConfig& base, std::uint64_t batch_seed, int replicate,
                                  const BatchOptions& opt) {
  SimConfig cfg = base;
  cfg.seed = replicate_seed(batch_seed, replicate);
  if (!opt.randomize_grid && base.grid.kind == GridSource::Kind::Random) {
    // Same floor in every replicate: materialize it once from the batch seed.
    cfg.grid.inline_grid = materialize_grid(base.grid, batch_seed);
    cfg.grid.kind = GridSource::Kind::Inline;
  }
  if (!opt.randomize_placement)
    cfg.placement_seed = derive_seed(batch_seed, Stream::Placement);
  return cfg;
}

}  // namespace detail

inline BatchResult batch(const SimConfig& base, int n_replicates, const BatchOptions& opt = {}) {
  if (n_replicates < 1) throw std::invalid_argument("batch: n_replicates must be >= 1");
  validate(base);
  std::vector<RunStats> results(static_cast<std::size_t>(n_replicates));
  std::vector<double> fills(static_cast<std::size_t>(n_replicates), 0.0);

  auto work = [&](int rep) {
    const SimConfig cfg = detail::replicate_config(base, base.seed, rep, opt);
    const RunLog log = run(cfg);
    results[static_cast<std::size_t>(rep)] = summarize(log);
    for (auto& row : results[static_cast<std::size_t>(rep)].rows) row.replicate = rep;
    fills[static_cast<std::size_t>(rep)] = log.grid.fill_ratio();
  };

  const int workers = std::max(1, opt.workers);
  if (workers == 1) {
    for (int rep = 0; rep < n_replicates; ++rep) work(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const int rep = next.fetch_add(1);
          if (rep >= n_replicates) return;
          work(rep);
        }
      });
    for (auto& th : pool) th.join();
  }

  BatchResult out;
  out.fill_ratios = fills;
  for (int rep = 0; rep < n_replicates; ++rep)
    for (const auto& row : results[static_cast<std::size_t>(rep)].rows) out.rows.push_back(row);
  out.aggregates = aggregate_rows(out.rows, out.fill_ratios);
  return out;
}

inline double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("cosine_similarity: sequences must have equal nonzero length");
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("cosine_similarity: zero vector");
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

}  // namespace swarmsim
