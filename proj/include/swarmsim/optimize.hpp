#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "swarmsim/engine.hpp"
#include "swarmsim/rng.hpp"

namespace swarmsim {

inline constexpr int kParamDims = 5;
using ParamVector = std::array<double, kParamDims>;  // walk location ms, walk scale ms,
                                                     // sample interval ms, collision range mm,
                                                     // update gate count

inline constexpr ParamVector kOptimizedParams{7860.0, 10725.0, 3778.0, 55.0, 381.0};
inline constexpr ParamVector kInitialGuessParams{7500.0, 15000.0, 2000.0, 50.0, 320.0};

struct ParamBounds {
  ParamVector lo{0.0, 0.0, 1000.0, 50.0, 0.0};
  ParamVector hi{20000.0, 20000.0, 6000.0, 150.0, 500.0};
};

inline RobotParams apply_params(RobotParams base, const ParamVector& p) {
  base.walk_location_ms = p[0];
  base.walk_scale_ms = p[1];
  base.sample_interval_ms = p[2];
  // Integer-valued on the robot: rounded at evaluation, continuous in the
  // particle space.
  base.collision_range_mm = std::round(p[3]);
  base.min_updates = std::llround(p[4]);
  return base;
}

// Per-robot cost: estimate error factor times decision factor. Decided and
// correct costs the normalized decision time, wrong costs 5, undecided 1.
inline double robot_fitness(double f_est, double f_true, int decision, int truth,
                            double decision_time_ms, double t_end_ms, int n_tiles,
                            double norm_exponent = -1.0) {
  const double eps_f = 1.0 + std::fabs(f_est - f_true) * std::pow(static_cast<double>(n_tiles),
                                                                  norm_exponent);
  double eps_d = 1.0;
  if (decision != -1) eps_d = decision == truth ? decision_time_ms / t_end_ms : 5.0;
  return eps_f * eps_d;
}

// Swarm cost of one finished run: sum of per-robot costs for the run's single
// strategy.
inline double sim_fitness(const RunLog& log, double norm_exponent = -1.0) {
  const double f_true = log.grid.fill_ratio();
  double total = 0.0;
  for (const FinalState& fs : log.finals) {
    const double f_est = static_cast<double>(fs.alpha) / static_cast<double>(fs.alpha + fs.beta);
    const double t = fs.decision != -1 ? fs.first_decision_ms : log.t_end_ms;
    total += robot_fitness(f_est, f_true, fs.decision, log.truth, t, log.t_end_ms,
                           log.grid.tile_count(), norm_exponent);
  }
  return total;
}

// Noise-penalized estimate from repeated evaluations: mean plus population
// standard deviation.
inline double noisy_fitness(const std::vector<double>& evals) {
  if (evals.empty()) throw std::invalid_argument("noisy_fitness: no evaluations");
  const double n = static_cast<double>(evals.size());
  const double mean = std::accumulate(evals.begin(), evals.end(), 0.0) / n;
  double var = 0.0;
  for (double v : evals) var += (v - mean) * (v - mean);
  return mean + std::sqrt(var / n);
}

struct PsoConfig {
  int n_particles = 25;
  int n_iterations = 50;
  double cognitive = 0.75;          // pull toward the personal best
  double social = 0.75;             // pull toward the global best
  double inertia_start = 1.0;
  double inertia_end = 0.4;
  int evals_base = 10;
  int evals_elite_extra = 10;
  double elite_fraction = 0.2;
  ParamBounds bounds;
  std::optional<ParamVector> initial_guess = kInitialGuessParams;  // seeds particle 0
  double fitness_norm_exponent = -1.0;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct Particle {
  ParamVector position{};
  ParamVector velocity{};
  double fitness = 0.0;
  ParamVector best_position{};
  double best_fitness = 0.0;
};

struct PsoTraceRow {
  int iteration = 0;
  int particle = 0;
  double eval_mean = 0.0;
  double fitness = 0.0;
  double best_fitness = 0.0;
  double global_best_fitness = 0.0;
  ParamVector position{};
};

struct PsoResult {
  ParamVector best_position{};
  double best_fitness = 0.0;
  std::vector<PsoTraceRow> trace;
};

// One velocity-and-position update; every dimension draws its own pair of
// uniforms, and the position is clamped to the bounds.
inline void pso_move(Particle& p, const ParamVector& global_best, double inertia,
                     double cognitive, double social, const ParamBounds& bounds, Rng& rng) {
  for (int d = 0; d < kParamDims; ++d) {
    const double r1 = rng.uniform01();
    const double r2 = rng.uniform01();
    p.velocity[d] = inertia * p.velocity[d] +
                    cognitive * r1 * (p.best_position[d] - p.position[d]) +
                    social * r2 * (global_best[d] - p.position[d]);
    p.position[d] = std::min(bounds.hi[d], std::max(bounds.lo[d], p.position[d] + p.velocity[d]));
  }
}

// objective(position, eval_seed) -> one noisy cost sample. Lower is better.
using PsoObjective = std::function<double(const ParamVector&, std::uint64_t)>;

inline PsoResult pso_run(const PsoConfig& cfg, const PsoObjective& objective) {
  if (cfg.n_particles < 1 || cfg.n_iterations < 1)
    throw std::invalid_argument("pso: need at least one particle and one iteration");
  if (cfg.evals_base < 1) throw std::invalid_argument("pso: evals_base must be >= 1");

  Rng rng(derive_seed(cfg.seed, Stream::Optimizer));
  std::vector<Particle> swarm(static_cast<std::size_t>(cfg.n_particles));
  for (int i = 0; i < cfg.n_particles; ++i) {
    Particle& p = swarm[static_cast<std::size_t>(i)];
    for (int d = 0; d < kParamDims; ++d) {
      p.position[d] = rng.uniform(cfg.bounds.lo[d], cfg.bounds.hi[d]);
      p.velocity[d] = 0.0;
    }
    if (i == 0 && cfg.initial_guess) p.position = *cfg.initial_guess;
    p.best_position = p.position;
    p.best_fitness = std::numeric_limits<double>::infinity();
  }

  // Evaluation seeds depend only on (iteration, particle, eval index), so a
  // re-run reproduces every sample regardless of worker count.
  auto eval_seed = [&](int iter, int particle, int e) {
    return derive_seed(cfg.seed, Stream::Replicate,
                       (static_cast<std::uint64_t>(iter) << 32) |
                           (static_cast<std::uint64_t>(particle) << 16) |
                           static_cast<std::uint64_t>(e));
  };

  std::vector<std::vector<double>> evals(static_cast<std::size_t>(cfg.n_particles));
  PsoResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();

  auto run_evals = [&](int iter, int from_eval, int to_eval,
                       const std::vector<int>& particles) {
    // Flat job list, deterministic slot assignment.
    struct Job { int particle; int e; };
    std::vector<Job> jobs;
    for (int pi : particles)
      for (int e = from_eval; e < to_eval; ++e) jobs.push_back({pi, e});
    for (int pi : particles)
      evals[static_cast<std::size_t>(pi)].resize(static_cast<std::size_t>(to_eval));
    auto do_job = [&](const Job& j) {
      evals[static_cast<std::size_t>(j.particle)][static_cast<std::size_t>(j.e)] =
          objective(swarm[static_cast<std::size_t>(j.particle)].position,
                    eval_seed(iter, j.particle, j.e));
    };
    const int workers = std::max(1, cfg.workers);
    if (workers == 1 || jobs.size() <= 1) {
      for (const Job& j : jobs) do_job(j);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            do_job(jobs[k]);
          }
        });
      for (auto& th : pool) th.join();
    }
  };

  for (int iter = 0; iter < cfg.n_iterations; ++iter) {
    const double frac = cfg.n_iterations > 1
                            ? static_cast<double>(iter) / static_cast<double>(cfg.n_iterations - 1)
                            : 0.0;
    const double inertia = cfg.inertia_start + (cfg.inertia_end - cfg.inertia_start) * frac;

    std::vector<int> all(static_cast<std::size_t>(cfg.n_particles));
    std::iota(all.begin(), all.end(), 0);
    run_evals(iter, 0, cfg.evals_base, all);
    for (int i = 0; i < cfg.n_particles; ++i)
      swarm[static_cast<std::size_t>(i)].fitness = noisy_fitness(evals[static_cast<std::size_t>(i)]);

    // Elites by provisional fitness get extra evaluations before the bests
    // are updated.
    const int n_elite = std::min(
        cfg.n_particles,
        std::max(1, static_cast<int>(std::lround(cfg.elite_fraction * cfg.n_particles))));
    if (cfg.evals_elite_extra > 0 && n_elite > 0) {
      std::vector<int> order(all);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return swarm[static_cast<std::size_t>(a)].fitness < swarm[static_cast<std::size_t>(b)].fitness;
      });
      order.resize(static_cast<std::size_t>(n_elite));
      run_evals(iter, cfg.evals_base, cfg.evals_base + cfg.evals_elite_extra, order);
      for (int pi : order)
        swarm[static_cast<std::size_t>(pi)].fitness =
            noisy_fitness(evals[static_cast<std::size_t>(pi)]);
    }

    for (int i = 0; i < cfg.n_particles; ++i) {
      Particle& p = swarm[static_cast<std::size_t>(i)];
      if (p.fitness < p.best_fitness) {
        p.best_fitness = p.fitness;
        p.best_position = p.position;
      }
    }
    int g_idx = 0;
    for (int i = 1; i < cfg.n_particles; ++i)
      if (swarm[static_cast<std::size_t>(i)].best_fitness <
          swarm[static_cast<std::size_t>(g_idx)].best_fitness)
        g_idx = i;
    const Particle& g = swarm[static_cast<std::size_t>(g_idx)];
    if (g.best_fitness < result.best_fitness) {
      result.best_fitness = g.best_fitness;
      result.best_position = g.best_position;
    }

    for (int i = 0; i < cfg.n_particles; ++i) {
      const Particle& p = swarm[static_cast<std::size_t>(i)];
      const auto& ev = evals[static_cast<std::size_t>(i)];
      const double mean = std::accumulate(ev.begin(), ev.end(), 0.0) / static_cast<double>(ev.size());
      result.trace.push_back({iter, i, mean, p.fitness, p.best_fitness, result.best_fitness,
                              p.position});
    }

    for (int i = 0; i < cfg.n_particles; ++i)
      pso_move(swarm[static_cast<std::size_t>(i)], g.best_position, inertia, cfg.cognitive,
               cfg.social, cfg.bounds, rng);
  }
  return result;
}

// The simulator objective the CLI wires into pso_run: one seeded run on a
// fresh random floor with the particle's robot parameters.
inline PsoObjective make_sim_objective(const SimConfig& base, double norm_exponent) {
  return [base, norm_exponent](const ParamVector& position, std::uint64_t seed) {
    SimConfig cfg = base;
    cfg.seed = seed;
    cfg.robot = apply_params(cfg.robot, position);
    const RunLog log = run(cfg);
    return sim_fitness(log, norm_exponent);
  };
}

struct GridSearchCell {
  double eta = 0.0;
  double kappa = 0.0;
  long long rows = 0;
  long long undecided = 0;
  double mean_decision_time_all_s = 0.0;
  double se_decision_time_all_s = 0.0;
  double mean_decision_time_decided_s = 0.0;
  double se_decision_time_decided_s = 0.0;
  double accuracy = 0.0;
  double se_accuracy = 0.0;
};

// Full factorial sweep of the soft-feedback shaping parameters. Every cell
// reuses the same replicate seeds, so cells differ only in (eta, kappa).
inline std::vector<GridSearchCell> grid_search(const SimConfig& base,
                                               const std::vector<double>& etas,
                                               const std::vector<double>& kappas,
                                               int n_replicates, int workers = 1) {
  if (etas.empty() || kappas.empty()) throw std::invalid_argument("grid_search: empty axis");
  std::vector<GridSearchCell> cells;
  for (double eta : etas)
    for (double kappa : kappas) {
      SimConfig cfg = base;
      cfg.strategies = {{FeedbackKind::SoftFeedback, eta, kappa}};
      BatchOptions opt;
      opt.workers = workers;
      const BatchResult res = batch(cfg, n_replicates, opt);
      const StrategyAggregate& agg = res.aggregates.at(0);
      cells.push_back({eta, kappa, agg.rows, agg.undecided, agg.mean_decision_time_all_s,
                       agg.se_decision_time_all_s, agg.mean_decision_time_decided_s,
                       agg.se_decision_time_decided_s, agg.accuracy, agg.se_accuracy});
    }
  return cells;
}

}  // namespace swarmsim
