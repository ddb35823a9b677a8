#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmsim/config.hpp"
#include "swarmsim/engine.hpp"
#include "swarmsim/io.hpp"
#include "swarmsim/optimize.hpp"

namespace swarmsim {

namespace detail {

// Flag beats environment beats config.
inline std::uint64_t effective_seed(const std::optional<std::uint64_t>& flag, std::uint64_t from_config) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SWARM_PERCEPT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::runtime_error("SWARM_PERCEPT_SEED is not a valid unsigned integer");
    }
  }
  return from_config;
}

inline std::filesystem::path prepare_out_dir(const std::string& out) {
  std::filesystem::path dir(out.empty() ? "." : out);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"collective-perception swarm simulator and optimizer"};
  app.require_subcommand(1);

  std::string config_path, out = ".";
  std::optional<std::uint64_t> seed_flag;
  int workers = 1;
  bool emit_runlog = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* copt = cmd->add_option("--config", config_path, "config JSON path");
    if (needs_config) copt->required();
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--seed", seed_flag, "seed override");
  };

  auto* cmd_run = app.add_subcommand("run", "single simulation, stats + optional event log");
  add_common(cmd_run, true);
  cmd_run->add_flag("--emit-runlog", emit_runlog, "also write runlog.ndjson");

  auto* cmd_batch = app.add_subcommand("batch", "replicated simulations, stats CSV");
  add_common(cmd_batch, true);
  cmd_batch->add_option("--workers", workers, "parallel replicate workers");

  auto* cmd_pso = app.add_subcommand("pso", "noise-resistant parameter optimization");
  add_common(cmd_pso, true);
  cmd_pso->add_option("--workers", workers, "parallel evaluation workers");

  auto* cmd_grid = app.add_subcommand("grid", "soft-feedback (eta, kappa) sweep");
  add_common(cmd_grid, true);
  cmd_grid->add_option("--workers", workers, "parallel replicate workers");

  auto* cmd_envgen = app.add_subcommand("envgen", "write a tile grid JSON");
  std::string kind = "random", gridfile = "grid.json";
  int rows = 10, cols = 10;
  double fill = 0.48, tile_size = 0.0;
  cmd_envgen->add_option("--kind", kind, "random|diagonal|stripe|block_diagonal|alternating");
  cmd_envgen->add_option("--rows", rows, "grid rows");
  cmd_envgen->add_option("--cols", cols, "grid cols");
  cmd_envgen->add_option("--f", fill, "target fill ratio");
  cmd_envgen->add_option("--tile-size", tile_size, "tile size mm (0 = 1 m arena)");
  cmd_envgen->add_option("--out", gridfile, "output grid JSON path");
  cmd_envgen->add_option("--seed", seed_flag, "seed (random kind)");

  auto* cmd_metrics = app.add_subcommand("metrics", "fill ratio, Moran index, entropy of a grid");
  std::string metrics_path;
  cmd_metrics->add_option("grid", metrics_path, "grid JSON path")->required();

  std::vector<const char*> argv;
  argv.push_back("swarm-percept");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cmd_run->parsed()) {
      SimConfig cfg = sim_config_from_json(load_json_file(config_path));
      cfg.seed = detail::effective_seed(seed_flag, cfg.seed);
      const std::string hash = config_hash(sim_config_to_json(cfg));
      const auto dir = detail::prepare_out_dir(out);
      const RunLog log = run(cfg);
      RunStats stats = summarize(log);
      write_text_file((dir / "stats.csv").string(), stats_csv(stats.rows, cfg.strategies, hash, cfg.seed));
      write_text_file((dir / "summary.csv").string(),
                      summary_csv(aggregate_rows(stats.rows, {log.grid.fill_ratio()}),
                                  cfg.strategies, hash, cfg.seed));
      if (emit_runlog) write_text_file((dir / "runlog.ndjson").string(), runlog_ndjson(log));
      std::cout << "run complete: end_ms=" << log.end_ms << " fill=" << log.grid.fill_ratio()
                << " outputs in " << dir.string() << "\n";
      return 0;
    }
    if (cmd_batch->parsed()) {
      BatchConfig cfg = batch_config_from_json(load_json_file(config_path));
      cfg.sim.seed = detail::effective_seed(seed_flag, cfg.sim.seed);
      cfg.options.workers = workers;
      const std::string hash = config_hash(sim_config_to_json(cfg.sim));
      const auto dir = detail::prepare_out_dir(out);
      const BatchResult res = batch(cfg.sim, cfg.replicates, cfg.options);
      write_text_file((dir / "stats.csv").string(),
                      stats_csv(res.rows, cfg.sim.strategies, hash, cfg.sim.seed));
      write_text_file((dir / "summary.csv").string(),
                      summary_csv(res.aggregates, cfg.sim.strategies, hash, cfg.sim.seed));
      std::cout << "batch complete: " << cfg.replicates << " replicates, outputs in "
                << dir.string() << "\n";
      return 0;
    }
    if (cmd_pso->parsed()) {
      PsoCliConfig cfg = pso_config_from_json(load_json_file(config_path));
      cfg.sim.seed = detail::effective_seed(seed_flag, cfg.sim.seed);
      cfg.pso.seed = cfg.sim.seed;
      cfg.pso.workers = workers;
      const std::string hash = config_hash(sim_config_to_json(cfg.sim));
      const auto dir = detail::prepare_out_dir(out);
      const PsoResult res = pso_run(cfg.pso, make_sim_objective(cfg.sim, cfg.pso.fitness_norm_exponent));
      write_text_file((dir / "pso_trace.csv").string(), pso_trace_csv(res.trace, hash, cfg.sim.seed));
      json best;
      best["best_fitness"] = res.best_fitness;
      best["position"] = {{"walk_location_ms", res.best_position[0]},
                          {"walk_scale_ms", res.best_position[1]},
                          {"sample_interval_ms", res.best_position[2]},
                          {"collision_range_mm", res.best_position[3]},
                          {"min_updates", res.best_position[4]}};
      const RobotParams rounded = apply_params(RobotParams{}, res.best_position);
      best["rounded"] = {{"collision_range_mm", rounded.collision_range_mm},
                         {"min_updates", rounded.min_updates}};
      write_text_file((dir / "pso_best.json").string(), best.dump(2) + "\n");
      std::cout << "pso complete: best_fitness=" << res.best_fitness << " outputs in "
                << dir.string() << "\n";
      return 0;
    }
    if (cmd_grid->parsed()) {
      GridSearchConfig cfg = grid_search_config_from_json(load_json_file(config_path));
      cfg.sim.seed = detail::effective_seed(seed_flag, cfg.sim.seed);
      const std::string hash = config_hash(sim_config_to_json(cfg.sim));
      const auto dir = detail::prepare_out_dir(out);
      const auto cells = grid_search(cfg.sim, cfg.etas, cfg.kappas, cfg.replicates, workers);
      write_text_file((dir / "grid_search.csv").string(), grid_search_csv(cells, hash, cfg.sim.seed));
      std::cout << "grid search complete: " << cells.size() << " cells, outputs in "
                << dir.string() << "\n";
      return 0;
    }
    if (cmd_envgen->parsed()) {
      TileGrid g;
      if (kind == "random") {
        Rng rng(derive_seed(seed_flag.value_or(1), Stream::GridGen));
        g = gen_random(rows, cols, fill, rng, tile_size);
      } else {
        g = gen_pattern(pattern_kind_from_string(kind), rows, cols, fill, tile_size);
      }
      write_text_file(gridfile, grid_to_json(g).dump(2) + "\n");
      std::cout << "wrote " << gridfile << " fill=" << g.fill_ratio() << "\n";
      return 0;
    }
    if (cmd_metrics->parsed()) {
      const TileGrid g = grid_from_json(load_json_file(metrics_path));
      std::cout << "fill_ratio " << detail::fmt(g.fill_ratio()) << "\n";
      try {
        std::cout << "moran_index " << detail::fmt(moran_index(g)) << "\n";
      } catch (const std::domain_error& e) {
        std::cout << "moran_index undefined (" << e.what() << ")\n";
      }
      try {
        std::cout << "entropy " << detail::fmt(entropy(g)) << "\n";
      } catch (const std::domain_error& e) {
        std::cout << "entropy undefined (" << e.what() << ")\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no command\n";
  return 1;
}

}  // namespace swarmsim
