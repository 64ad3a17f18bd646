#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "nearstable/errors.hpp"
#include "nearstable/finite_system.hpp"
#include "nearstable/harness.hpp"
#include "nearstable/limit_system.hpp"

namespace fs = std::filesystem;
using namespace nearstable;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

ExperimentConfig resolve_config(const std::string& name, const std::string& path) {
  if (!path.empty()) {
    ExperimentConfig cfg = load_config(path);
    if (!name.empty() && experiment_from_string(name) != cfg.experiment) {
      throw ConfigError("config file names experiment '" + to_string(cfg.experiment) +
                        "' but '" + name + "' was requested");
    }
    return cfg;
  }
  if (name.empty()) {
    throw ConfigError("either an experiment name or --config is required");
  }
  return default_config(experiment_from_string(name));
}

void write_finite(const ExperimentConfig& cfg, std::size_t n, const fs::path& out) {
  FiniteOptions opts;
  opts.drift_substep = cfg.drift_substep;
  const TrajectoryBundle b =
      simulate_finite(cfg.model, n, cfg.horizon, cfg.doa, SeedTree(cfg.root_seed), opts);

  CsvTable events;
  events.header = {"time", "particle", "u", "main_jump"};
  for (const auto& e : b.events) {
    if (!e.accepted) continue;
    events.rows.push_back({format_number(e.time), std::to_string(e.particle), format_number(e.u),
                           format_number(e.main_jump)});
  }
  events.write_file((out / "events.csv").string());

  CsvTable paths;
  paths.header = {"t"};
  for (std::size_t i = 0; i < n; ++i) paths.header.push_back("x" + std::to_string(i));
  for (std::size_t k = 0; k < b.grid.size(); ++k) {
    std::vector<std::string> row{format_number(b.grid[k])};
    for (double x : b.state_row(k)) row.push_back(format_number(x));
    paths.rows.push_back(std::move(row));
  }
  paths.write_file((out / "paths.csv").string());
  std::cout << "finite system: N=" << n << " accepted events=" << b.accepted_count << "\n";
}

void write_limit(const ExperimentConfig& cfg, const fs::path& out) {
  LimitOptions opts;
  opts.record_paths = true;
  const LimitBundle b = simulate_limit(cfg.model, cfg.m, cfg.horizon, cfg.h, stable_target_of(cfg.doa),
                                       SeedTree(cfg.root_seed), opts);
  CsvTable paths;
  paths.header = {"t"};
  for (std::size_t i = 0; i < b.m; ++i) paths.header.push_back("x" + std::to_string(i));
  for (std::size_t k = 0; k < b.grid.size(); ++k) {
    std::vector<std::string> row{format_number(b.grid[k])};
    for (std::size_t i = 0; i < b.m; ++i) row.push_back(format_number(b.state(k, i)));
    paths.rows.push_back(std::move(row));
  }
  paths.write_file((out / "paths.csv").string());

  CsvTable stable;
  stable.header = {"t", "S_t"};
  const auto s = b.path.partial_sums();
  for (std::size_t k = 0; k < s.size(); ++k) {
    stable.rows.push_back({format_number(b.grid[k]), format_number(s[k])});
  }
  stable.write_file((out / "stable_path.csv").string());
  std::cout << "limit system: M=" << b.m << " steps=" << b.path.steps() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting particles with near-stable collateral jumps"};
  app.require_subcommand(1);

  std::string sim_config;
  std::string sim_out = ".";
  std::size_t sim_n = 0;
  bool sim_limit = false;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Simulate one bundle and write its paths and events");
  simulate->add_option("--config", sim_config, "JSON config (model, law, horizon)")->check(CLI::ExistingFile);
  simulate->add_option("--n", sim_n, "Particle count (default: first entry of n_grid)");
  simulate->add_flag("--limit", sim_limit, "Simulate the limit system with M particles instead");
  simulate->add_option("--seed", sim_seed, "Root seed (overrides the config)");
  simulate->add_option("--out", sim_out, "Output directory");

  std::string exp_name;
  std::string exp_config;
  std::string exp_out;
  std::uint64_t exp_seed = 0;
  std::size_t exp_threads = 0;
  bool dry_run = false;
  auto* experiment = app.add_subcommand("experiment", "Run one experiment of the catalog");
  experiment->add_option("name", exp_name,
                         "stable_clt | time_change_poisson | collateral_limit | chaos_sweep | "
                         "common_noise | limit_selfcheck");
  experiment->add_option("--config", exp_config, "JSON config file")->check(CLI::ExistingFile);
  experiment->add_option("--seed", exp_seed, "Root seed (overrides the config)");
  experiment->add_option("--out", exp_out, "Output directory (overrides the config)");
  experiment->add_option("--threads", exp_threads, "Worker threads (overrides the config)");
  experiment->add_flag("--dry-run", dry_run, "Validate the config and print it, then exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      ExperimentConfig cfg = sim_config.empty() ? default_config(Experiment::ChaosSweep) : load_config(sim_config);
      if (simulate->count("--seed")) cfg.root_seed = sim_seed;
      cfg.validate();
      fs::create_directories(sim_out);
      if (sim_limit) {
        write_limit(cfg, sim_out);
      } else {
        write_finite(cfg, sim_n ? sim_n : cfg.n_grid.front(), sim_out);
      }
      return 0;
    }

    ExperimentConfig cfg = resolve_config(exp_name, exp_config);
    if (experiment->count("--seed")) cfg.root_seed = exp_seed;
    if (experiment->count("--out")) cfg.out_path = exp_out;
    if (experiment->count("--threads")) cfg.threads = exp_threads;
    cfg.validate();
    if (dry_run) {
      std::cout << config_to_json_text(cfg) << "\n";
      return 0;
    }
    const RunSummary summary = run_experiment(cfg);
    fs::create_directories(cfg.out_path);
    for (const auto& [file, table] : summary.outputs) {
      const fs::path p = fs::path(cfg.out_path) / file;
      table.write_file(p.string());
      std::cout << "wrote " << p.string() << "\n";
    }
    for (const auto& line : summary.lines) std::cout << line << "\n";
    std::cout << to_string(cfg.experiment) << ": " << (summary.passed ? "PASS" : "FAIL") << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  }
}
