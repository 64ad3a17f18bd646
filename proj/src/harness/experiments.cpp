#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "nearstable/errors.hpp"
#include "nearstable/finite_system.hpp"
#include "nearstable/harness.hpp"
#include "nearstable/limit_system.hpp"
#include "nearstable/measures.hpp"
#include "nearstable/parallel.hpp"

namespace nearstable {

namespace {

SeedTree experiment_seeds(const ExperimentConfig& cfg) {
  return SeedTree(cfg.root_seed).child(to_string(cfg.experiment));
}

FiniteOptions lean_finite_options(const ExperimentConfig& cfg) {
  FiniteOptions opts;
  opts.record_paths = false;
  opts.log_rejected = false;
  opts.drift_substep = cfg.drift_substep;
  return opts;
}

std::vector<double> sorted_times(std::vector<double> ts) {
  std::sort(ts.begin(), ts.end());
  return ts;
}

// Direct draws of S_level from the stable target of the collateral law.
std::vector<double> stable_reference(const ExperimentConfig& cfg, const SeedTree& seeds, double level) {
  const StableParams target = stable_target_of(cfg.doa);
  std::vector<double> ref(cfg.effective_reference_samples());
  parallel_for(ref.size(), cfg.threads, [&](std::size_t k) {
    RandomStream s = seeds.stream("reference", k);
    ref[k] = sample_stable_increment(target, level, s);
  });
  return ref;
}

// Equalizes sample sizes by resampling the larger sample down to the smaller size.
double pooled_w1(const std::vector<double>& a, const std::vector<double>& b, RandomStream& stream) {
  Sample sa(a), sb(b);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(stream.index(n)); };
  if (sa.size() > sb.size()) {
    sa = resample(sa, sb.size(), pick);
  } else if (sb.size() > sa.size()) {
    sb = resample(sb, sa.size(), pick);
  }
  return wasserstein1_1d(sa, sb);
}

}  // namespace

StableCltResult run_stable_clt(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != Experiment::StableClt && cfg.experiment != Experiment::CollateralLimit) {
    throw ConfigError("run_stable_clt called with a different experiment");
  }
  const SeedTree seeds = experiment_seeds(cfg);
  const double c = cfg.model.f_lower();
  const Sample reference(stable_reference(cfg, seeds, c * cfg.horizon));

  StableCltResult result;
  const double horizon[] = {cfg.horizon};
  for (std::size_t n : cfg.n_grid) {
    const SeedTree per_n = seeds.child("finite", n);
    std::vector<double> sums(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
      RandomStream s = per_n.stream("replica", r);
      sums[r] = sample_collateral_sum(c, n, cfg.doa, horizon, s)[0];
    });
    result.rows.push_back({n, ks_statistic(Sample(std::move(sums)), reference).stat, cfg.replicas});
  }

  result.below_threshold = result.rows.back().ks_stat < cfg.thresholds.ks_max;
  result.trend_ok = true;
  for (std::size_t k = 1; k < result.rows.size(); ++k) {
    if (result.rows[k].ks_stat > result.rows[k - 1].ks_stat + cfg.thresholds.ks_trend_slack) {
      result.trend_ok = false;
    }
  }
  return result;
}

PoissonResult run_time_change_poisson(const ExperimentConfig& cfg) {
  cfg.validate();
  const SeedTree seeds = experiment_seeds(cfg);
  const std::size_t n = cfg.n_grid.front();
  const FiniteOptions opts = lean_finite_options(cfg);
  const std::function<double(double)> exp_cdf = [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); };

  PoissonResult result;
  result.rows.resize(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    const TrajectoryBundle bundle =
        simulate_finite(cfg.model, n, cfg.horizon, cfg.doa, seeds.child("replica", r), opts);
    const std::vector<double> s = transformed_event_times(bundle);
    PoissonRow row{r, s.size(), std::numeric_limits<double>::quiet_NaN()};
    if (!s.empty()) {
      std::vector<double> spacings(s.size());
      std::adjacent_difference(s.begin(), s.end(), spacings.begin());
      row.ks_p = ks_statistic(Sample(std::move(spacings)), exp_cdf).p;
    }
    result.rows[r] = row;
  });

  std::size_t above = 0;
  for (const auto& row : result.rows) {
    if (std::isnan(row.ks_p)) {
      ++result.excluded;
      continue;
    }
    ++result.counted;
    if (row.ks_p > cfg.thresholds.poisson_p_min) {
      ++above;
    }
  }
  result.pass_fraction =
      result.counted ? static_cast<double>(above) / static_cast<double>(result.counted) : 0.0;
  result.passed = result.counted > 0 && result.pass_fraction >= cfg.thresholds.poisson_pass_fraction;
  return result;
}

StableCltResult run_collateral_limit(const ExperimentConfig& cfg) {
  cfg.validate();
  const SeedTree seeds = experiment_seeds(cfg);
  const double level = cfg.collateral_level;
  const Sample reference(stable_reference(cfg, seeds, level));
  const FiniteOptions opts = lean_finite_options(cfg);

  StableCltResult result;
  for (std::size_t n : cfg.n_grid) {
    const SeedTree per_n = seeds.child("finite", n);
    std::vector<double> values(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
      const TrajectoryBundle bundle =
          simulate_finite(cfg.model, n, cfg.horizon, cfg.doa, per_n.child("replica", r), opts);
      const TimeChange tc = cumulated_intensity(bundle);
      const double tau = tc.inverse(level);
      const std::vector<double> j = collateral_path(bundle);
      const auto it = std::upper_bound(bundle.grid.begin(), bundle.grid.end(), tau);
      values[r] = j[static_cast<std::size_t>(it - bundle.grid.begin()) - 1];
    });
    result.rows.push_back({n, ks_statistic(Sample(std::move(values)), reference).stat, cfg.replicas});
  }
  result.below_threshold = result.rows.back().ks_stat < cfg.thresholds.ks_max;
  result.trend_ok = true;
  for (std::size_t k = 1; k < result.rows.size(); ++k) {
    if (result.rows[k].ks_stat > result.rows[k - 1].ks_stat + cfg.thresholds.ks_trend_slack) {
      result.trend_ok = false;
    }
  }
  return result;
}

ChaosResult run_chaos_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const SeedTree seeds = experiment_seeds(cfg);
  const StableParams target = stable_target_of(cfg.doa);
  if (target.alpha != cfg.model.alpha) {
    throw ConfigError("stable index of the limit differs from the model alpha");
  }
  const std::vector<double> times = sorted_times(cfg.output_times);
  const std::size_t n_times = times.size();

  // Limit reference: one particle per stable path, so the pooled sample follows
  // the unconditional marginal law of X^1_t. The other M - 1 particles only
  // feed the directing-measure estimate.
  const std::size_t limit_reps = cfg.effective_limit_replicas();
  std::vector<std::vector<double>> reference(n_times, std::vector<double>(limit_reps));
  LimitOptions lopts;
  lopts.output_times = times;
  parallel_for(limit_reps, cfg.threads, [&](std::size_t r) {
    const LimitBundle b =
        simulate_limit(cfg.model, cfg.m, cfg.horizon, cfg.h, target, seeds.child("limit", r), lopts);
    for (std::size_t k = 0; k < n_times; ++k) {
      reference[k][r] = b.snapshots[k][0];
    }
  });

  FiniteOptions fopts = lean_finite_options(cfg);
  fopts.output_times = times;
  const std::size_t grid_size = cfg.n_grid.size();
  std::vector<std::vector<std::vector<double>>> finite(
      grid_size, std::vector<std::vector<double>>(n_times, std::vector<double>(cfg.replicas)));
  // Largest N first so the long runs start early.
  parallel_for(grid_size * cfg.replicas, cfg.threads, [&](std::size_t task) {
    const std::size_t g = grid_size - 1 - task / cfg.replicas;
    const std::size_t r = task % cfg.replicas;
    const std::size_t n = cfg.n_grid[g];
    const TrajectoryBundle b = simulate_finite(cfg.model, n, cfg.horizon, cfg.doa,
                                               seeds.child("finite", n).child("replica", r), fopts);
    for (std::size_t k = 0; k < n_times; ++k) {
      finite[g][k][r] = b.snapshots[k][0];
    }
  });

  ChaosResult result;
  RandomStream resampler = seeds.stream("resample");
  for (std::size_t g = 0; g < grid_size; ++g) {
    for (std::size_t k = 0; k < n_times; ++k) {
      const double w1 = pooled_w1(finite[g][k], reference[k], resampler);
      result.rows.push_back({cfg.n_grid[g], times[k], w1, std::min(cfg.replicas, limit_reps)});
    }
  }
  const double first = result.rows[n_times - 1].w1;
  const double last = result.rows.back().w1;
  result.trend_ok = grid_size >= 2 && last < first;
  return result;
}

CommonNoiseResult run_common_noise(const ExperimentConfig& cfg) {
  cfg.validate();
  const SeedTree seeds = experiment_seeds(cfg);
  const StableParams target = stable_target_of(cfg.doa);
  auto mean_arctan = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += std::atan(x);
    return s / static_cast<double>(xs.size());
  };

  const std::size_t limit_reps = cfg.effective_limit_replicas();
  std::vector<double> limit_values(limit_reps);
  LimitOptions lopts;
  lopts.output_times = {cfg.horizon};
  parallel_for(limit_reps, cfg.threads, [&](std::size_t r) {
    const LimitBundle b =
        simulate_limit(cfg.model, cfg.m, cfg.horizon, cfg.h, target, seeds.child("limit", r), lopts);
    limit_values[r] = mean_arctan(b.snapshots.back());
  });
  const double var_limit = sample_variance(limit_values);

  FiniteOptions fopts = lean_finite_options(cfg);
  fopts.output_times = {cfg.horizon};
  FiniteOptions control_opts = fopts;
  control_opts.collateral_scale = 0.0;

  const std::size_t grid_size = cfg.n_grid.size();
  std::vector<std::vector<double>> values(grid_size, std::vector<double>(cfg.replicas));
  std::vector<std::vector<double>> control(grid_size, std::vector<double>(cfg.replicas));
  parallel_for(grid_size * cfg.replicas, cfg.threads, [&](std::size_t task) {
    const std::size_t g = grid_size - 1 - task / cfg.replicas;
    const std::size_t r = task % cfg.replicas;
    const std::size_t n = cfg.n_grid[g];
    const SeedTree rs = seeds.child("finite", n).child("replica", r);
    values[g][r] =
        mean_arctan(simulate_finite(cfg.model, n, cfg.horizon, cfg.doa, rs, fopts).snapshots.back());
    control[g][r] = mean_arctan(
        simulate_finite(cfg.model, n, cfg.horizon, cfg.doa, rs, control_opts).snapshots.back());
  });

  CommonNoiseResult result;
  result.low_precision = cfg.replicas < 30;
  for (std::size_t g = 0; g < grid_size; ++g) {
    result.rows.push_back({cfg.n_grid[g], sample_variance(values[g]), var_limit});
    result.control_rows.push_back({cfg.n_grid[g], sample_variance(control[g]), 0.0});
  }
  result.persistence_ok =
      result.rows.back().var_finite >= cfg.thresholds.common_noise_ratio * var_limit;
  result.control_decreasing = grid_size >= 2;
  for (std::size_t g = 1; g < grid_size; ++g) {
    if (!(result.control_rows[g].var_finite < result.control_rows[g - 1].var_finite)) {
      result.control_decreasing = false;
    }
  }
  return result;
}

double w1_permutation_scale(const std::vector<double>& a, const std::vector<double>& b,
                            std::size_t rounds, std::uint64_t seed) {
  if (a.size() != b.size() || a.empty() || rounds == 0) {
    throw ConfigError("permutation scale needs two equal-length non-empty samples");
  }
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto half = static_cast<std::ptrdiff_t>(a.size());
  RandomStream stream(seed);
  double total = 0.0;
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t k = pooled.size() - 1; k > 0; --k) {
      std::swap(pooled[k], pooled[stream.index(k + 1)]);
    }
    total += wasserstein1_1d(Sample(std::vector<double>(pooled.begin(), pooled.begin() + half)),
                             Sample(std::vector<double>(pooled.begin() + half, pooled.end())));
  }
  return total / static_cast<double>(rounds);
}

SelfcheckResult run_limit_selfcheck(const ExperimentConfig& cfg) {
  cfg.validate();
  const SeedTree seeds = experiment_seeds(cfg);
  const StableParams target = stable_target_of(cfg.doa);
  LimitOptions lopts;
  lopts.output_times = {cfg.horizon};

  // Paired runs share the stable path (the coarse one sums pairs of fine
  // increments) and the per-particle streams.
  std::vector<double> coarse(cfg.replicas), fine(cfg.replicas), doubled(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    const SeedTree rs = seeds.child("replica", r);
    RandomStream stable = rs.stream("stable");
    const StablePathGrid fine_path = sample_stable_path(target, cfg.horizon, cfg.h / 2.0, stable);
    const StablePathGrid coarse_path = fine_path.coarsen();
    const SeedTree particles = rs.child("particles");
    coarse[r] = simulate_limit(cfg.model, cfg.m, coarse_path, particles, lopts).snapshots.back()[0];
    fine[r] = simulate_limit(cfg.model, cfg.m, fine_path, particles, lopts).snapshots.back()[0];
    doubled[r] = simulate_limit(cfg.model, 2 * cfg.m, coarse_path, particles, lopts).snapshots.back()[0];
  });

  SelfcheckResult result;
  const std::uint64_t h_seed = seeds.derive("null/h");
  const std::uint64_t m_seed = seeds.derive("null/M");
  result.rows.push_back({"h", cfg.h, cfg.h / 2.0, wasserstein1_1d(Sample(coarse), Sample(fine)),
                         w1_permutation_scale(coarse, fine, 200, h_seed)});
  result.rows.push_back({"M", static_cast<double>(cfg.m), static_cast<double>(2 * cfg.m),
                         wasserstein1_1d(Sample(coarse), Sample(doubled)),
                         w1_permutation_scale(coarse, doubled, 200, m_seed)});
  result.passed = std::all_of(result.rows.begin(), result.rows.end(), [&](const SelfcheckRow& row) {
    return row.w1 <= cfg.thresholds.selfcheck_ratio * row.mc_se;
  });
  return result;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  RunSummary s;
  const std::string name = to_string(cfg.experiment);
  const std::string seed_note = "experiment=" + name + " root_seed=" + std::to_string(cfg.root_seed);
  auto add = [&](const std::string& file, CsvTable table) {
    table.comments.insert(table.comments.begin(), seed_note);
    s.outputs.emplace_back(file, std::move(table));
  };
  auto flag = [](bool b) { return std::string(b ? "yes" : "no"); };

  switch (cfg.experiment) {
    case Experiment::StableClt:
    case Experiment::CollateralLimit: {
      const StableCltResult r =
          cfg.experiment == Experiment::StableClt ? run_stable_clt(cfg) : run_collateral_limit(cfg);
      add(name + ".csv", to_csv(r));
      s.lines.push_back("ks_at_largest_N=" + format_number(r.rows.back().ks_stat) +
                        " below_threshold=" + flag(r.below_threshold));
      s.lines.push_back("trend_non_increasing=" + flag(r.trend_ok));
      s.passed = r.below_threshold && r.trend_ok;
      break;
    }
    case Experiment::TimeChangePoisson: {
      const PoissonResult r = run_time_change_poisson(cfg);
      add(name + ".csv", to_csv(r));
      s.lines.push_back("pass_fraction=" + format_number(r.pass_fraction) + " counted=" +
                        std::to_string(r.counted) + " excluded=" + std::to_string(r.excluded));
      s.passed = r.passed;
      break;
    }
    case Experiment::ChaosSweep: {
      const ChaosResult r = run_chaos_sweep(cfg);
      add(name + ".csv", to_csv(r));
      s.lines.push_back("w1_decreases_from_smallest_to_largest_N=" + flag(r.trend_ok));
      s.passed = r.trend_ok;
      break;
    }
    case Experiment::CommonNoise: {
      const CommonNoiseResult r = run_common_noise(cfg);
      CsvTable main = to_csv(r.rows);
      CsvTable control = to_csv(r.control_rows);
      if (r.low_precision) {
        main.comments.push_back("low_precision: fewer than 30 replicas");
        control.comments.push_back("low_precision: fewer than 30 replicas");
      }
      control.comments.push_back("zero-collateral control; its limit variance is exactly 0");
      add(name + ".csv", std::move(main));
      add(name + "_control.csv", std::move(control));
      s.lines.push_back("persistence=" + flag(r.persistence_ok) +
                        " control_decreasing=" + flag(r.control_decreasing));
      s.passed = r.persistence_ok && r.control_decreasing;
      break;
    }
    case Experiment::LimitSelfcheck: {
      const SelfcheckResult r = run_limit_selfcheck(cfg);
      add(name + ".csv", to_csv(r));
      for (const auto& row : r.rows) {
        s.lines.push_back(row.knob + ": w1=" + format_number(row.w1) + " mc_se=" + format_number(row.mc_se));
      }
      s.passed = r.passed;
      break;
    }
  }
  return s;
}

}  // namespace nearstable
