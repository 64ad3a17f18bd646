#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nearstable/model.hpp"
#include "nearstable/stable_noise.hpp"

namespace nearstable {

enum class Experiment {
  StableClt,
  TimeChangePoisson,
  CollateralLimit,
  ChaosSweep,
  CommonNoise,
  LimitSelfcheck,
};

std::string to_string(Experiment e);
/// Throws ConfigError for unknown names.
Experiment experiment_from_string(const std::string& name);

/// Acceptance thresholds. Fixed before any run; the experiment summaries
/// compare against these values and nothing else.
struct Thresholds {
  /// stable_clt / collateral_limit: KS statistic at the largest N.
  double ks_max = 0.05;
  /// stable_clt: allowed increase of the KS statistic between consecutive N.
  double ks_trend_slack = 0.01;
  /// time_change_poisson: per-replica KS p-value cutoff and required pass fraction.
  double poisson_p_min = 0.01;
  double poisson_pass_fraction = 0.95;
  /// common_noise: var_finite at the largest N must exceed this times var_limit_ref.
  double common_noise_ratio = 0.5;
  /// limit_selfcheck: w1 <= ratio * mc_se for each knob.
  double selfcheck_ratio = 2.0;
};

/// Everything one experiment run depends on besides the code.
struct ExperimentConfig {
  Experiment experiment = Experiment::StableClt;
  ModelSpec model;
  DoaLaw doa;
  std::vector<std::size_t> n_grid{64, 512, 4096};
  /// Limit-system particle count.
  std::size_t m = 2000;
  double horizon = 1.0;
  /// Limit-system step.
  double h = 1e-3;
  std::size_t replicas = 200;
  /// Limit-system replicas (fresh stable path each); 0 means `replicas`.
  std::size_t limit_replicas = 0;
  /// Direct stable draws for KS references; 0 means `replicas`.
  std::size_t reference_samples = 0;
  std::vector<double> output_times{1.0};
  std::uint64_t root_seed = 1;
  std::string out_path = ".";
  double drift_substep = 1e-2;
  /// collateral_limit: the finite J^N is read at the random time where A^N reaches this level.
  double collateral_level = 1.0;
  std::size_t threads = 1;
  Thresholds thresholds;

  std::size_t effective_limit_replicas() const { return limit_replicas ? limit_replicas : replicas; }
  std::size_t effective_reference_samples() const {
    return reference_samples ? reference_samples : replicas;
  }

  /// Throws ConfigError on inconsistent fields.
  void validate() const;
};

/// Documented defaults for each experiment; the acceptance suite starts from these.
ExperimentConfig default_config(Experiment e);

/// Reads a JSON config file. Keys not present keep the defaults of the named experiment.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Results. Every run returns typed rows plus a pass/fail summary against the
// config thresholds.

struct StableCltRow {
  std::size_t n;
  double ks_stat;
  std::size_t n_samples;
};

struct StableCltResult {
  std::vector<StableCltRow> rows;
  bool below_threshold = false;  ///< KS at the largest N < ks_max
  bool trend_ok = false;         ///< non-increasing up to ks_trend_slack
};

struct PoissonRow {
  std::size_t replica;
  std::size_t n_events;
  double ks_p;  ///< NaN for replicas without events (excluded)
};

struct PoissonResult {
  std::vector<PoissonRow> rows;
  std::size_t counted = 0;
  std::size_t excluded = 0;
  double pass_fraction = 0.0;
  bool passed = false;
};

struct ChaosRow {
  std::size_t n;
  double t;
  double w1;
  std::size_t n_pooled;
};

struct ChaosResult {
  std::vector<ChaosRow> rows;
  /// W1 at the last output time is strictly smaller at the largest N than at the smallest.
  bool trend_ok = false;
};

struct CommonNoiseRow {
  std::size_t n;
  double var_finite;
  double var_limit_ref;
};

struct CommonNoiseResult {
  std::vector<CommonNoiseRow> rows;
  /// Same schema; var_finite from the zero-collateral control, whose limit
  /// variance is exactly 0.
  std::vector<CommonNoiseRow> control_rows;
  bool low_precision = false;
  bool persistence_ok = false;      ///< var_finite(largest N) >= ratio * var_limit_ref
  bool control_decreasing = false;  ///< control variance strictly decreasing in N
};

struct SelfcheckRow {
  std::string knob;
  double value_a;
  double value_b;
  double w1;
  double mc_se;
};

struct SelfcheckResult {
  std::vector<SelfcheckRow> rows;
  bool passed = false;
};

StableCltResult run_stable_clt(const ExperimentConfig& cfg);
PoissonResult run_time_change_poisson(const ExperimentConfig& cfg);
StableCltResult run_collateral_limit(const ExperimentConfig& cfg);
ChaosResult run_chaos_sweep(const ExperimentConfig& cfg);
CommonNoiseResult run_common_noise(const ExperimentConfig& cfg);
SelfcheckResult run_limit_selfcheck(const ExperimentConfig& cfg);

/// Monte Carlo noise scale of a two-sample W1: the mean W1 between the two
/// halves of `rounds` random equal splits of the pooled samples, i.e. the W1
/// expected between two independent samples of this size from one law.
double w1_permutation_scale(const std::vector<double>& a, const std::vector<double>& b,
                            std::size_t rounds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CSV

/// Numbers are written with 17 significant digits so reruns are bit-identical.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;

  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;
};

CsvTable to_csv(const StableCltResult& r);
CsvTable to_csv(const PoissonResult& r);
CsvTable to_csv(const ChaosResult& r);
CsvTable to_csv(const std::vector<CommonNoiseRow>& rows);
CsvTable to_csv(const SelfcheckResult& r);

struct RunSummary {
  bool passed = false;
  std::vector<std::string> lines;
  /// File name -> table.
  std::vector<std::pair<std::string, CsvTable>> outputs;
};

/// Runs the configured experiment and collects its CSV outputs.
RunSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace nearstable
