#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nearstable/model.hpp"
#include "nearstable/random.hpp"
#include "nearstable/stable_noise.hpp"

namespace nearstable {

/// Exact increments of the strictly stable process on a fixed grid.
struct StablePathGrid {
  double step = 0.0;
  double horizon = 0.0;
  StableParams params;
  std::vector<double> increments;

  std::size_t steps() const { return increments.size(); }
  /// Left endpoint of step k; the last step may be shorter than `step`.
  double time(std::size_t k) const;
  /// S at every grid point, starting with S(0) = 0.
  std::vector<double> partial_sums() const;
  /// Path with step 2h whose increments are the pairwise sums of this one.
  StablePathGrid coarsen() const;
};

/// ceil(T/h) steps, computed so that T/h within rounding of an integer is not
/// rounded up to an extra sliver step.
std::size_t grid_steps(double horizon, double step);

StablePathGrid sample_stable_path(const StableParams& params, double horizon, double step,
                                  RandomStream& stream);

struct LimitOptions {
  bool record_paths = false;
  std::vector<double> output_times;
  /// Particle i reads its initial position and main-jump draws from the
  /// per-particle stream stream_index[i]; empty means identity.
  std::vector<std::size_t> stream_index;
};

/// M conditionally i.i.d. limit particles sharing one stable path.
struct LimitBundle {
  ModelSpec spec;
  std::size_t m = 0;
  StablePathGrid path;
  /// Grid point k sits at path.time(k); the last one at the horizon.
  std::vector<double> grid;
  /// mu_hat(f) at the left endpoint of every step.
  std::vector<double> rate_mean;
  /// Common increment mu_hat(f)^(1/alpha) * dS applied on every step.
  std::vector<double> common_increments;
  /// Row-major (grid point, particle); empty unless record_paths.
  std::vector<double> states;
  std::vector<double> initial;
  std::vector<double> output_times;
  std::vector<std::vector<double>> snapshots;

  bool has_paths() const { return !states.empty(); }
  double state(std::size_t k, std::size_t i) const { return states[k * m + i]; }
  const std::vector<double>& snapshot_at(double t) const;
  std::vector<double> final_state() const;
};

/// Euler-type scheme on the stable grid: per step, the drift is advanced by one
/// RK4 step of the coupled M-particle ODE, each particle jumps by psi with
/// probability 1 - exp(-f h), and every particle receives the same increment
/// mu_hat_t(f)^(1/alpha) * dS. All coefficients are read at the left endpoint.
LimitBundle simulate_limit(const ModelSpec& spec, std::size_t m, const StablePathGrid& path,
                           const SeedTree& seeds, const LimitOptions& options = {});

/// Draws the stable path from seeds.stream("limit/stable") and simulates.
LimitBundle simulate_limit(const ModelSpec& spec, std::size_t m, double horizon, double step,
                           const StableParams& params, const SeedTree& seeds,
                           const LimitOptions& options = {});

/// Empirical measure (atoms) of the limit particles at the grid point at or
/// immediately before t.
std::vector<double> directing_measure_at(const LimitBundle& bundle, double t);

struct ConditionalIidReport {
  std::size_t replicas = 0;
  /// Across replicas with one frozen stable path.
  double conditional_covariance = 0.0;
  double conditional_correlation = 0.0;
  double conditional_correlation_se = 0.0;  ///< bootstrap standard error
  /// Across replicas with fresh stable paths.
  double unconditional_covariance = 0.0;
  double unconditional_correlation = 0.0;
  double unconditional_correlation_se = 0.0;
};

/// Freezes one stable path and reruns the M-particle system with fresh
/// per-particle streams; reports the cross-replica correlation of g(X^1_T) and
/// g(X^2_T). The same statistic over fresh stable paths is reported alongside.
ConditionalIidReport conditional_iid_check(const ModelSpec& spec, std::size_t m, double horizon,
                                           double step, const StableParams& params,
                                           const SeedTree& seeds, std::size_t replicas,
                                           const std::function<double(double)>& g,
                                           std::size_t bootstrap_rounds = 500);

}  // namespace nearstable
