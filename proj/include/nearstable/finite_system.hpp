#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nearstable/model.hpp"
#include "nearstable/random.hpp"
#include "nearstable/stable_noise.hpp"

namespace nearstable {

/// One candidate event of the thinning scheme.
struct EventRecord {
  double time = 0.0;
  std::size_t particle = 0;
  bool accepted = false;
  double u = 0.0;          ///< collateral draw; 0 for rejected candidates
  double main_jump = 0.0;  ///< psi value applied to the jumping particle
  std::size_t knot = 0;    ///< index of the grid point at the event time
};

struct FiniteOptions {
  /// Upper bound for a drift substep; the actual substep also never crosses an event.
  double drift_substep = 1e-2;
  /// Keep the N-vector of positions (and cumulative drift) at every grid point.
  bool record_paths = true;
  /// Keep rejected candidates in the event log.
  bool log_rejected = true;
  /// Times at which full snapshots are stored, even without record_paths.
  std::vector<double> output_times;
  /// Overrides draws from the initial law.
  std::optional<std::vector<double>> initial_positions;
  /// Candidate index k is mapped to particle index_map[k]; empty means identity.
  std::vector<std::size_t> index_map;
  /// Multiplies every collateral kick. 0 gives the classical-chaos control.
  double collateral_scale = 1.0;
};

/// Paths of the N particles on the simulation grid plus the full event log.
///
/// Grid points are: 0, every candidate event time, every drift substep end,
/// every output time and the horizon. States are right-continuous: at an event
/// time the stored positions are the post-jump ones.
struct TrajectoryBundle {
  ModelSpec spec;
  DoaLaw doa;
  std::size_t n = 0;
  double horizon = 0.0;
  /// N^{-1/alpha} times the collateral scale; every kick is u * collateral_factor.
  double collateral_factor = 0.0;

  std::vector<double> grid;
  /// mu^N(f) just before and just after each grid point.
  std::vector<double> rate_before;
  std::vector<double> rate_after;

  std::vector<double> initial;
  /// Row-major (grid point, particle); empty unless record_paths.
  std::vector<double> states;
  std::vector<double> drift_cumulative;

  std::vector<EventRecord> events;
  std::size_t accepted_count = 0;

  std::vector<double> output_times;
  std::vector<std::vector<double>> snapshots;

  bool has_paths() const { return !states.empty(); }
  double state(std::size_t knot, std::size_t i) const { return states[knot * n + i]; }
  std::span<const double> state_row(std::size_t knot) const {
    return std::span<const double>(states).subspan(knot * n, n);
  }
  /// Positions at the given output time; throws if it was not requested.
  const std::vector<double>& snapshot_at(double t) const;
};

/// Exact-in-law simulation of the N-particle system by thinning at the global
/// bound N * ||f||_inf, with a fixed-substep RK4 integrator for the coupled
/// drift between candidate events.
TrajectoryBundle simulate_finite(const ModelSpec& spec, std::size_t n, double horizon,
                                 const DoaLaw& doa, const SeedTree& seeds,
                                 const FiniteOptions& options = {});

/// Collateral-sum fast path for b = 0, psi = 0, f = rate: J^N at each of the
/// (increasing) times, drawing only the event clock and the collateral marks.
/// Work is O(1) per event; positions are never materialized.
std::vector<double> sample_collateral_sum(double rate, std::size_t n, const DoaLaw& doa,
                                          std::span<const double> times, RandomStream& stream);

/// A^N(t) = int_0^t mu^N_s(f) ds, piecewise linear between grid points.
struct TimeChange {
  std::vector<double> knots;
  std::vector<double> values;
  double f_lower = 0.0;
  double f_upper = 0.0;

  double at(double t) const;
  /// Smallest t with A(t) = a; requires 0 <= a <= A(horizon).
  double inverse(double a) const;
};

/// Trapezoid rule on the recorded mu^N(f) values along the grid. For a
/// constant rate c the closed form A(t) = c t is used.
TimeChange cumulated_intensity(const TrajectoryBundle& bundle);

/// Paths of the four parts of X^{N,i} - X^{N,i}_0 on the bundle grid.
struct Decomposition {
  std::vector<double> drift;       ///< B: integrated drift
  std::vector<double> main_jumps;  ///< I: own main jumps
  std::vector<double> collateral;  ///< J: sum of all kicks
  std::vector<double> self_kicks;  ///< E: kicks drawn by particle i's own events
};

/// J^N on the bundle grid; needs only the event log.
std::vector<double> collateral_path(const TrajectoryBundle& bundle);

Decomposition decompose_trajectory(const TrajectoryBundle& bundle, std::size_t i);

/// s_k = N * A(t_k) for the accepted event times t_k.
std::vector<double> transformed_event_times(const TrajectoryBundle& bundle);

}  // namespace nearstable
