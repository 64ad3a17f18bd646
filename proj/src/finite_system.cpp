#include "nearstable/finite_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nearstable/errors.hpp"

namespace nearstable {

const std::vector<double>& TrajectoryBundle::snapshot_at(double t) const {
  for (std::size_t k = 0; k < output_times.size(); ++k) {
    if (output_times[k] == t) {
      return snapshots[k];
    }
  }
  throw ConfigError("no snapshot recorded at t = " + std::to_string(t));
}

namespace {

class FiniteSimulator {
 public:
  FiniteSimulator(const ModelSpec& spec, std::size_t n, double horizon, const DoaLaw& doa,
                  const SeedTree& seeds, const FiniteOptions& options)
      : spec_(spec),
        opts_(options),
        n_(n),
        clock_(seeds.stream("finite/clock")),
        marks_(seeds.stream("finite/marks")) {
    bundle_.spec = spec;
    bundle_.doa = doa;
    bundle_.n = n;
    bundle_.horizon = horizon;
    bundle_.collateral_factor =
        std::pow(static_cast<double>(n), -1.0 / spec.alpha) * options.collateral_scale;

    if (options.initial_positions) {
      if (options.initial_positions->size() != n) {
        throw ConfigError("initial_positions must hold exactly N values");
      }
      x_ = *options.initial_positions;
    } else {
      x_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        RandomStream s = seeds.stream("finite/initial", i);
        x_[i] = spec.initial.sample(s);
      }
    }
    if (!options.index_map.empty()) {
      if (options.index_map.size() != n) {
        throw ConfigError("index_map must hold exactly N entries");
      }
      std::vector<bool> seen(n, false);
      for (std::size_t k : options.index_map) {
        if (k >= n || seen[k]) {
          throw ConfigError("index_map must be a permutation of 0..N-1");
        }
        seen[k] = true;
      }
    }
    bundle_.initial = x_;
    own_ = x_;
    self_kicks_.assign(n, 0.0);
    drift_cum_.assign(n, 0.0);
    use_drift_ = !spec.drift.is_zero();
    if (use_drift_) {
      k1_.resize(n);
      k2_.resize(n);
      k3_.resize(n);
      k4_.resize(n);
      tmp_.resize(n);
    }

    bundle_.output_times = options.output_times;
    std::sort(bundle_.output_times.begin(), bundle_.output_times.end());
    for (double t : bundle_.output_times) {
      if (!(t >= 0.0 && t <= horizon)) {
        throw ConfigError("output times must lie in [0, T]");
      }
    }
    bundle_.snapshots.resize(bundle_.output_times.size());
  }

  TrajectoryBundle run() {
    const double horizon = bundle_.horizon;
    const double f_upper = spec_.f_upper();
    const double candidate_rate = static_cast<double>(n_) * f_upper;

    double rate_now = spec_.rate_mean(x_);
    push_knot(0.0, rate_now, rate_now);
    take_snapshots(0.0);

    double t = 0.0;
    double next_candidate = horizon > 0.0 ? clock_.exponential() / candidate_rate
                                          : std::numeric_limits<double>::infinity();
    while (t < horizon) {
      double stop = std::min(next_candidate, horizon);
      if (next_output_ < bundle_.output_times.size()) {
        stop = std::min(stop, bundle_.output_times[next_output_]);
      }
      rate_now = advance_drift(t, stop, rate_now);
      t = stop;
      if (t == next_candidate && t <= horizon) {
        rate_now = handle_candidate(t, rate_now, f_upper);
        next_candidate = t + clock_.exponential() / candidate_rate;
      }
      take_snapshots(t);
    }
    if (opts_.record_paths) {
      bundle_.drift_cumulative.shrink_to_fit();
    }
    return std::move(bundle_);
  }

 private:
  void push_knot(double t, double before, double after) {
    bundle_.grid.push_back(t);
    bundle_.rate_before.push_back(before);
    bundle_.rate_after.push_back(after);
    if (opts_.record_paths) {
      bundle_.states.insert(bundle_.states.end(), x_.begin(), x_.end());
      bundle_.drift_cumulative.insert(bundle_.drift_cumulative.end(), drift_cum_.begin(),
                                      drift_cum_.end());
    }
  }

  void overwrite_last_knot(double after) {
    bundle_.rate_after.back() = after;
    if (opts_.record_paths) {
      std::copy(x_.begin(), x_.end(), bundle_.states.end() - static_cast<std::ptrdiff_t>(n_));
    }
  }

  void take_snapshots(double t) {
    while (next_output_ < bundle_.output_times.size() && bundle_.output_times[next_output_] <= t) {
      bundle_.snapshots[next_output_] = x_;
      ++next_output_;
    }
  }

  // Integrates the coupled drift ODE over (from, to] and pushes the grid points.
  // Returns mu(f) at the new left limit.
  double advance_drift(double from, double to, double rate_now) {
    if (!use_drift_) {
      push_knot(to, rate_now, rate_now);
      return rate_now;
    }
    const double gap = to - from;
    const auto steps = static_cast<std::size_t>(
        std::max(1.0, std::ceil(gap / opts_.drift_substep)));
    const double h = gap / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) {
      rk4_step(h);
      const double t = s + 1 == steps ? to : from + h * static_cast<double>(s + 1);
      rate_now = spec_.rate_mean(x_);
      push_knot(t, rate_now, rate_now);
    }
    return rate_now;
  }

  void rk4_step(double h) {
    spec_.drift_all(x_, k1_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x_[i] + 0.5 * h * k1_[i];
    spec_.drift_all(tmp_, k2_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x_[i] + 0.5 * h * k2_[i];
    spec_.drift_all(tmp_, k3_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x_[i] + h * k3_[i];
    spec_.drift_all(tmp_, k4_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double inc = h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
      own_[i] += inc;
      drift_cum_[i] += inc;
      x_[i] = own_[i] + (collateral_ - self_kicks_[i]);
      if (!std::isfinite(x_[i])) {
        throw NumericAbort("non-finite state in drift integration after event " +
                           std::to_string(bundle_.events.size()));
      }
    }
  }

  double handle_candidate(double t, double rate_now, double f_upper) {
    const std::size_t drawn = clock_.index(n_);
    const std::size_t i = opts_.index_map.empty() ? drawn : opts_.index_map[drawn];
    const double z = clock_.uniform();
    const bool accepted = z <= spec_.rate(x_[i]) / f_upper;
    const std::size_t knot = bundle_.grid.size() - 1;
    if (!accepted) {
      if (opts_.log_rejected) {
        bundle_.events.push_back({t, i, false, 0.0, 0.0, knot});
      }
      return rate_now;
    }

    const double u = sample_doa(bundle_.doa, marks_);
    const double kick = u * bundle_.collateral_factor;
    const double main = spec_.alpha < 1.0 ? spec_.main_jump(x_[i]) : 0.0;
    const std::size_t event_index = bundle_.events.size();
    bundle_.events.push_back({t, i, true, u, main, knot});
    ++bundle_.accepted_count;

    own_[i] += main;
    self_kicks_[i] += kick;
    collateral_ += kick;
    bool finite = std::isfinite(collateral_);
    for (std::size_t j = 0; j < n_; ++j) {
      x_[j] = own_[j] + (collateral_ - self_kicks_[j]);
      finite = finite && std::isfinite(x_[j]);
    }
    if (!finite) {
      throw NumericAbort("non-finite state at event " + std::to_string(event_index) +
                         " (t = " + std::to_string(t) + ")");
    }
    const double rate_after = spec_.rate_mean(x_);
    overwrite_last_knot(rate_after);
    return rate_after;
  }

  const ModelSpec& spec_;
  const FiniteOptions& opts_;
  std::size_t n_;
  RandomStream clock_;
  RandomStream marks_;
  TrajectoryBundle bundle_;
  // Positions are kept as own_ + (collateral_ - self_kicks_): the drift and
  // main jumps accumulate at the particle's own scale instead of at the scale
  // of the (heavy-tailed) collateral sum, and x_ is rounded once from the parts.
  std::vector<double> x_;
  std::vector<double> own_;
  std::vector<double> self_kicks_;
  double collateral_ = 0.0;
  std::vector<double> drift_cum_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
  bool use_drift_ = false;
  std::size_t next_output_ = 0;
};

}  // namespace

TrajectoryBundle simulate_finite(const ModelSpec& spec, std::size_t n, double horizon,
                                 const DoaLaw& doa, const SeedTree& seeds,
                                 const FiniteOptions& options) {
  spec.validate();
  doa.validate();
  if (n == 0) {
    throw ConfigError("the particle system needs N >= 1");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("horizon T must be finite and >= 0");
  }
  if (spec.alpha != doa.alpha) {
    throw ConfigError("model alpha and collateral tail index differ");
  }
  if (!(options.drift_substep > 0.0)) {
    throw ConfigError("drift substep must be positive");
  }
  return FiniteSimulator(spec, n, horizon, doa, seeds, options).run();
}

std::vector<double> sample_collateral_sum(double rate, std::size_t n, const DoaLaw& doa,
                                          std::span<const double> times, RandomStream& stream) {
  if (!(rate > 0.0) || n == 0) {
    throw ConfigError("collateral fast path needs rate > 0 and N >= 1");
  }
  const double candidate_rate = static_cast<double>(n) * rate;
  const double factor = std::pow(static_cast<double>(n), -1.0 / doa.alpha);
  std::vector<double> out;
  out.reserve(times.size());
  double t = stream.exponential() / candidate_rate;
  double sum = 0.0;
  for (double target : times) {
    while (t <= target) {
      sum += sample_doa(doa, stream);
      t += stream.exponential() / candidate_rate;
    }
    out.push_back(sum * factor);
  }
  return out;
}

double TimeChange::at(double t) const {
  if (knots.empty()) {
    return 0.0;
  }
  if (t <= knots.front()) {
    return values.front();
  }
  if (t >= knots.back()) {
    return values.back();
  }
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - knots.begin());
  const double w = (t - knots[k - 1]) / (knots[k] - knots[k - 1]);
  return values[k - 1] + w * (values[k] - values[k - 1]);
}

double TimeChange::inverse(double a) const {
  if (knots.empty() || a < values.front() || a > values.back()) {
    throw ConfigError("time-change level outside [A(0), A(T)]");
  }
  const auto it = std::lower_bound(values.begin(), values.end(), a);
  const std::size_t k = static_cast<std::size_t>(it - values.begin());
  if (k == 0) {
    return knots.front();
  }
  const double dv = values[k] - values[k - 1];
  const double w = dv > 0.0 ? (a - values[k - 1]) / dv : 1.0;
  return knots[k - 1] + w * (knots[k] - knots[k - 1]);
}

TimeChange cumulated_intensity(const TrajectoryBundle& bundle) {
  TimeChange tc;
  tc.knots = bundle.grid;
  tc.f_lower = bundle.spec.f_lower();
  tc.f_upper = bundle.spec.f_upper();
  tc.values.resize(bundle.grid.size());
  if (bundle.spec.rate.is_constant()) {
    const double c = tc.f_lower;
    for (std::size_t k = 0; k < bundle.grid.size(); ++k) {
      tc.values[k] = c * bundle.grid[k];
    }
    return tc;
  }
  double a = 0.0;
  for (std::size_t k = 0; k < bundle.grid.size(); ++k) {
    if (k > 0) {
      const double dt = bundle.grid[k] - bundle.grid[k - 1];
      a += 0.5 * (bundle.rate_after[k - 1] + bundle.rate_before[k]) * dt;
    }
    tc.values[k] = a;
  }
  return tc;
}

std::vector<double> collateral_path(const TrajectoryBundle& bundle) {
  std::vector<double> j(bundle.grid.size(), 0.0);
  double sum = 0.0;
  std::size_t e = 0;
  for (std::size_t k = 0; k < bundle.grid.size(); ++k) {
    for (; e < bundle.events.size() && bundle.events[e].knot <= k; ++e) {
      if (bundle.events[e].accepted) {
        sum += bundle.events[e].u * bundle.collateral_factor;
      }
    }
    j[k] = sum;
  }
  return j;
}

Decomposition decompose_trajectory(const TrajectoryBundle& bundle, std::size_t i) {
  if (i >= bundle.n) {
    throw ConfigError("particle index out of range");
  }
  const std::size_t knots = bundle.grid.size();
  Decomposition d;
  d.collateral = collateral_path(bundle);
  d.drift.assign(knots, 0.0);
  d.main_jumps.assign(knots, 0.0);
  d.self_kicks.assign(knots, 0.0);

  if (!bundle.spec.drift.is_zero()) {
    if (bundle.drift_cumulative.empty()) {
      throw ConfigError("drift decomposition needs a bundle simulated with record_paths");
    }
    for (std::size_t k = 0; k < knots; ++k) {
      d.drift[k] = bundle.drift_cumulative[k * bundle.n + i];
    }
  }

  double main = 0.0;
  double self = 0.0;
  std::size_t e = 0;
  for (std::size_t k = 0; k < knots; ++k) {
    for (; e < bundle.events.size() && bundle.events[e].knot <= k; ++e) {
      const EventRecord& ev = bundle.events[e];
      if (ev.accepted && ev.particle == i) {
        main += ev.main_jump;
        self += ev.u * bundle.collateral_factor;
      }
    }
    d.main_jumps[k] = main;
    d.self_kicks[k] = self;
  }
  return d;
}

std::vector<double> transformed_event_times(const TrajectoryBundle& bundle) {
  const TimeChange tc = cumulated_intensity(bundle);
  const double n = static_cast<double>(bundle.n);
  std::vector<double> s;
  s.reserve(bundle.accepted_count);
  for (const EventRecord& ev : bundle.events) {
    if (ev.accepted) {
      s.push_back(n * tc.values[ev.knot]);
    }
  }
  return s;
}

}  // namespace nearstable
