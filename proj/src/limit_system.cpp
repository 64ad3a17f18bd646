#include "nearstable/limit_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nearstable/errors.hpp"
#include "nearstable/measures.hpp"

namespace nearstable {

std::size_t grid_steps(double horizon, double step) {
  const double ratio = horizon / step;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::size_t>(std::max(1.0, nearest));
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

double StablePathGrid::time(std::size_t k) const {
  if (k >= increments.size()) {
    return horizon;
  }
  return step * static_cast<double>(k);
}

std::vector<double> StablePathGrid::partial_sums() const {
  std::vector<double> s(increments.size() + 1, 0.0);
  for (std::size_t k = 0; k < increments.size(); ++k) {
    s[k + 1] = s[k] + increments[k];
  }
  return s;
}

StablePathGrid StablePathGrid::coarsen() const {
  StablePathGrid out;
  out.step = 2.0 * step;
  out.horizon = horizon;
  out.params = params;
  out.increments.reserve((increments.size() + 1) / 2);
  for (std::size_t k = 0; k < increments.size(); k += 2) {
    double inc = increments[k];
    if (k + 1 < increments.size()) {
      inc += increments[k + 1];
    }
    out.increments.push_back(inc);
  }
  return out;
}

StablePathGrid sample_stable_path(const StableParams& params, double horizon, double step,
                                  RandomStream& stream) {
  params.validate();
  if (!(step > 0.0) || !(horizon > 0.0)) {
    throw ConfigError("stable path needs T > 0 and h > 0");
  }
  StablePathGrid path;
  path.step = step;
  path.horizon = horizon;
  path.params = params;
  const std::size_t steps = grid_steps(horizon, step);
  path.increments.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double len = k + 1 == steps ? horizon - step * static_cast<double>(k) : step;
    path.increments[k] = sample_stable_increment(params, len, stream);
  }
  return path;
}

const std::vector<double>& LimitBundle::snapshot_at(double t) const {
  for (std::size_t k = 0; k < output_times.size(); ++k) {
    if (output_times[k] == t) {
      return snapshots[k];
    }
  }
  throw ConfigError("no limit snapshot recorded at t = " + std::to_string(t));
}

std::vector<double> LimitBundle::final_state() const {
  if (has_paths()) {
    return std::vector<double>(states.end() - static_cast<std::ptrdiff_t>(m), states.end());
  }
  if (!output_times.empty() && output_times.back() == path.horizon) {
    return snapshots.back();
  }
  throw ConfigError("limit bundle holds neither paths nor a snapshot at T");
}

namespace {

// Largest grid index whose time is <= t (up to rounding of the grid times).
std::size_t knot_at_or_before(const std::vector<double>& grid, double t) {
  const double slack = 1e-12 * std::max(1.0, grid.back());
  const auto it = std::upper_bound(grid.begin(), grid.end(), t + slack);
  return static_cast<std::size_t>(it - grid.begin()) - 1;
}

}  // namespace

LimitBundle simulate_limit(const ModelSpec& spec, std::size_t m, const StablePathGrid& path,
                           const SeedTree& seeds, const LimitOptions& options) {
  spec.validate();
  if (m == 0) {
    throw ConfigError("limit system needs M >= 1");
  }
  if (spec.alpha != path.params.alpha) {
    throw ConfigError("model alpha and stable index differ");
  }
  if (!(path.step < path.horizon)) {
    throw ConfigError("limit step h must be smaller than T");
  }
  if (!options.stream_index.empty() && options.stream_index.size() != m) {
    throw ConfigError("stream_index must hold exactly M entries");
  }

  LimitBundle b;
  b.spec = spec;
  b.m = m;
  b.path = path;
  const std::size_t steps = path.steps();
  b.grid.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    b.grid[k] = path.time(k);
  }

  std::vector<RandomStream> streams;
  streams.reserve(m);
  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t idx = options.stream_index.empty() ? i : options.stream_index[i];
    streams.push_back(seeds.stream("limit/particle", idx));
    x[i] = spec.initial.sample(streams.back());
  }
  b.initial = x;

  b.output_times = options.output_times;
  std::sort(b.output_times.begin(), b.output_times.end());
  std::vector<std::size_t> output_knots;
  for (double t : b.output_times) {
    if (!(t >= 0.0 && t <= path.horizon)) {
      throw ConfigError("output times must lie in [0, T]");
    }
    output_knots.push_back(knot_at_or_before(b.grid, t));
  }
  b.snapshots.resize(b.output_times.size());
  std::size_t next_output = 0;
  auto record = [&](std::size_t k) {
    if (options.record_paths) {
      b.states.insert(b.states.end(), x.begin(), x.end());
    }
    while (next_output < output_knots.size() && output_knots[next_output] == k) {
      b.snapshots[next_output++] = x;
    }
  };
  record(0);

  const bool use_drift = !spec.drift.is_zero();
  const bool use_jumps = spec.alpha < 1.0 && !spec.main_jump.is_zero();
  const double inv_alpha = 1.0 / spec.alpha;
  std::vector<double> k1, k2, k3, k4, tmp;
  if (use_drift) {
    k1.resize(m);
    k2.resize(m);
    k3.resize(m);
    k4.resize(m);
    tmp.resize(m);
  }
  b.rate_mean.resize(steps);
  b.common_increments.resize(steps);

  for (std::size_t k = 0; k < steps; ++k) {
    const double h = b.grid[k + 1] - b.grid[k];
    const double rate = spec.rate_mean(x);
    const double common = std::pow(rate, inv_alpha) * path.increments[k];
    b.rate_mean[k] = rate;
    b.common_increments[k] = common;

    if (use_drift) {
      spec.drift_all(x, k1);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      spec.drift_all(tmp, k2);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      spec.drift_all(tmp, k3);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + h * k3[i];
      spec.drift_all(tmp, k4);
    }
    bool finite = std::isfinite(common);
    for (std::size_t i = 0; i < m; ++i) {
      const double left = x[i];
      double next = left;
      if (use_drift) {
        next += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      if (use_jumps) {
        const double p = -std::expm1(-spec.rate(left) * h);
        if (streams[i].uniform() < p) {
          next += spec.main_jump(left);
        }
      }
      next += common;
      x[i] = next;
      finite = finite && std::isfinite(next);
    }
    if (!finite) {
      throw NumericAbort("non-finite limit state at step " + std::to_string(k));
    }
    record(k + 1);
  }
  return b;
}

LimitBundle simulate_limit(const ModelSpec& spec, std::size_t m, double horizon, double step,
                           const StableParams& params, const SeedTree& seeds,
                           const LimitOptions& options) {
  if (!(step > 0.0) || !(step < horizon)) {
    throw ConfigError("limit step h must satisfy 0 < h < T");
  }
  RandomStream stable = seeds.stream("limit/stable");
  return simulate_limit(spec, m, sample_stable_path(params, horizon, step, stable), seeds, options);
}

std::vector<double> directing_measure_at(const LimitBundle& bundle, double t) {
  if (!(t >= 0.0) || t > bundle.path.horizon) {
    throw ConfigError("directing measure requested outside [0, T]");
  }
  const std::size_t k = knot_at_or_before(bundle.grid, t);
  if (bundle.has_paths()) {
    return std::vector<double>(bundle.states.begin() + static_cast<std::ptrdiff_t>(k * bundle.m),
                               bundle.states.begin() + static_cast<std::ptrdiff_t>((k + 1) * bundle.m));
  }
  if (k == 0) {
    return bundle.initial;
  }
  for (std::size_t s = 0; s < bundle.output_times.size(); ++s) {
    if (knot_at_or_before(bundle.grid, bundle.output_times[s]) == k) {
      return bundle.snapshots[s];
    }
  }
  throw ConfigError("limit bundle has no state recorded for the requested time");
}

namespace {

struct PairStats {
  double covariance;
  double correlation;
};

PairStats pair_stats(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    ma += a[r];
    mb += b[r];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    sab += (a[r] - ma) * (b[r] - mb);
    saa += (a[r] - ma) * (a[r] - ma);
    sbb += (b[r] - mb) * (b[r] - mb);
  }
  const double denom = std::sqrt(saa * sbb);
  return {sab / (n - 1.0), denom > 0.0 ? sab / denom : 0.0};
}

double bootstrap_correlation_se(const std::vector<double>& a, const std::vector<double>& b,
                                std::size_t rounds, RandomStream& stream) {
  const std::size_t n = a.size();
  std::vector<double> ra(n), rb(n);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t pick = stream.index(n);
      ra[k] = a[pick];
      rb[k] = b[pick];
    }
    const double c = pair_stats(ra, rb).correlation;
    sum += c;
    sum_sq += c * c;
  }
  const double mean = sum / static_cast<double>(rounds);
  return std::sqrt(std::max(0.0, sum_sq / static_cast<double>(rounds) - mean * mean));
}

}  // namespace

ConditionalIidReport conditional_iid_check(const ModelSpec& spec, std::size_t m, double horizon,
                                           double step, const StableParams& params,
                                           const SeedTree& seeds, std::size_t replicas,
                                           const std::function<double(double)>& g,
                                           std::size_t bootstrap_rounds) {
  if (replicas < 2) {
    throw ConfigError("conditional i.i.d. check needs at least 2 replicas");
  }
  if (m < 2) {
    throw ConfigError("conditional i.i.d. check needs M >= 2");
  }
  RandomStream stable = seeds.stream("ciid/stable");
  const StablePathGrid frozen = sample_stable_path(params, horizon, step, stable);

  LimitOptions opts;
  opts.output_times = {horizon};
  std::vector<double> ga(replicas), gb(replicas), ua(replicas), ub(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    const LimitBundle cond = simulate_limit(spec, m, frozen, seeds.child("ciid/conditional", r), opts);
    const auto& xc = cond.snapshots.back();
    ga[r] = g(xc[0]);
    gb[r] = g(xc[1]);
    const LimitBundle fresh =
        simulate_limit(spec, m, horizon, step, params, seeds.child("ciid/unconditional", r), opts);
    const auto& xu = fresh.snapshots.back();
    ua[r] = g(xu[0]);
    ub[r] = g(xu[1]);
  }

  ConditionalIidReport rep;
  rep.replicas = replicas;
  RandomStream boot = seeds.stream("ciid/bootstrap");
  const PairStats c = pair_stats(ga, gb);
  rep.conditional_covariance = c.covariance;
  rep.conditional_correlation = c.correlation;
  rep.conditional_correlation_se = bootstrap_correlation_se(ga, gb, bootstrap_rounds, boot);
  const PairStats u = pair_stats(ua, ub);
  rep.unconditional_covariance = u.covariance;
  rep.unconditional_correlation = u.correlation;
  rep.unconditional_correlation_se = bootstrap_correlation_se(ua, ub, bootstrap_rounds, boot);
  return rep;
}

}  // namespace nearstable
