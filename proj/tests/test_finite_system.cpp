#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nearstable/errors.hpp"
#include "nearstable/finite_system.hpp"
#include "nearstable/measures.hpp"

using namespace nearstable;

namespace {

ModelSpec full_model() {
  ModelSpec m;
  m.alpha = 0.5;
  m.drift = {DriftKind::TanhMean, 0.0, 1.0, 1.0, Observable::Arctan};
  m.main_jump = {MainJumpKind::Tanh, 0.0, 0.3};
  m.rate = {RateKind::Tanh, 0.0, 1.0, 1.0};
  m.initial = {InitialKind::Uniform, 0.0, 1.0};
  return m;
}

ModelSpec pure_collateral(double c = 1.0) {
  ModelSpec m;
  m.alpha = 0.5;
  m.rate = {RateKind::Constant, c, 1.0, 0.0};
  return m;
}

const DoaLaw kSym = DoaLaw::symmetric_pareto(0.5);

}  // namespace

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(simulate_finite(full_model(), 0, 1.0, kSym, SeedTree(1)), ConfigError);
  CHECK_THROWS_AS(simulate_finite(full_model(), 4, -1.0, kSym, SeedTree(1)), ConfigError);
  CHECK_THROWS_AS(simulate_finite(full_model(), 4, 1.0, DoaLaw::symmetric_pareto(0.7), SeedTree(1)),
                  ConfigError);
  FiniteOptions bad;
  bad.index_map = {0, 0, 1};
  CHECK_THROWS_AS(simulate_finite(full_model(), 3, 1.0, kSym, SeedTree(1), bad), ConfigError);
}

TEST_CASE("zero horizon keeps the initial configuration") {
  const auto b = simulate_finite(full_model(), 5, 0.0, kSym, SeedTree(3));
  CHECK(b.grid == std::vector<double>{0.0});
  CHECK(b.events.empty());
  CHECK(std::vector<double>(b.state_row(0).begin(), b.state_row(0).end()) == b.initial);
}

TEST_CASE("same seed, same bundle") {
  const auto a = simulate_finite(full_model(), 20, 2.0, kSym, SeedTree(9));
  const auto b = simulate_finite(full_model(), 20, 2.0, kSym, SeedTree(9));
  CHECK(a.grid == b.grid);
  CHECK(a.states == b.states);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    CHECK(a.events[k].time == b.events[k].time);
    CHECK(a.events[k].u == b.events[k].u);
  }
  const auto c = simulate_finite(full_model(), 20, 2.0, kSym, SeedTree(10));
  CHECK(c.states != a.states);
}

TEST_CASE("trajectory decomposition X - X0 = B + I + J - E") {
  const double horizon = 5.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto b = simulate_finite(full_model(), 50, horizon, kSym, SeedTree(seed));
    double worst = 0.0;
    for (std::size_t i = 0; i < b.n; ++i) {
      const Decomposition d = decompose_trajectory(b, i);
      for (std::size_t k = 0; k < b.grid.size(); ++k) {
        const double r = b.state(k, i) - b.initial[i] - d.drift[k] - d.main_jumps[k] - d.collateral[k] +
                         d.self_kicks[k];
        worst = std::max(worst, std::abs(r));
      }
    }
    CAPTURE(seed);
    CHECK(worst <= 1e-9 * horizon);
  }
}

TEST_CASE("time change increases between the rate bounds") {
  for (std::uint64_t seed : {4u, 5u}) {
    FiniteOptions opts;
    opts.record_paths = false;
    const auto b = simulate_finite(full_model(), 30, 3.0, kSym, SeedTree(seed), opts);
    const TimeChange tc = cumulated_intensity(b);
    for (std::size_t k = 1; k < tc.knots.size(); ++k) {
      const double dt = tc.knots[k] - tc.knots[k - 1];
      const double da = tc.values[k] - tc.values[k - 1];
      REQUIRE(da >= tc.f_lower * dt);
      REQUIRE(da <= tc.f_upper * dt);
    }
    CHECK(tc.inverse(tc.at(1.3)) == doctest::Approx(1.3));
  }
}

TEST_CASE("constant rate gives the closed-form time change") {
  const auto b = simulate_finite(pure_collateral(2.0), 10, 1.5, kSym, SeedTree(6));
  const TimeChange tc = cumulated_intensity(b);
  for (std::size_t k = 0; k < tc.knots.size(); ++k) {
    CHECK(tc.values[k] == 2.0 * tc.knots[k]);
  }
}

TEST_CASE("every other particle receives the same collateral kick") {
  ModelSpec m = pure_collateral();
  m.main_jump = {MainJumpKind::Constant, 0.25, 0.0};
  FiniteOptions opts;
  opts.initial_positions = std::vector<double>(12, 0.0);
  const auto b = simulate_finite(m, 12, 2.0, kSym, SeedTree(8), opts);
  REQUIRE(b.accepted_count > 0);
  for (const auto& e : b.events) {
    if (!e.accepted) continue;
    const double kick = e.u * b.collateral_factor;
    for (std::size_t j = 0; j < b.n; ++j) {
      const double moved = b.state(e.knot, j) - b.state(e.knot - 1, j);
      const double expected = j == e.particle ? 0.25 : kick;
      CHECK(moved == doctest::Approx(expected).epsilon(1e-12).scale(std::abs(b.state(e.knot, j)) + 1.0));
    }
  }
  // Particles that never fired carry exactly J.
  const auto j = collateral_path(b);
  for (std::size_t i = 0; i < b.n; ++i) {
    const auto d = decompose_trajectory(b, i);
    if (d.self_kicks.back() == 0.0 && d.main_jumps.back() == 0.0) {
      CHECK(b.state(b.grid.size() - 1, i) == doctest::Approx(j.back()));
    }
  }
}

TEST_CASE("relabeling particles permutes the trajectories") {
  const std::size_t n = 9;
  std::vector<std::size_t> perm{3, 7, 0, 8, 1, 5, 2, 6, 4};
  RandomStream s(12);
  std::vector<double> x(n);
  for (auto& v : x) v = 2.0 * s.uniform() - 1.0;
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[perm[k]] = x[k];

  SUBCASE("constant drift: exact") {
    ModelSpec m = full_model();
    m.drift = {DriftKind::Constant, 0.3, 0.0, 1.0, Observable::Arctan};
    FiniteOptions a, b;
    a.initial_positions = x;
    b.initial_positions = y;
    b.index_map = perm;
    const auto ra = simulate_finite(m, n, 2.0, kSym, SeedTree(21), a);
    const auto rb = simulate_finite(m, n, 2.0, kSym, SeedTree(21), b);
    REQUIRE(ra.grid == rb.grid);
    for (std::size_t k = 0; k < ra.grid.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(rb.state(k, perm[i]) == ra.state(k, i));
      }
    }
  }
  SUBCASE("mean-field drift: equal up to summation order") {
    FiniteOptions a, b;
    a.initial_positions = x;
    b.initial_positions = y;
    b.index_map = perm;
    const auto ra = simulate_finite(full_model(), n, 2.0, kSym, SeedTree(22), a);
    const auto rb = simulate_finite(full_model(), n, 2.0, kSym, SeedTree(22), b);
    REQUIRE(ra.grid == rb.grid);
    REQUIRE(ra.accepted_count == rb.accepted_count);
    for (std::size_t k = 0; k < ra.grid.size(); ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(std::abs(rb.state(k, perm[i]) - ra.state(k, i)) <= 1e-12 * (1.0 + std::abs(ra.state(k, i))));
      }
    }
  }
}

TEST_CASE("snapshots agree with the recorded grid") {
  FiniteOptions opts;
  opts.output_times = {1.0, 0.5};
  const auto b = simulate_finite(full_model(), 15, 1.0, kSym, SeedTree(13), opts);
  for (double t : {0.5, 1.0}) {
    const auto& snap = b.snapshot_at(t);
    const auto it = std::upper_bound(b.grid.begin(), b.grid.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - b.grid.begin()) - 1;
    CHECK(snap == std::vector<double>(b.state_row(k).begin(), b.state_row(k).end()));
  }
  CHECK_THROWS_AS(b.snapshot_at(0.7), ConfigError);
}

TEST_CASE("snapshots do not depend on record_paths") {
  FiniteOptions with, without;
  with.output_times = without.output_times = {0.25, 1.0};
  without.record_paths = false;
  without.log_rejected = false;
  const auto a = simulate_finite(full_model(), 25, 1.0, kSym, SeedTree(14), with);
  const auto b = simulate_finite(full_model(), 25, 1.0, kSym, SeedTree(14), without);
  CHECK(a.snapshots == b.snapshots);
  CHECK(a.accepted_count == b.accepted_count);
  CHECK(b.events.size() == b.accepted_count);
}

TEST_CASE("time-changed event times form a unit-rate Poisson process") {
  FiniteOptions opts;
  opts.record_paths = false;
  const auto b = simulate_finite(full_model(), 200, 10.0, kSym, SeedTree(15), opts);
  const auto s = transformed_event_times(b);
  REQUIRE(s.size() > 100);
  std::vector<double> gaps(s.size());
  std::adjacent_difference(s.begin(), s.end(), gaps.begin());
  const KsResult ks = ks_statistic(Sample(gaps), [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); });
  CHECK(ks.p > 0.001);
}

TEST_CASE("collateral fast path has the law of J^N from the full simulation") {
  const std::size_t reps = 2000;
  const double horizon[] = {1.0};
  std::vector<double> fast(reps), full(reps);
  FiniteOptions opts;
  opts.record_paths = false;
  opts.log_rejected = false;
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream s = SeedTree(16).stream("fast", r);
    fast[r] = sample_collateral_sum(1.0, 16, kSym, horizon, s)[0];
    const auto b = simulate_finite(pure_collateral(), 16, 1.0, kSym, SeedTree(17).child("full", r), opts);
    full[r] = collateral_path(b).back();
  }
  CHECK(ks_statistic(Sample(fast), Sample(full)).p > 0.001);
}

TEST_CASE("overflow aborts with the event index") {
  ModelSpec m = pure_collateral();
  m.main_jump = {MainJumpKind::Constant, 1e308, 0.0};
  try {
    simulate_finite(m, 1, 100.0, kSym, SeedTree(18));
    FAIL("expected NumericAbort");
  } catch (const NumericAbort& e) {
    CHECK(std::string(e.what()).find("event") != std::string::npos);
  }
}
