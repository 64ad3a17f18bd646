#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nearstable/errors.hpp"
#include "nearstable/measures.hpp"
#include "nearstable/stable_noise.hpp"

using namespace nearstable;

namespace {

// Levy-Khintchine exponent of S_1 at frequency u, by quadrature of
//   int_0^inf (e^{iuz} - 1 [- iuz]) z^{-1-alpha} dz
// for each half line. Substituting w = s^2 removes the singularity at 0.
std::complex<double> exponent_by_quadrature(const StableParams& p, double u) {
  const double a = p.alpha;
  const double w_max = 1e4;
  const double s_max = std::sqrt(w_max);
  const std::size_t n = 2'000'000;
  const double ds = s_max / static_cast<double>(n);
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = (static_cast<double>(k) + 0.5) * ds;
    const double w = s * s;
    const double jac = 2.0 * s * std::pow(w, -1.0 - a);
    re += (std::cos(w) - 1.0) * jac;
    im += (a > 1.0 ? std::sin(w) - w : std::sin(w)) * jac;
  }
  re *= ds;
  im *= ds;
  // Non-oscillating tails beyond w_max.
  re -= std::pow(w_max, -a) / a;
  if (a > 1.0) {
    im -= std::pow(w_max, 1.0 - a) / (a - 1.0);
  }
  const double scale = std::pow(std::abs(u), a);
  const double sign = u >= 0.0 ? 1.0 : -1.0;
  return {(p.a_plus + p.a_minus) * scale * re, (p.a_plus - p.a_minus) * sign * scale * im};
}

std::vector<double> draws(const StableParams& p, double dt, std::size_t n, std::uint64_t seed) {
  RandomStream s(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = sample_stable_increment(p, dt, s);
  return out;
}

void check_characteristic_function(const StableParams& p) {
  const auto xs = draws(p, 1.0, 200000, 99);
  for (double u : {0.3, 1.0, 2.5}) {
    double c = 0.0, s = 0.0;
    for (double x : xs) {
      c += std::cos(u * x);
      s += std::sin(u * x);
    }
    c /= static_cast<double>(xs.size());
    s /= static_cast<double>(xs.size());
    const std::complex<double> phi = std::exp(exponent_by_quadrature(p, u));
    CAPTURE(p.alpha);
    CAPTURE(u);
    CHECK(std::abs(s - phi.imag()) < 0.01);
    CHECK(std::abs(c - phi.real()) < 0.01);
  }
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(StableParams({1.0, 0.5, 0.5}).validate(), ConfigError);
  CHECK_THROWS_AS(StableParams({2.0, 0.5, 0.5}).validate(), ConfigError);
  CHECK_THROWS_AS(StableParams({0.5, 0.0, 0.0}).validate(), ConfigError);
  CHECK_THROWS_AS(StableParams({0.5, -0.1, 0.5}).validate(), ConfigError);
  CHECK_NOTHROW(StableParams({1.5, 0.0, 1.0}).validate());
}

TEST_CASE("dt = 0 returns 0 and dt < 0 is rejected") {
  RandomStream s(1);
  const StableParams p{0.5, 0.25, 0.25};
  CHECK(sample_stable_increment(p, 0.0, s) == 0.0);
  CHECK_THROWS_AS(sample_stable_increment(p, -1.0, s), ConfigError);
}

TEST_CASE("CMS skewness follows the Levy weights") {
  CHECK(to_cms({0.5, 0.25, 0.25}).beta == 0.0);
  CHECK(to_cms({0.5, 0.5, 0.0}).beta == 1.0);
  CHECK(to_cms({1.5, 0.0, 0.3}).beta == -1.0);
}

TEST_CASE("characteristic function matches the Levy measure (symmetric, alpha = 0.5)") {
  check_characteristic_function({0.5, 0.25, 0.25});
}

TEST_CASE("characteristic function matches the Levy measure (skewed, alpha = 0.5)") {
  check_characteristic_function({0.5, 0.4, 0.1});
}

TEST_CASE("characteristic function matches the Levy measure (compensated, alpha = 1.5)") {
  check_characteristic_function({1.5, 0.75, 0.75});
  check_characteristic_function({1.5, 1.0, 0.2});
}

TEST_CASE("one-sided alpha < 1 law is a subordinator and matches a truncated compound Poisson sampler") {
  const StableParams p{0.5, 0.5, 0.0};
  const auto xs = draws(p, 1.0, 20000, 5);
  for (double x : xs) REQUIRE(x >= 0.0);

  // Jumps above eps: Poisson(a eps^-alpha / alpha) many, sizes eps * U^(-1/alpha).
  // Jumps below eps are replaced by their mean a eps^(1-alpha) / (1-alpha).
  const double eps = 1e-4;
  const double rate = p.a_plus * std::pow(eps, -p.alpha) / p.alpha;
  const double small_mean = p.a_plus * std::pow(eps, 1.0 - p.alpha) / (1.0 - p.alpha);
  RandomStream s(77);
  std::vector<double> oracle(20000);
  for (auto& y : oracle) {
    double sum = small_mean;
    for (double t = s.exponential(); t < rate; t += s.exponential()) {
      sum += eps * std::pow(s.uniform_open(), -1.0 / p.alpha);
    }
    y = sum;
  }
  const KsResult ks = ks_statistic(Sample(xs), Sample(oracle));
  CHECK(ks.p > 0.001);
}

TEST_CASE("self-similarity: S_t has the law of t^(1/alpha) S_1") {
  for (double alpha : {0.5, 1.5}) {
    const StableParams p{alpha, 0.3, 0.2};
    const auto s4 = draws(p, 4.0, 20000, 1);
    auto s1 = draws(p, 1.0, 20000, 2);
    for (auto& x : s1) x *= std::pow(4.0, 1.0 / alpha);
    CAPTURE(alpha);
    CHECK(ks_statistic(Sample(s4), Sample(s1)).p > 0.001);
  }
}

TEST_CASE("Pareto collateral law: tails, centering and stable target") {
  const DoaLaw sym = DoaLaw::symmetric_pareto(0.5);
  const StableParams t = stable_target_of(sym);
  CHECK(t.alpha == 0.5);
  CHECK(t.a_plus == doctest::Approx(0.25));
  CHECK(t.a_minus == doctest::Approx(0.25));

  const DoaLaw asym = DoaLaw::asymmetric_pareto(1.5, 0.8, 2.0);
  // E|U| = x0 alpha / (alpha - 1) = 6, so the uncentered mean is (0.8 - 0.2) * 6.
  CHECK(asym.uncentered_mean() == doctest::Approx(3.6));
  CHECK(asym.center_shift == doctest::Approx(3.6));
  const StableParams ta = stable_target_of(asym);
  CHECK(ta.a_plus == doctest::Approx(0.8 * 1.5 * std::pow(2.0, 1.5)));
  CHECK(ta.a_minus == doctest::Approx(0.2 * 1.5 * std::pow(2.0, 1.5)));

  RandomStream s(8);
  const int n = 200000;
  int above = 0, below = 0;
  for (int k = 0; k < n; ++k) {
    const double u = sample_doa(asym, s) + asym.center_shift;
    REQUIRE(std::abs(u) >= 2.0 - 1e-12);
    if (u > 8.0) ++above;
    if (u < -8.0) ++below;
  }
  // P(U > 8) = 0.8 * 4^-1.5 = 0.1, P(U < -8) = 0.025.
  CHECK(above / static_cast<double>(n) == doctest::Approx(0.1).epsilon(0.03));
  CHECK(below / static_cast<double>(n) == doctest::Approx(0.025).epsilon(0.06));
}

TEST_CASE("Pareto law validation") {
  CHECK_THROWS_AS(DoaLaw::asymmetric_pareto(0.5, 1.5), ConfigError);
  CHECK_THROWS_AS(DoaLaw::symmetric_pareto(0.5, -1.0), ConfigError);
  CHECK_THROWS_AS(DoaLaw::symmetric_pareto(1.0), ConfigError);
}
