#include <doctest.h>

#include <cmath>
#include <vector>

#include "nearstable/errors.hpp"
#include "nearstable/model.hpp"

using namespace nearstable;

namespace {

ModelSpec base() {
  ModelSpec m;
  m.alpha = 0.5;
  m.rate = {RateKind::Constant, 1.0, 1.0, 0.0};
  return m;
}

}  // namespace

TEST_CASE("mean-field drift of tanh type") {
  ModelSpec m = base();
  m.drift = {DriftKind::TanhMean, 0.0, 2.0, 1.0, Observable::Arctan};
  const std::vector<double> xs{-1.0, 0.0, 3.0};
  const double mean = (std::atan(-1.0) + std::atan(0.0) + std::atan(3.0)) / 3.0;
  std::vector<double> out(3);
  m.drift_all(xs, out);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out[i] == doctest::Approx(2.0 * std::tanh(mean - xs[i])));
  }
}

TEST_CASE("convolution drifts average the kernel over all particles") {
  const std::vector<double> xs{-0.5, 0.25, 2.0, 1.0};
  for (DriftKind kind : {DriftKind::ConvTanh, DriftKind::ConvGaussian}) {
    ModelSpec m = base();
    m.drift = {kind, 0.0, 1.5, 0.7, Observable::Arctan};
    std::vector<double> out(xs.size());
    m.drift_all(xs, out);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double s = 0.0;
      for (double y : xs) {
        const double d = xs[i] - y;
        s += kind == DriftKind::ConvTanh ? 1.5 * std::tanh(d / 0.7) : 1.5 * std::exp(-d * d / (2 * 0.49));
      }
      CHECK(out[i] == doctest::Approx(s / static_cast<double>(xs.size())));
    }
  }
}

TEST_CASE("rate bounds and empirical mean") {
  RateDesc r{RateKind::Tanh, 0.0, 1.5, 0.5};
  CHECK(r.lower() == 1.5);
  CHECK(r.upper() == 2.0);
  CHECK(r(0.0) == doctest::Approx(1.75));
  for (double x : {-50.0, -1.0, 0.0, 1.0, 50.0}) {
    CHECK(r(x) >= r.lower());
    CHECK(r(x) <= r.upper());
  }
  ModelSpec m = base();
  m.rate = r;
  const std::vector<double> xs{-1e6, 1e6};
  const double mu = m.rate_mean(xs);
  CHECK(mu >= m.f_lower());
  CHECK(mu <= m.f_upper());
  CHECK(mu == doctest::Approx(1.75));
}

TEST_CASE("main jump forms") {
  MainJumpDesc psi{MainJumpKind::Tanh, 0.0, 0.3};
  CHECK(psi(1.0) == doctest::Approx(-0.3 * std::tanh(1.0)));
  CHECK(psi.bound() == doctest::Approx(0.3));
  CHECK(MainJumpDesc{MainJumpKind::Constant, 0.0, 0.0}.is_zero());
}

TEST_CASE("model validation") {
  ModelSpec m = base();
  CHECK_NOTHROW(m.validate());

  ModelSpec heavy = base();
  heavy.alpha = 1.5;
  heavy.main_jump = {MainJumpKind::Constant, 0.1, 0.0};
  CHECK_THROWS_AS(heavy.validate(), ConfigError);
  heavy.main_jump = {};
  CHECK_NOTHROW(heavy.validate());

  ModelSpec lazy = base();
  lazy.rate = {RateKind::Tanh, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(lazy.validate(), ConfigError);

  ModelSpec bad_alpha = base();
  bad_alpha.alpha = 1.0;
  CHECK_THROWS_AS(bad_alpha.validate(), ConfigError);
}

TEST_CASE("initial laws stay in their support") {
  RandomStream s(4);
  InitialLaw bell{InitialKind::BellIrwinHall, 1.0, 2.0};
  InitialLaw uni{InitialKind::Uniform, -1.0, 0.5};
  double mean = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double b = bell.sample(s);
    const double u = uni.sample(s);
    REQUIRE(std::abs(b - 1.0) <= 2.0);
    REQUIRE(std::abs(u + 1.0) <= 0.5);
    mean += b;
  }
  CHECK(mean / 100000.0 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(InitialLaw{InitialKind::PointMass, 3.0, 0.0}.sample(s) == 3.0);
}
