#include "nearstable/stable_noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nearstable/errors.hpp"

namespace nearstable {

namespace {

bool valid_index(double alpha) {
  return std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0 && alpha != 1.0;
}

}  // namespace

void StableParams::validate() const {
  if (!valid_index(alpha)) {
    throw ConfigError("stable index must lie in (0,1) u (1,2), got " + std::to_string(alpha));
  }
  if (!(a_plus >= 0.0) || !(a_minus >= 0.0) || !(a_plus + a_minus > 0.0)) {
    throw ConfigError("stable Levy weights must satisfy a_plus, a_minus >= 0 and a_plus + a_minus > 0");
  }
}

CmsParams to_cms(const StableParams& params) {
  params.validate();
  const double alpha = params.alpha;
  const double total = params.a_plus + params.a_minus;
  const double sigma_pow =
      total * std::tgamma(1.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0) / alpha;
  return {alpha, std::pow(sigma_pow, 1.0 / alpha), (params.a_plus - params.a_minus) / total};
}

double sample_stable_increment(const StableParams& params, double dt, RandomStream& stream) {
  if (!(dt >= 0.0)) {
    throw ConfigError("stable increment needs dt >= 0");
  }
  const CmsParams cms = to_cms(params);
  if (dt == 0.0) {
    return 0.0;
  }
  const double alpha = cms.alpha;
  const double half_pi = std::numbers::pi / 2.0;
  const double zeta = cms.beta * std::tan(half_pi * alpha);
  // For |beta| = 1 and alpha < 1, atan(tan(pi alpha / 2)) / alpha is pi/2 in
  // exact arithmetic; pin it so the totally skewed case stays one-sided.
  double shift;
  if (alpha < 1.0 && std::abs(cms.beta) == 1.0) {
    shift = cms.beta * half_pi;
  } else {
    shift = std::atan(zeta) / alpha;
  }
  const double scale = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha));

  const double v = std::numbers::pi * (stream.uniform_open() - 0.5);
  const double w = stream.exponential();
  const double angle = alpha * (v + shift);
  const double x = scale * std::sin(angle) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos(v - angle) / w, (1.0 - alpha) / alpha);
  return cms.sigma * std::pow(dt, 1.0 / alpha) * x;
}

void DoaLaw::validate() const {
  if (!valid_index(alpha)) {
    throw ConfigError("collateral tail index must lie in (0,1) u (1,2), got " + std::to_string(alpha));
  }
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) {
    throw ConfigError("collateral p_plus must lie in [0,1]");
  }
  if (!(x0 > 0.0) || !std::isfinite(x0)) {
    throw ConfigError("collateral tail cutoff x0 must be positive");
  }
  if (kind == DoaKind::SymmetricPareto && p_plus != 0.5) {
    throw ConfigError("symmetric Pareto law requires p_plus = 1/2");
  }
  const double expected_shift = alpha > 1.0 ? uncentered_mean() : 0.0;
  if (std::abs(center_shift - expected_shift) > 1e-12 * (1.0 + std::abs(expected_shift))) {
    throw ConfigError("collateral center_shift must equal the uncentered mean for alpha > 1 and 0 otherwise");
  }
}

DoaLaw DoaLaw::symmetric_pareto(double alpha, double x0) {
  DoaLaw law{DoaKind::SymmetricPareto, alpha, 0.5, x0, 0.0};
  law.validate();
  return law;
}

DoaLaw DoaLaw::asymmetric_pareto(double alpha, double p_plus, double x0) {
  DoaLaw law{DoaKind::AsymmetricPareto, alpha, p_plus, x0, 0.0};
  if (alpha > 1.0) {
    law.center_shift = law.uncentered_mean();
  }
  law.validate();
  return law;
}

double DoaLaw::uncentered_mean() const {
  if (!(alpha > 1.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return (2.0 * p_plus - 1.0) * x0 * alpha / (alpha - 1.0);
}

double sample_doa(const DoaLaw& law, RandomStream& stream) {
  const bool positive = stream.uniform() < law.p_plus;
  const double magnitude = law.x0 * std::pow(stream.uniform_open(), -1.0 / law.alpha);
  return (positive ? magnitude : -magnitude) - law.center_shift;
}

StableParams stable_target_of(const DoaLaw& law) {
  law.validate();
  const double weight = law.alpha * std::pow(law.x0, law.alpha);
  return {law.alpha, law.p_plus * weight, (1.0 - law.p_plus) * weight};
}

}  // namespace nearstable
