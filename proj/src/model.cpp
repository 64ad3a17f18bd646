#include "nearstable/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nearstable/errors.hpp"

namespace nearstable {

double evaluate(Observable phi, double x) {
  switch (phi) {
    case Observable::Arctan:
      return std::atan(x);
    case Observable::Tanh:
      return std::tanh(x);
  }
  return 0.0;
}

double DriftDesc::lipschitz() const {
  switch (kind) {
    case DriftKind::Zero:
    case DriftKind::Constant:
      return 0.0;
    case DriftKind::TanhMean:
      return std::abs(beta);
    case DriftKind::ConvTanh:
      return std::abs(beta) / width;
    case DriftKind::ConvGaussian:
      return std::abs(beta) / width * std::exp(-0.5);
  }
  return 0.0;
}

double DriftDesc::bound() const {
  switch (kind) {
    case DriftKind::Zero:
      return 0.0;
    case DriftKind::Constant:
      return std::abs(c);
    default:
      return std::abs(beta);
  }
}

double MainJumpDesc::operator()(double x) const {
  switch (kind) {
    case MainJumpKind::Zero:
      return 0.0;
    case MainJumpKind::Constant:
      return delta;
    case MainJumpKind::Tanh:
      return -kappa * std::tanh(x);
  }
  return 0.0;
}

double MainJumpDesc::lipschitz() const { return kind == MainJumpKind::Tanh ? std::abs(kappa) : 0.0; }

double MainJumpDesc::bound() const {
  switch (kind) {
    case MainJumpKind::Zero:
      return 0.0;
    case MainJumpKind::Constant:
      return std::abs(delta);
    case MainJumpKind::Tanh:
      return std::abs(kappa);
  }
  return 0.0;
}

double RateDesc::operator()(double x) const {
  if (kind == RateKind::Constant) {
    return c;
  }
  return c0 + c1 * (1.0 + std::tanh(x)) / 2.0;
}

double RateDesc::lower() const { return kind == RateKind::Constant ? c : c0 + std::min(c1, 0.0); }
double RateDesc::upper() const { return kind == RateKind::Constant ? c : c0 + std::max(c1, 0.0); }
double RateDesc::lipschitz() const { return kind == RateKind::Constant ? 0.0 : std::abs(c1) / 2.0; }

double InitialLaw::sample(RandomStream& stream) const {
  switch (kind) {
    case InitialKind::PointMass:
      return center;
    case InitialKind::Uniform:
      return center + half_width * (2.0 * stream.uniform() - 1.0);
    case InitialKind::BellIrwinHall: {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) {
        s += stream.uniform();
      }
      return center + half_width * (s - 2.0) / 2.0;
    }
  }
  return center;
}

void ModelSpec::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(finite(alpha) && alpha > 0.0 && alpha < 2.0 && alpha != 1.0)) {
    throw ConfigError("model alpha must lie in (0,1) u (1,2)");
  }
  if (!(finite(drift.c) && finite(drift.beta) && finite(drift.width))) {
    throw ConfigError("drift parameters must be finite");
  }
  if (drift.is_convolution() && !(drift.width > 0.0)) {
    throw ConfigError("convolution drift needs width > 0");
  }
  if (!(finite(main_jump.delta) && finite(main_jump.kappa))) {
    throw ConfigError("main-jump parameters must be finite");
  }
  if (alpha > 1.0 && !main_jump.is_zero()) {
    throw ConfigError("main jumps must vanish (psi = 0) when alpha > 1");
  }
  if (!(finite(rate.c) && finite(rate.c0) && finite(rate.c1))) {
    throw ConfigError("rate parameters must be finite");
  }
  if (!(rate.lower() > 0.0)) {
    throw ConfigError("jump rate must be bounded below by a strictly positive constant");
  }
  if (!(finite(initial.center) && finite(initial.half_width) && initial.half_width >= 0.0)) {
    throw ConfigError("initial law needs a finite center and half_width >= 0");
  }
}

double ModelSpec::drift_statistic(std::span<const double> xs) const {
  if (drift.kind != DriftKind::TanhMean || xs.empty()) {
    return 0.0;
  }
  double s = 0.0;
  for (double x : xs) {
    s += evaluate(drift.phi, x);
  }
  return s / static_cast<double>(xs.size());
}

double ModelSpec::drift_at(double x, double statistic, std::span<const double> xs) const {
  switch (drift.kind) {
    case DriftKind::Zero:
      return 0.0;
    case DriftKind::Constant:
      return drift.c;
    case DriftKind::TanhMean:
      return drift.beta * std::tanh(statistic - x);
    case DriftKind::ConvTanh: {
      double s = 0.0;
      for (double y : xs) {
        s += std::tanh((x - y) / drift.width);
      }
      return drift.beta * s / static_cast<double>(xs.size());
    }
    case DriftKind::ConvGaussian: {
      const double inv = 1.0 / (2.0 * drift.width * drift.width);
      double s = 0.0;
      for (double y : xs) {
        const double d = x - y;
        s += std::exp(-d * d * inv);
      }
      return drift.beta * s / static_cast<double>(xs.size());
    }
  }
  return 0.0;
}

void ModelSpec::drift_all(std::span<const double> xs, std::span<double> out) const {
  const double stat = drift_statistic(xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = drift_at(xs[i], stat, xs);
  }
}

double ModelSpec::rate_mean(std::span<const double> xs) const {
  if (rate.is_constant()) {
    return rate.kind == RateKind::Constant ? rate.c : rate.c0;
  }
  double s = 0.0;
  for (double x : xs) {
    s += rate(x);
  }
  // Rounding in the sum must not push the mean outside [f_lower, f_upper].
  return std::clamp(s / static_cast<double>(xs.size()), rate.lower(), rate.upper());
}

std::string ModelSpec::cost_class() const {
  if (drift.is_convolution()) {
    return "O(N^2) per drift substep";
  }
  if (drift.is_zero()) {
    return "no drift integration";
  }
  return "O(N) per drift substep";
}

}  // namespace nearstable
