#pragma once

#include <span>
#include <string>

#include "nearstable/random.hpp"

namespace nearstable {

/// Bounded test statistic phi used by mean-field drifts and observables.
enum class Observable { Arctan, Tanh };

double evaluate(Observable phi, double x);

enum class DriftKind {
  Zero,
  Constant,      ///< b(x, m) = c
  TanhMean,      ///< b(x, m) = beta * tanh(m(phi) - x)
  ConvTanh,      ///< b(x, m) = int beta * tanh((x - y) / width) m(dy)
  ConvGaussian,  ///< b(x, m) = int beta * exp(-(x - y)^2 / (2 width^2)) m(dy)
};

struct DriftDesc {
  DriftKind kind = DriftKind::Zero;
  double c = 0.0;
  double beta = 0.0;
  double width = 1.0;
  Observable phi = Observable::Arctan;

  bool is_zero() const { return kind == DriftKind::Zero || (kind == DriftKind::Constant && c == 0.0); }
  /// Convolution forms cost O(N^2) per evaluation of the whole system.
  bool is_convolution() const { return kind == DriftKind::ConvTanh || kind == DriftKind::ConvGaussian; }
  /// Lipschitz constant in x (and in W1 for the measure argument).
  double lipschitz() const;
  double bound() const;
};

enum class MainJumpKind {
  Zero,
  Constant,  ///< psi(x) = delta
  Tanh,      ///< psi(x) = -kappa * tanh(x)
};

struct MainJumpDesc {
  MainJumpKind kind = MainJumpKind::Zero;
  double delta = 0.0;
  double kappa = 0.0;

  bool is_zero() const {
    return kind == MainJumpKind::Zero || (kind == MainJumpKind::Constant && delta == 0.0) ||
           (kind == MainJumpKind::Tanh && kappa == 0.0);
  }
  double operator()(double x) const;
  double lipschitz() const;
  double bound() const;
};

enum class RateKind {
  Constant,  ///< f(x) = c
  Tanh,      ///< f(x) = c0 + c1 (1 + tanh(x)) / 2
};

struct RateDesc {
  RateKind kind = RateKind::Constant;
  double c = 1.0;
  double c0 = 1.0;
  double c1 = 0.0;

  bool is_constant() const { return kind == RateKind::Constant || c1 == 0.0; }
  double operator()(double x) const;
  double lower() const;
  double upper() const;
  double lipschitz() const;
};

enum class InitialKind {
  PointMass,  ///< delta_center
  Uniform,    ///< uniform on [center - half_width, center + half_width]
  BellIrwinHall,  ///< center + half_width * (U1 + U2 + U3 + U4 - 2) / 2, bell-shaped with bounded support
};

struct InitialLaw {
  InitialKind kind = InitialKind::PointMass;
  double center = 0.0;
  double half_width = 0.0;

  double sample(RandomStream& stream) const;
};

/// Coefficients (b, psi, f) and initial law of the particle system.
struct ModelSpec {
  double alpha = 0.5;
  DriftDesc drift;
  MainJumpDesc main_jump;
  RateDesc rate;
  InitialLaw initial;

  double f_lower() const { return rate.lower(); }
  double f_upper() const { return rate.upper(); }

  /// Throws ConfigError when the spec violates the model assumptions:
  /// positive lower rate bound, psi = 0 for alpha > 1, finite parameters.
  void validate() const;

  /// Mean-field statistic needed by the drift; 0 when the drift does not use one.
  double drift_statistic(std::span<const double> xs) const;

  /// b(x, mu) given the precomputed drift statistic. For convolution drifts the
  /// whole particle vector is needed.
  double drift_at(double x, double statistic, std::span<const double> xs) const;

  /// Evaluates b(x_i, mu) for every particle into out.
  void drift_all(std::span<const double> xs, std::span<double> out) const;

  /// mu(f) for the empirical measure of xs.
  double rate_mean(std::span<const double> xs) const;

  /// Human-readable description of the per-substep cost class.
  std::string cost_class() const;
};

}  // namespace nearstable
