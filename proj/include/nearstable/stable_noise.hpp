#pragma once

#include "nearstable/random.hpp"

namespace nearstable {

/// Strictly alpha-stable law described by its Levy measure
///   a_plus / z^(alpha+1) dz on z > 0,  a_minus / |z|^(alpha+1) dz on z < 0,
/// uncompensated for alpha < 1 and compensated (centered) for alpha > 1.
struct StableParams {
  double alpha = 0.5;
  double a_plus = 0.25;
  double a_minus = 0.25;

  /// Throws ConfigError unless alpha in (0,1) u (1,2), a_plus, a_minus >= 0
  /// and a_plus + a_minus > 0.
  void validate() const;
};

/// Scale/skewness of the same law in the S_alpha(sigma, beta, 0) parameterization
/// (characteristic exponent -sigma^alpha |u|^alpha (1 - i beta sign(u) tan(pi alpha / 2))).
///
/// Matching the Levy-Khintchine exponent against the integrals
///   int_0^inf (e^{iuz} - 1 [- iuz]) z^{-1-alpha} dz = Gamma(-alpha) |u|^alpha e^{-i pi alpha sign(u) / 2}
/// gives
///   sigma^alpha = (a_plus + a_minus) * Gamma(1 - alpha) * cos(pi alpha / 2) / alpha
///   beta        = (a_plus - a_minus) / (a_plus + a_minus).
struct CmsParams {
  double alpha;
  double sigma;
  double beta;
};

CmsParams to_cms(const StableParams& params);

/// One draw of S_dt for the process with Levy measure dt * nu^alpha, via the
/// Chambers-Mallows-Stuck transform. dt = 0 returns exactly 0.
double sample_stable_increment(const StableParams& params, double dt, RandomStream& stream);

enum class DoaKind { SymmetricPareto, AsymmetricPareto };

/// Pareto-tailed law in the domain of attraction of a strictly stable law,
/// with exact norming b_n = n^(1/alpha):
///   P(U > x) = p_plus (x/x0)^-alpha,  P(U < -x) = (1 - p_plus)(x/x0)^-alpha   for x >= x0,
/// before the centering shift. For alpha > 1 the draw is shifted by the mean so
/// the law is centered.
struct DoaLaw {
  DoaKind kind = DoaKind::SymmetricPareto;
  double alpha = 0.5;
  double p_plus = 0.5;
  double x0 = 1.0;
  double center_shift = 0.0;

  void validate() const;

  static DoaLaw symmetric_pareto(double alpha, double x0 = 1.0);
  static DoaLaw asymmetric_pareto(double alpha, double p_plus, double x0 = 1.0);

  /// Mean of the unshifted law; only finite for alpha > 1.
  double uncentered_mean() const;
};

double sample_doa(const DoaLaw& law, RandomStream& stream);

/// Stable limit of n^(-1/alpha) * sum_{k<=n} U_k for U_k ~ law:
/// a_plus = p_plus alpha x0^alpha, a_minus = (1 - p_plus) alpha x0^alpha.
StableParams stable_target_of(const DoaLaw& law);

}  // namespace nearstable
