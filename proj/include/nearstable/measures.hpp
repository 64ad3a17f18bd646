#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nearstable {

/// Uniformly weighted atoms of an empirical measure. Non-empty, all finite.
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  /// Ascending copy of the atoms.
  std::vector<double> sorted() const;

 private:
  std::vector<double> values_;
};

/// 1-D W1 between equal-size samples via the monotone (order statistic) coupling.
double wasserstein1_1d(const Sample& a, const Sample& b);

/// min(|x - y|, |x - y|^q) for 0 < q < 1.
double d_q(double x, double y, double q);

struct WassersteinDq {
  /// Cost of the monotone coupling; an upper bound, not the optimum, for concave costs.
  double bound = 0.0;
  /// Optimal assignment, only computed on request and for at most 10 atoms.
  std::optional<double> exact;
};

inline constexpr std::size_t kMaxExactAtoms = 10;

WassersteinDq wasserstein_dq(const Sample& a, const Sample& b, double q, bool want_exact = false);

struct KsResult {
  double stat = 0.0;
  double p = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

KsResult ks_statistic(const Sample& a, const Sample& b);
KsResult ks_statistic(const Sample& a, const std::function<double(double)>& cdf);

/// Mean of g over the atoms.
template <typename F>
double empirical_apply(const Sample& sample, F&& g) {
  double s = 0.0;
  for (double x : sample.values()) {
    s += g(x);
  }
  return s / static_cast<double>(sample.size());
}

/// Draws n atoms with replacement using the supplied index source; used to
/// equalize sample sizes before W1.
template <typename IndexFn>
Sample resample(const Sample& sample, std::size_t n, IndexFn&& index) {
  std::vector<double> out(n);
  for (auto& v : out) {
    v = sample.values()[index(sample.size())];
  }
  return Sample(std::move(out));
}

double sample_mean(std::span<const double> xs);
/// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);
double median(std::vector<double> xs);
/// Spearman rank correlation (average ranks for ties).
double spearman_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace nearstable
