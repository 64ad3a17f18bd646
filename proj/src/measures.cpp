#include "nearstable/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nearstable/errors.hpp"

namespace nearstable {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw ConfigError("empirical sample must be non-empty");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ConfigError("empirical sample contains a non-finite atom");
    }
  }
}

std::vector<double> Sample::sorted() const {
  std::vector<double> s(values_.begin(), values_.end());
  std::sort(s.begin(), s.end());
  return s;
}

namespace {

void require_same_size(const Sample& a, const Sample& b) {
  if (a.size() == 0 || b.size() == 0) {
    throw ConfigError("Wasserstein distance of an empty sample");
  }
  if (a.size() != b.size()) {
    throw ConfigError("Wasserstein distance needs equal atom counts; resample first");
  }
}

}  // namespace

double wasserstein1_1d(const Sample& a, const Sample& b) {
  require_same_size(a, b);
  const auto sa = a.sorted();
  const auto sb = b.sorted();
  double s = 0.0;
  for (std::size_t k = 0; k < sa.size(); ++k) {
    s += std::abs(sa[k] - sb[k]);
  }
  return s / static_cast<double>(sa.size());
}

double d_q(double x, double y, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw ConfigError("d_q needs 0 < q < 1");
  }
  const double d = std::abs(x - y);
  return std::min(d, std::pow(d, q));
}

WassersteinDq wasserstein_dq(const Sample& a, const Sample& b, double q, bool want_exact) {
  require_same_size(a, b);
  if (want_exact && a.size() > kMaxExactAtoms) {
    throw ConfigError("exact W_dq is only available for at most 10 atoms");
  }
  const auto sa = a.sorted();
  const auto sb = b.sorted();
  const double n = static_cast<double>(sa.size());
  WassersteinDq out;
  double s = 0.0;
  for (std::size_t k = 0; k < sa.size(); ++k) {
    s += d_q(sa[k], sb[k], q);
  }
  out.bound = s / n;
  if (want_exact) {
    std::vector<std::size_t> perm(sa.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = out.bound;
    do {
      double c = 0.0;
      for (std::size_t k = 0; k < sa.size(); ++k) {
        c += d_q(sa[k], sb[perm[k]], q);
      }
      best = std::min(best, c / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.exact = best;
  }
  return out;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) {
    return 1.0;
  }
  if (lambda < 0.2) {
    // The alternating series converges slowly here and the value is 1 to double precision.
    return 1.0;
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) {
      break;
    }
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_statistic(const Sample& a, const Sample& b) {
  const auto sa = a.sorted();
  const auto sb = b.sorted();
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  return {d, kolmogorov_survival(std::sqrt(ne) * d)};
}

KsResult ks_statistic(const Sample& a, const std::function<double(double)>& cdf) {
  const auto sa = a.sorted();
  const double n = static_cast<double>(sa.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sa.size(); ++k) {
    const double f = cdf(sa[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) {
    return 0.0;
  }
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) {
    return 0.0;
  }
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) {
    s += (x - m) * (x - m);
  }
  return s / static_cast<double>(xs.size() - 1);
}

double median(std::vector<double> xs) {
  if (xs.empty()) {
    throw ConfigError("median of an empty sample");
  }
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  if (xs.size() % 2 == 1) {
    return xs[mid];
  }
  const double hi = xs[mid];
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

namespace {

std::vector<double> ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return xs[l] < xs[r]; });
  std::vector<double> r(xs.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t e = k;
    while (e + 1 < order.size() && xs[order[e + 1]] == xs[order[k]]) ++e;
    const double avg = 0.5 * static_cast<double>(k + e) + 1.0;
    for (std::size_t t = k; t <= e; ++t) r[order[t]] = avg;
    k = e + 1;
  }
  return r;
}

}  // namespace

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ConfigError("rank correlation needs two equal-length samples of size >= 2");
  }
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = sample_mean(ra);
  const double mb = sample_mean(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    sab += (ra[k] - ma) * (rb[k] - mb);
    saa += (ra[k] - ma) * (ra[k] - ma);
    sbb += (rb[k] - mb) * (rb[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace nearstable
