#include "spg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spg::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

namespace {

double p_value(double d, double n_eff) {
  const double s = std::sqrt(n_eff);
  return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

KsResult ks_normal(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("ks_normal: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, p_value(d, n)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, p_value(d, na * nb / (na + nb))};
}

Histogram histogram(std::span<const double> x, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram: bad binning");
  Histogram h{lo, hi, std::vector<std::int64_t>(bins, 0)};
  for (double v : x) {
    auto k = static_cast<std::int64_t>(std::floor((v - lo) / h.width()));
    k = std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(k)];
  }
  return h;
}

int count_modes(const Histogram& h, double min_fraction, double min_dip) {
  std::int64_t total = 0;
  for (auto c : h.counts) total += c;
  const double floor_count = min_fraction * static_cast<double>(total);
  std::vector<std::int64_t> c;
  for (auto v : h.counts) {
    const std::int64_t kept = static_cast<double>(v) < floor_count ? 0 : v;
    if (c.empty() || c.back() != kept) c.push_back(kept);
  }
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const bool left = i == 0 || c[i - 1] < c[i];
    const bool right = i + 1 == c.size() || c[i + 1] < c[i];
    if (!(left && right && c[i] > 0)) continue;
    if (!peaks.empty()) {
      const std::size_t prev = peaks.back();
      const auto valley = *std::min_element(c.begin() + prev, c.begin() + i + 1);
      if (static_cast<double>(valley) > (1.0 - min_dip) * static_cast<double>(std::min(c[prev], c[i]))) {
        if (c[i] > c[prev]) peaks.back() = i;
        continue;
      }
    }
    peaks.push_back(i);
  }
  return static_cast<int>(peaks.size());
}

}  // namespace spg::stats
