#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spg::stats {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 points.
double stddev(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov tail probability Q(lambda).
double kolmogorov_q(double lambda);

/// One-sample test against the standard normal.
KsResult ks_normal(std::vector<double> x);
/// Two-sample test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double normal_cdf(double x);
double normal_pdf(double x);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::int64_t> counts;  // equal-width bins on [lo, hi]; outliers clamp to the end bins
  double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
};

Histogram histogram(std::span<const double> x, double lo, double hi, std::size_t bins);

/// Number of local maxima of a histogram after merging runs of equal counts,
/// ignoring bins whose count is below `min_fraction` of the total. Two neighbouring
/// maxima count separately only if the lowest bin between them is at most
/// (1 - min_dip) times the smaller of the two.
int count_modes(const Histogram& h, double min_fraction = 0.01, double min_dip = 0.0);

}  // namespace spg::stats
