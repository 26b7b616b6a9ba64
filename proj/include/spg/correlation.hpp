#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spg/rng.hpp"

namespace spg {

struct IntRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  std::int64_t size() const { return hi - lo + 1; }
  bool operator==(const IntRange&) const = default;
};

/// Joint law on the (w, v) grid with uniform marginals and density
/// proportional to alpha_w beta_v exp(lambda z_w z_v), z the standardized
/// grid coordinates. It maximizes entropy among uniform-marginal laws with a
/// given E[wv], and its Pearson correlation is increasing in lambda.
struct TiltTable {
  IntRange w, v;
  double lambda = 0.0;
  std::vector<double> prob;  // row-major, prob[(w - w.lo) * v.size() + (v - v.lo)]

  double pearson() const;
};

TiltTable tilt_table(double lambda, IntRange w, IntRange v);

/// lambda with |pearson - c| <= tol (bisection over a widening bracket).
/// Requires |c| < 1.
double tune_lambda(double c, IntRange w, IntRange v, double tol = 1e-9);

/// (w, v) sampler with Pearson correlation c. |c| = 1 gives the affine
/// (anti)diagonal map and needs ranges of equal length.
class CorrelatedSampler {
 public:
  CorrelatedSampler(double c, IntRange w, IntRange v);

  std::pair<std::int64_t, std::int64_t> operator()(Rng& rng) const;

  double target() const { return c_; }
  /// Exact correlation of the sampled law.
  double pearson() const;
  const TiltTable& table() const { return table_; }

 private:
  double c_;
  IntRange w_, v_;
  TiltTable table_;
  std::vector<double> cdf_;
};

}  // namespace spg
