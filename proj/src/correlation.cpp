#include "spg/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spg {

namespace {

std::vector<double> standardized(IntRange r) {
  const std::int64_t n = r.size();
  std::vector<double> z(n);
  if (n == 1) return z;
  const double mean = 0.5 * static_cast<double>(r.lo + r.hi);
  double var = 0.0;
  for (std::int64_t i = 0; i < n; ++i) var += std::pow(static_cast<double>(r.lo + i) - mean, 2);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (std::int64_t i = 0; i < n; ++i) z[i] = (static_cast<double>(r.lo + i) - mean) / sd;
  return z;
}

double log_sum_exp(const std::vector<double>& x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double t : x) s += std::exp(t - m);
  return m + std::log(s);
}

void check_range(IntRange r) {
  if (r.lo > r.hi) throw std::invalid_argument("empty integer range");
}

}  // namespace

TiltTable tilt_table(double lambda, IntRange w, IntRange v) {
  check_range(w);
  check_range(v);
  const auto zw = standardized(w);
  const auto zv = standardized(v);
  const std::size_t nw = zw.size(), nv = zv.size();
  const double log_rw = -std::log(static_cast<double>(nw));
  const double log_rv = -std::log(static_cast<double>(nv));

  // log-domain Sinkhorn on the kernel lambda z_w z_v
  std::vector<double> la(nw, 0.0), lb(nv, 0.0), buf;
  for (int it = 0; it < 100000; ++it) {
    for (std::size_t i = 0; i < nw; ++i) {
      buf.resize(nv);
      for (std::size_t j = 0; j < nv; ++j) buf[j] = lambda * zw[i] * zv[j] + lb[j];
      la[i] = log_rw - log_sum_exp(buf);
    }
    double err = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
      buf.resize(nw);
      for (std::size_t i = 0; i < nw; ++i) buf[i] = lambda * zw[i] * zv[j] + la[i];
      const double col = log_sum_exp(buf) + lb[j];
      err = std::max(err, std::abs(std::exp(col - log_rv) - 1.0));
      lb[j] = log_rv - (col - lb[j]);
    }
    if (err < 1e-15) break;
  }

  TiltTable t{w, v, lambda, std::vector<double>(nw * nv)};
  for (std::size_t i = 0; i < nw; ++i)
    for (std::size_t j = 0; j < nv; ++j) t.prob[i * nv + j] = std::exp(lambda * zw[i] * zv[j] + la[i] + lb[j]);
  return t;
}

double TiltTable::pearson() const {
  const std::size_t nv = static_cast<std::size_t>(v.size());
  double sum = 0.0, mw = 0.0, mv = 0.0;
  for (std::size_t k = 0; k < prob.size(); ++k) {
    sum += prob[k];
    mw += prob[k] * static_cast<double>(w.lo + static_cast<std::int64_t>(k / nv));
    mv += prob[k] * static_cast<double>(v.lo + static_cast<std::int64_t>(k % nv));
  }
  mw /= sum;
  mv /= sum;
  double cov = 0.0, vw = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < prob.size(); ++k) {
    const double dw = static_cast<double>(w.lo + static_cast<std::int64_t>(k / nv)) - mw;
    const double dv = static_cast<double>(v.lo + static_cast<std::int64_t>(k % nv)) - mv;
    cov += prob[k] * dw * dv;
    vw += prob[k] * dw * dw;
    vv += prob[k] * dv * dv;
  }
  if (vw <= 0.0 || vv <= 0.0) return 0.0;
  return cov / std::sqrt(vw * vv);
}

double tune_lambda(double c, IntRange w, IntRange v, double tol) {
  if (!(std::abs(c) < 1.0)) throw std::invalid_argument("tune_lambda needs |c| < 1");
  if (c == 0.0) return 0.0;
  const double sign = c > 0 ? 1.0 : -1.0;
  const double target = std::abs(c);
  auto rho = [&](double lam) { return sign * tilt_table(sign * lam, w, v).pearson(); };

  double lo = 0.0, hi = 1.0;
  while (rho(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw std::runtime_error("correlation not reachable on these ranges");
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double r = rho(mid);
    if (std::abs(r - target) <= tol) break;
    (r < target ? lo : hi) = mid;
  }
  return sign * mid;
}

CorrelatedSampler::CorrelatedSampler(double c, IntRange w, IntRange v) : c_(c), w_(w), v_(v) {
  check_range(w);
  check_range(v);
  if (!(std::abs(c) <= 1.0)) throw std::invalid_argument("correlation must lie in [-1, 1]");
  const std::size_t nw = w.size(), nv = v.size();
  if (std::abs(c) == 1.0) {
    if (w.size() != v.size()) throw std::invalid_argument("|c| = 1 needs ranges of equal length");
    table_ = TiltTable{w, v, c > 0 ? HUGE_VAL : -HUGE_VAL, std::vector<double>(nw * nv, 0.0)};
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t i = c > 0 ? j : nw - 1 - j;
      table_.prob[i * nv + j] = 1.0 / static_cast<double>(nv);
    }
  } else {
    table_ = tilt_table(tune_lambda(c, w, v), w, v);
  }
  cdf_.resize(table_.prob.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < cdf_.size(); ++k) cdf_[k] = acc += table_.prob[k];
  for (double& x : cdf_) x /= acc;
}

std::pair<std::int64_t, std::int64_t> CorrelatedSampler::operator()(Rng& rng) const {
  const auto nv = static_cast<std::size_t>(v_.size());
  if (std::abs(c_) == 1.0) {
    std::uniform_int_distribution<std::int64_t> pick(0, v_.size() - 1);
    const std::int64_t j = pick(rng);
    const std::int64_t i = c_ > 0 ? j : v_.size() - 1 - j;
    return {w_.lo + i, v_.lo + j};
  }
  const double r = uniform01(rng);
  std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), r) - cdf_.begin());
  k = std::min(k, cdf_.size() - 1);
  return {w_.lo + static_cast<std::int64_t>(k / nv), v_.lo + static_cast<std::int64_t>(k % nv)};
}

double CorrelatedSampler::pearson() const { return table_.pearson(); }

}  // namespace spg
