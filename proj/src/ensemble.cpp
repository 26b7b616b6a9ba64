#include "spg/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <tuple>

#include "spg/rng.hpp"

namespace spg {

void EnsembleParams::validate() const {
  if (n_users < 0 || n_units < 0) throw std::invalid_argument("negative N or M");
  if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in (0, 1]");
  if (w.lo < 1 || v.lo < 1) throw std::invalid_argument("weights and values must be >= 1");
  if (w.lo > w.hi || v.lo > v.hi) throw std::invalid_argument("empty w or v range");
  if (!(std::abs(c) <= 1.0)) throw std::invalid_argument("c must lie in [-1, 1]");
  if (std::abs(c) == 1.0 && w.size() != v.size())
    throw std::invalid_argument("|c| = 1 needs w and v ranges of equal length");
}

namespace {

std::shared_ptr<const CorrelatedSampler> shared_sampler(double c, IntRange w, IntRange v) {
  static std::mutex mutex;
  static std::map<std::tuple<double, std::int64_t, std::int64_t, std::int64_t, std::int64_t>,
                  std::shared_ptr<const CorrelatedSampler>>
      cache;
  const auto key = std::make_tuple(c, w.lo, w.hi, v.lo, v.hi);
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_shared<CorrelatedSampler>(c, w, v)).first;
  return it->second;
}

}  // namespace

GameInstance sample_instance(const EnsembleParams& params, std::uint64_t index) {
  params.validate();
  const auto sampler = shared_sampler(params.c, params.w, params.v);
  Rng rng = make_rng(params.seed, index);
  std::bernoulli_distribution present(params.q);
  std::vector<Edge> edges;
  for (Index u = 0; u < params.n_users; ++u)
    for (Index a = 0; a < params.n_units; ++a) {
      if (!present(rng)) continue;
      const auto [w, v] = (*sampler)(rng);
      edges.push_back(Edge{u, a, w, v});
    }
  std::vector<double> p;
  if (params.stochastic) {
    p.resize(params.n_users);
    for (double& x : p) {
      do x = uniform01(rng);
      while (x <= 0.0);
    }
  }
  return GameInstance(params.n_users, params.n_units, std::move(edges),
                      std::vector<std::int64_t>(params.n_units, params.capacity), std::move(p));
}

CapacityBounds capacity_bounds(const GameInstance& inst, bool weighted) {
  CapacityBounds b;
  for (Index u = 0; u < inst.n_users(); ++u) {
    const auto edges = inst.user_edges(u);
    if (edges.empty()) continue;
    std::int64_t lo = inst.edge(edges.front()).weight, hi = lo;
    for (Index e : edges) {
      lo = std::min(lo, inst.edge(e).weight);
      hi = std::max(hi, inst.edge(e).weight);
    }
    const double p = weighted ? inst.activity(u) : 1.0;
    b.lower += p * static_cast<double>(lo);
    b.upper += p * static_cast<double>(hi);
  }
  return b;
}

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::domain_error("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

namespace {

Rational make(__int128 n, __int128 d) {
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) throw std::overflow_error("rational overflow");
  return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}

}  // namespace

Rational operator+(Rational a, Rational b) {
  return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
              static_cast<__int128>(a.den) * b.den);
}
Rational operator-(Rational a, Rational b) { return a + Rational(-b.num, b.den); }
Rational operator*(Rational a, Rational b) {
  return make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}
Rational operator/(Rational a, Rational b) {
  if (b.num == 0) throw std::domain_error("division by zero");
  return make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
}

MeanFieldBounds mean_field_bounds(const EnsembleParams& params) {
  params.validate();
  if (params.c != 1.0) throw std::invalid_argument("mean-field bounds need c = 1");
  const Rational n_all(params.n_users), m(params.n_units), cap(params.capacity);
  const Rational delta(params.w.hi - params.v.hi);
  const Rational vmin(params.v.lo), vmax(params.v.hi);
  const Rational total = m * cap;
  auto clamp_n = [&](Rational n) { return std::clamp(n, Rational(0), n_all); };

  // served count n = N - D; v-bar as a function of n for each problem
  auto evaluate = [&](Rational n, Rational vbar) -> std::optional<MeanFieldPoint> {
    if (vbar < vmin || vmax < vbar) return std::nullopt;
    if (total < n * (vbar + delta)) return std::nullopt;
    return MeanFieldPoint{n * vbar, n_all - n, vbar};
  };

  std::optional<MeanFieldPoint> best_max;
  for (Rational n : {clamp_n(total / (vmax + delta)), n_all}) {
    if (n.num == 0) continue;
    const auto pt = evaluate(n, std::min(vmax, total / n - delta));
    if (pt && (!best_max || best_max->utility < pt->utility)) best_max = pt;
  }

  std::optional<MeanFieldPoint> best_min;
  for (Rational n : {n_all, clamp_n(total / (vmax + delta) - m), clamp_n(total / (vmin + delta) - m),
                     Rational(0)}) {
    const auto pt = evaluate(n, std::max(vmin, total / (n + m) - delta));
    if (pt && (!best_min || pt->utility < best_min->utility)) best_min = pt;
  }

  if (!best_max || !best_min) throw std::invalid_argument("mean-field constraints are infeasible");
  return MeanFieldBounds{*best_min, *best_max};
}

}  // namespace spg
