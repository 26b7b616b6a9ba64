#include "spg/factor_kernels.hpp"

#include <algorithm>
#include <limits>

namespace spg {

template <class R>
bool normalize(Triple& t) {
  if constexpr (std::is_same_v<R, SumProduct>) {
    const double s = t[0] + t[1] + t[2];
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    for (double& x : t) x /= s;
  } else {
    const double m = std::max({t[0], t[1], t[2]});
    if (m == R::zero() || !std::isfinite(m)) return false;
    for (double& x : t) x -= m;
  }
  return true;
}

template <class R>
void user_factor(const UserFactorInput& input, std::span<Triple> out, UserFactorSummary& summary) {
  const auto& nb = input.neighbors;
  const std::size_t d = nb.size();

  std::vector<double> u(d), ua(d), s(d);
  for (std::size_t c = 0; c < d; ++c) {
    u[c] = nb[c].in[kU];
    ua[c] = R::add(nb[c].in[kU], nb[c].in[kA]);
    s[c] = nb[c].may_serve
               ? R::mul(nb[c].in[kS], R::from_log(input.bias * static_cast<double>(nb[c].value)))
               : R::zero();
  }

  // prefix/suffix products for leave-one-out
  auto prefix_suffix = [&](const std::vector<double>& f, std::vector<double>& pre,
                           std::vector<double>& suf) {
    pre.assign(d + 1, R::one());
    suf.assign(d + 1, R::one());
    for (std::size_t c = 0; c < d; ++c) pre[c + 1] = R::mul(pre[c], f[c]);
    for (std::size_t c = d; c-- > 0;) suf[c] = R::mul(f[c], suf[c + 1]);
  };
  std::vector<double> pre_u, suf_u, pre_ua, suf_ua;
  prefix_suffix(u, pre_u, suf_u);
  prefix_suffix(ua, pre_ua, suf_ua);

  // hi[a]: sum over served b != a with v_b >= v_a; lo[a]: with v_b < v_a.
  std::vector<double> hi(d, R::zero()), lo(d, R::zero());
  summary.served.assign(d, R::zero());
  std::vector<double> g(d), pre, suf;
  for (std::size_t b = 0; b < d; ++b) {
    if (s[b] == R::zero()) continue;
    for (std::size_t c = 0; c < d; ++c)
      g[c] = c == b ? R::one() : (nb[c].value > nb[b].value ? u[c] : ua[c]);
    prefix_suffix(g, pre, suf);
    summary.served[b] = R::mul(s[b], pre[d]);
    for (std::size_t a = 0; a < d; ++a) {
      if (a == b) continue;
      const double term = R::mul(s[b], R::mul(pre[a], suf[a + 1]));
      if (nb[b].value >= nb[a].value)
        hi[a] = R::add(hi[a], term);
      else
        lo[a] = R::add(lo[a], term);
    }
  }

  const double q0 = input.weight_inactive;
  const double q1 = input.weight_active;
  for (std::size_t a = 0; a < d; ++a) {
    const double all_u = input.may_disconnect ? R::mul(pre_u[a], suf_u[a + 1]) : R::zero();
    const double all_ua = R::mul(pre_ua[a], suf_ua[a + 1]);
    const double idle = R::mul(q0, all_ua);
    out[a][kU] = R::add(idle, R::mul(q1, R::add(all_u, R::add(hi[a], lo[a]))));
    out[a][kA] = R::add(idle, R::mul(q1, hi[a]));
    double served = R::zero();
    if (nb[a].may_serve) {
      served = R::from_log(input.bias * static_cast<double>(nb[a].value));
      for (std::size_t c = 0; c < d; ++c)
        if (c != a) served = R::mul(served, nb[c].value > nb[a].value ? u[c] : ua[c]);
    }
    out[a][kS] = R::mul(q1, served);
  }

  summary.inactive = pre_ua[d];
  summary.disconnected = input.may_disconnect ? pre_u[d] : R::zero();
  summary.active = summary.disconnected;
  for (double t : summary.served) summary.active = R::add(summary.active, t);
  summary.total = R::add(R::mul(q0, summary.inactive), R::mul(q1, summary.active));
}

namespace {

// Value kept as mantissa times from_log(scale) so long products do not underflow.
template <class R>
struct Scaled {
  double value = R::zero();
  double scale = 0.0;

  void add(double v, double s) {
    if (v == R::zero()) return;
    if (value == R::zero()) {
      value = v, scale = s;
    } else if (s <= scale) {
      value = R::add(value, R::mul(v, R::from_log(s - scale)));
    } else {
      value = R::add(R::mul(value, R::from_log(scale - s)), v);
      scale = s;
    }
  }
};

}  // namespace

template <class R>
double unit_factor(std::span<const UnitNeighbor> neighbors, std::int64_t capacity,
                   std::span<Triple> out) {
  const std::size_t d = neighbors.size();
  const auto cap = static_cast<std::size_t>(capacity);
  const std::size_t width = cap + 1;

  // pre[i] = P over neighbours [0, i), suf[i] = P over [i, d), as
  // polynomials in the served load T = 0..C at the current availability
  // threshold S. Edge u is "available-mode" while S <= C - w_u.
  // Each row is divided by its largest entry; the log of the divisor
  // accumulates in pre_scale / suf_scale.
  std::vector<double> pre((d + 1) * width), suf((d + 1) * width);
  std::vector<double> pre_scale(d + 1, 0.0), suf_scale(d + 1, 0.0);
  auto pre_at = [&](std::size_t i) { return pre.data() + i * width; };
  auto suf_at = [&](std::size_t i) { return suf.data() + i * width; };

  auto rebuild = [&](std::size_t load) {
    std::fill(pre_at(0), pre_at(0) + width, R::zero());
    pre_at(0)[0] = R::one();
    std::fill(suf_at(d), suf_at(d) + width, R::zero());
    suf_at(d)[0] = R::one();
    auto step = [&](const double* src, double src_scale, double* dst, const UnitNeighbor& n) {
      const bool available = static_cast<std::int64_t>(load) <= capacity - n.weight;
      const double idle = available ? n.in[kA] : n.in[kU];
      const auto w = static_cast<std::size_t>(n.weight);
      double top = R::zero();
      for (std::size_t t = 0; t < width; ++t) {
        double v = R::mul(src[t], idle);
        if (w <= t) v = R::add(v, R::mul(src[t - w], n.in[kS]));
        dst[t] = v;
        top = std::max(top, v);
      }
      if (top == R::zero()) return src_scale;
      for (std::size_t t = 0; t < width; ++t) dst[t] = R::div(dst[t], top);
      return src_scale + R::to_log(top);
    };
    for (std::size_t i = 0; i < d; ++i)
      pre_scale[i + 1] = step(pre_at(i), pre_scale[i], pre_at(i + 1), neighbors[i]);
    for (std::size_t i = d; i-- > 0;)
      suf_scale[i] = step(suf_at(i + 1), suf_scale[i + 1], suf_at(i), neighbors[i]);
  };

  auto leave_one_out = [&](std::size_t i, std::size_t t) {
    const double* p = pre_at(i);
    const double* q = suf_at(i + 1);
    double acc = R::zero();
    for (std::size_t t1 = 0; t1 <= t; ++t1) acc = R::add(acc, R::mul(p[t1], q[t - t1]));
    return acc;
  };

  Scaled<R> z;
  std::vector<std::array<Scaled<R>, 3>> acc(d);
  for (std::size_t load = 0; load <= cap; ++load) {
    bool regime_change = load == 0;
    for (const auto& n : neighbors)
      if (static_cast<std::int64_t>(load) == capacity - n.weight + 1) regime_change = true;
    if (regime_change) rebuild(load);

    z.add(pre_at(d)[load], pre_scale[d]);
    for (std::size_t i = 0; i < d; ++i) {
      const auto w = neighbors[i].weight;
      const double scale = pre_scale[i] + suf_scale[i + 1];
      const double same = leave_one_out(i, load);
      acc[i][static_cast<std::int64_t>(load) > capacity - w ? kU : kA].add(same, scale);
      if (static_cast<std::int64_t>(load) >= w)
        acc[i][kS].add(leave_one_out(i, load - static_cast<std::size_t>(w)), scale);
    }
  }

  for (std::size_t i = 0; i < d; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& a : acc[i])
      if (a.value != R::zero()) top = std::max(top, a.scale + R::to_log(a.value));
    for (int k = 0; k < 3; ++k)
      out[i][k] = acc[i][k].value == R::zero()
                      ? R::zero()
                      : R::from_log(acc[i][k].scale + R::to_log(acc[i][k].value) - top);
  }
  return z.value == R::zero() ? -std::numeric_limits<double>::infinity()
                              : z.scale + R::to_log(z.value);
}

template bool normalize<SumProduct>(Triple&);
template bool normalize<MaxPlus>(Triple&);
template void user_factor<SumProduct>(const UserFactorInput&, std::span<Triple>, UserFactorSummary&);
template void user_factor<MaxPlus>(const UserFactorInput&, std::span<Triple>, UserFactorSummary&);
template double unit_factor<SumProduct>(std::span<const UnitNeighbor>, std::int64_t, std::span<Triple>);
template double unit_factor<MaxPlus>(std::span<const UnitNeighbor>, std::int64_t, std::span<Triple>);

}  // namespace spg
