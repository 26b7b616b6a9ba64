#pragma once
// Independent brute-force references shared by the unit tests and the
// acceptance runner. Nothing here calls the message-passing code.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "spg/factor_kernels.hpp"
#include "spg/fixtures.hpp"
#include "spg/model.hpp"
#include "spg/oracle.hpp"
#include "spg/rng.hpp"

namespace spg::testing {

/// Two-unit example in the reduced notation: x_u = 1 means unit a (id 0),
/// x_u = 0 means unit b (id 1).
inline Assignment reduced(const GameInstance& inst, std::vector<int> x) {
  Assignment a = Assignment::empty(inst);
  for (std::size_t u = 0; u < x.size(); ++u) a.choice[u] = x[u] == 1 ? 0 : 1;
  return a;
}

inline std::vector<Index> order_of(std::initializer_list<int> one_based) {
  std::vector<Index> o;
  for (int u : one_based) o.push_back(u - 1);
  return o;
}

/// All y in {U,A,S}^d, as base-3 digits.
template <class Fn>
void for_each_config(std::size_t d, Fn&& fn) {
  std::vector<int> y(d, 0);
  while (true) {
    fn(y);
    std::size_t i = 0;
    while (i < d && ++y[i] == 3) y[i++] = 0;
    if (i == d) return;
  }
}

/// Outgoing user-factor messages by summing the factor over every joint
/// state of its edges. Factor: Q0 when no edge is served and every edge is
/// U or A; Q1 e^{mu v_b} when edge b is served and every other available
/// edge c has v_b >= v_c; Q1 when nothing is served and every edge is U.
inline std::vector<Triple> brute_user_factor(const std::vector<Triple>& in,
                                             const std::vector<std::int64_t>& value, double mu,
                                             double q0, double q1) {
  const std::size_t d = in.size();
  std::vector<Triple> out(d, Triple{0, 0, 0});
  for_each_config(d, [&](const std::vector<int>& y) {
    int served = -1, n_served = 0;
    for (std::size_t c = 0; c < d; ++c)
      if (y[c] == kS) served = static_cast<int>(c), ++n_served;
    double f = 0.0;
    if (n_served == 0) {
      f += q0;
      bool all_u = true;
      for (int s : y) all_u = all_u && s == kU;
      if (all_u) f += q1;
    } else if (n_served == 1) {
      bool ok = true;
      for (std::size_t c = 0; c < d; ++c)
        if (y[c] == kA && value[c] > value[served]) ok = false;
      if (ok) f += q1 * std::exp(mu * static_cast<double>(value[served]));
    }
    if (f == 0.0) return;
    for (std::size_t a = 0; a < d; ++a) {
      double w = f;
      for (std::size_t c = 0; c < d; ++c)
        if (c != a) w *= in[c][y[c]];
      out[a][y[a]] += w;
    }
  });
  return out;
}

/// Outgoing unit-factor messages: load of served edges within capacity, and
/// every unserved edge is A exactly when it would still fit.
inline std::vector<Triple> brute_unit_factor(const std::vector<Triple>& in,
                                             const std::vector<std::int64_t>& weight,
                                             std::int64_t capacity, double* z = nullptr) {
  const std::size_t d = in.size();
  std::vector<Triple> out(d, Triple{0, 0, 0});
  double total = 0.0;
  for_each_config(d, [&](const std::vector<int>& y) {
    std::int64_t load = 0;
    for (std::size_t c = 0; c < d; ++c)
      if (y[c] == kS) load += weight[c];
    if (load > capacity) return;
    for (std::size_t c = 0; c < d; ++c) {
      if (y[c] == kS) continue;
      const bool fits = load + weight[c] <= capacity;
      if ((y[c] == kA) != fits) return;
    }
    double all = 1.0;
    for (std::size_t c = 0; c < d; ++c) all *= in[c][y[c]];
    total += all;
    for (std::size_t a = 0; a < d; ++a) {
      double w = 1.0;
      for (std::size_t c = 0; c < d; ++c)
        if (c != a) w *= in[c][y[c]];
      out[a][y[a]] += w;
    }
  });
  if (z) *z = total;
  return out;
}

inline Triple normalized(Triple t) {
  const double s = t[0] + t[1] + t[2];
  for (double& x : t) x /= s;
  return t;
}

inline Triple random_triple(Rng& rng) {
  Triple t{uniform01(rng), uniform01(rng), uniform01(rng)};
  return normalized(t);
}

/// Random bipartite tree with `n_edges` edges; every new node hangs off a
/// uniformly chosen existing node of the other side.
inline GameInstance random_tree(Rng& rng, int n_edges, std::int64_t w_max = 4,
                                std::int64_t v_max = 5, std::int64_t c_max = 6) {
  std::uniform_int_distribution<std::int64_t> W(1, w_max), V(1, v_max), C(1, c_max);
  Index n_users = 1, n_units = 0;
  std::vector<Edge> edges;
  std::vector<std::pair<bool, Index>> nodes{{true, 0}};  // (is_user, id)
  for (int k = 0; k < n_edges; ++k) {
    const auto [is_user, id] = nodes[std::uniform_int_distribution<std::size_t>(0, nodes.size() - 1)(rng)];
    if (is_user) {
      edges.push_back({id, n_units, W(rng), V(rng)});
      nodes.push_back({false, n_units++});
    } else {
      edges.push_back({n_users, id, W(rng), V(rng)});
      nodes.push_back({true, n_users++});
    }
  }
  if (n_units == 0) n_units = 1;
  std::vector<std::int64_t> caps(n_units);
  for (auto& c : caps) c = C(rng);
  return GameInstance(n_users, n_units, std::move(edges), std::move(caps));
}

/// Random instance with `n_users` x `n_units` potential edges kept with
/// probability q; loops allowed.
inline GameInstance random_graph(Rng& rng, Index n_users, Index n_units, double q,
                                 std::int64_t w_max = 4, std::int64_t v_max = 5,
                                 std::int64_t c_max = 6) {
  std::uniform_int_distribution<std::int64_t> W(1, w_max), V(1, v_max), C(1, c_max);
  std::vector<Edge> edges;
  for (Index u = 0; u < n_users; ++u)
    for (Index a = 0; a < n_units; ++a)
      if (uniform01(rng) < q) edges.push_back({u, a, W(rng), V(rng)});
  std::vector<std::int64_t> caps(n_units);
  for (auto& c : caps) c = C(rng);
  return GameInstance(n_users, n_units, std::move(edges), std::move(caps));
}

/// Every structurally valid assignment of active users (x-space odometer).
template <class Fn>
void for_each_assignment(const GameInstance& inst, Fn&& fn) {
  Assignment x = Assignment::empty(inst);
  std::vector<std::size_t> digit(inst.n_users(), 0);
  while (true) {
    for (Index u = 0; u < inst.n_users(); ++u) {
      const auto nb = inst.user_edges(u);
      x.choice[u] = digit[u] == 0 ? kDisconnected : inst.edge(nb[digit[u] - 1]).unit;
    }
    fn(x);
    Index u = 0;
    while (u < inst.n_users()) {
      if (++digit[u] <= inst.user_edges(u).size()) break;
      digit[u++] = 0;
    }
    if (u == inst.n_users()) return;
  }
}

/// Per-edge P[served] over the census reweighted by e^{mu U}, plus the
/// partition sum.
struct Reweighted {
  std::vector<double> serving;
  double z = 0.0;
  double utility = 0.0;
};

inline Reweighted reweighted_frequencies(const GameInstance& inst,
                                         const oracle::EquilibriumCensus& census, double mu) {
  Reweighted r;
  r.serving.assign(inst.n_edges(), 0.0);
  for (const auto& x : census.equilibria) {
    const double u = static_cast<double>(observables(inst, x).total_utility);
    const double w = std::exp(mu * u);
    r.z += w;
    r.utility += w * u;
    for (Index user = 0; user < inst.n_users(); ++user)
      if (x.choice[user] != kDisconnected) r.serving[inst.find_edge(user, x.choice[user])] += w;
  }
  for (double& s : r.serving) s /= r.z;
  r.utility /= r.z;
  return r;
}

/// Exact linear-order mirror measure P(x, t) ~ Nash(x | t) prod_u P_u(t_u)
/// e^{nu_u t_u} e^{mu U}, with nu fitted so that P(t_u = 1) = p_u.
struct MirrorOracle {
  std::vector<double> serving;
  double utility = 0.0;
  std::vector<double> activity;
};

inline MirrorOracle linear_mirror_oracle(const GameInstance& inst, double mu = 0.0) {
  const Index n = inst.n_users();
  struct Term {
    std::vector<std::uint8_t> t;
    double prior;
    std::vector<std::pair<double, Assignment>> eq;  // (e^{mu U}, x)
  };
  std::vector<Term> terms;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    Term term;
    term.t.resize(n);
    term.prior = 1.0;
    for (Index u = 0; u < n; ++u) {
      term.t[u] = (mask >> u) & 1;
      term.prior *= term.t[u] ? inst.activity(u) : 1.0 - inst.activity(u);
    }
    if (term.prior == 0.0) continue;
    for (auto& x : oracle::enumerate_nash(inst, term.t).equilibria)
      term.eq.emplace_back(std::exp(mu * static_cast<double>(observables(inst, x).total_utility)), x);
    terms.push_back(std::move(term));
  }
  std::vector<double> nu(n, 0.0);
  auto weight = [&](const Term& term) {
    double e = 0.0;
    for (Index u = 0; u < n; ++u) e += nu[u] * term.t[u];
    return term.prior * std::exp(e);
  };
  MirrorOracle r;
  for (int it = 0; it < 10000; ++it) {
    std::vector<double> on(n, 0.0);
    double z = 0.0;
    for (const auto& term : terms) {
      double s = 0.0;
      for (const auto& [b, x] : term.eq) s += b;
      const double w = weight(term) * s;
      z += w;
      for (Index u = 0; u < n; ++u)
        if (term.t[u]) on[u] += w;
    }
    double change = 0.0;
    for (Index u = 0; u < n; ++u) {
      on[u] /= z;
      const double p = inst.activity(u);
      if (p <= 0.0 || p >= 1.0) continue;
      const double step = std::log(p / (1 - p)) - std::log(on[u] / (1 - on[u]));
      nu[u] += step;
      change = std::max(change, std::abs(step));
    }
    r.activity = on;
    if (change < 1e-15) break;
  }
  r.serving.assign(inst.n_edges(), 0.0);
  double z = 0.0;
  for (const auto& term : terms) {
    const double w = weight(term);
    for (const auto& [b, x] : term.eq) {
      const double wx = w * b;
      z += wx;
      r.utility += wx * static_cast<double>(observables(inst, x).total_utility);
      for (Index u = 0; u < n; ++u)
        if (x.choice[u] != kDisconnected) r.serving[inst.find_edge(u, x.choice[u])] += wx;
    }
  }
  for (double& s : r.serving) s /= z;
  r.utility /= z;
  return r;
}

}  // namespace spg::testing
