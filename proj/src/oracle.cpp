#include "spg/oracle.hpp"

#include <cmath>
#include <string>

namespace spg::oracle {

double enumeration_size(const GameInstance& inst, const std::vector<std::uint8_t>& active) {
  double size = 1.0;
  for (Index u = 0; u < inst.n_users(); ++u)
    if (active.empty() || active[u]) size *= static_cast<double>(inst.user_edges(u).size() + 1);
  return size;
}

EquilibriumCensus enumerate_nash(const GameInstance& inst, std::vector<std::uint8_t> active,
                                 double budget) {
  if (active.empty()) active.assign(inst.n_users(), 1);
  const double size = enumeration_size(inst, active);
  if (size > budget)
    throw BudgetExceeded("enumeration needs " + std::to_string(size) +
                         " assignments, budget is " + std::to_string(budget));

  std::vector<Index> players;
  for (Index u = 0; u < inst.n_users(); ++u)
    if (active[u]) players.push_back(u);

  Assignment x = Assignment::empty(inst, active);
  // digit k of the odometer: 0 = disconnected, j = j-th neighbour
  std::vector<std::size_t> digit(players.size(), 0);
  EquilibriumCensus census;
  while (true) {
    if (is_nash(inst, x)) {
      const auto r = observables(inst, x);
      census.equilibria.push_back(x);
      ++census.utility_histogram[r.total_utility];
      ++census.count;
    }
    std::size_t k = 0;
    for (; k < players.size(); ++k) {
      const Index u = players[k];
      const auto nb = inst.user_edges(u);
      if (++digit[k] <= nb.size()) {
        x.choice[u] = inst.edge(nb[digit[k] - 1]).unit;
        break;
      }
      digit[k] = 0;
      x.choice[u] = kDisconnected;
    }
    if (k == players.size()) break;
  }
  return census;
}

WeightedAverages gibbs_averages(const GameInstance& inst, const EquilibriumCensus& census,
                                double mu) {
  WeightedAverages out;
  out.edge_service.assign(inst.n_edges(), 0.0);
  if (census.count == 0) return out;

  std::vector<ObservableReport> reports;
  reports.reserve(census.equilibria.size());
  double max_exponent = -INFINITY;
  for (const auto& x : census.equilibria) {
    reports.push_back(observables(inst, x));
    max_exponent = std::max(max_exponent, mu * static_cast<double>(reports.back().total_utility));
  }
  double z = 0.0;
  std::vector<double> weight(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    weight[i] = std::exp(mu * static_cast<double>(reports[i].total_utility) - max_exponent);
    z += weight[i];
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const double p = weight[i] / z;
    out.utility += p * static_cast<double>(reports[i].total_utility);
    out.disconnected += p * static_cast<double>(reports[i].disconnected);
    out.spare_capacity += p * static_cast<double>(reports[i].spare_capacity);
    if (p > 0) out.entropy -= p * std::log(p);
    const auto& x = census.equilibria[i];
    for (Index u = 0; u < inst.n_users(); ++u)
      if (x.choice[u] != kDisconnected) out.edge_service[inst.find_edge(u, x.choice[u])] += p;
  }
  out.log_count = std::log(z) + max_exponent;
  return out;
}

std::vector<double> edge_service_frequencies(const GameInstance& inst,
                                             const EquilibriumCensus& census, double mu) {
  return gibbs_averages(inst, census, mu).edge_service;
}

double observe_utility(const Assignment&, const ObservableReport& r) {
  return static_cast<double>(r.total_utility);
}
double observe_disconnected(const Assignment&, const ObservableReport& r) {
  return static_cast<double>(r.disconnected);
}
double observe_spare_capacity(const Assignment&, const ObservableReport& r) {
  return static_cast<double>(r.spare_capacity);
}

namespace {

struct PerT {
  double mean = 0.0;
  std::vector<double> edge_service;
};

PerT uniform_average(const GameInstance& inst, const std::vector<std::uint8_t>& t,
                     const Observable& observable, double budget) {
  const auto census = enumerate_nash(inst, t, budget);
  if (census.count < 1)
    throw std::logic_error("activity realization with no Nash equilibrium");
  PerT out;
  out.edge_service.assign(inst.n_edges(), 0.0);
  const double inv = 1.0 / static_cast<double>(census.count);
  for (const auto& x : census.equilibria) {
    out.mean += inv * observable(x, observables(inst, x));
    for (Index u = 0; u < inst.n_users(); ++u)
      if (x.choice[u] != kDisconnected) out.edge_service[inst.find_edge(u, x.choice[u])] += inv;
  }
  return out;
}

}  // namespace

QuenchedResult quenched_average(const GameInstance& inst, const Observable& observable,
                                std::optional<std::int64_t> samples, std::uint64_t seed,
                                double budget) {
  QuenchedResult result;
  result.edge_service.assign(inst.n_edges(), 0.0);

  if (samples) {
    if (*samples < 1) throw std::invalid_argument("need at least one sample");
    result.exhaustive = false;
    Rng rng = make_rng(seed);
    const double inv = 1.0 / static_cast<double>(*samples);
    for (std::int64_t s = 0; s < *samples; ++s) {
      std::vector<std::uint8_t> t(inst.n_users());
      for (Index u = 0; u < inst.n_users(); ++u) t[u] = uniform01(rng) < inst.activity(u);
      const auto avg = uniform_average(inst, t, observable, budget);
      result.mean += inv * avg.mean;
      for (std::size_t e = 0; e < inst.n_edges(); ++e) result.edge_service[e] += inv * avg.edge_service[e];
    }
    result.realizations = *samples;
    return result;
  }

  std::vector<Index> free_users;
  std::vector<std::uint8_t> base(inst.n_users(), 0);
  for (Index u = 0; u < inst.n_users(); ++u) {
    const double p = inst.activity(u);
    if (p >= 1.0)
      base[u] = 1;
    else if (p > 0.0)
      free_users.push_back(u);
  }
  if (free_users.size() > 20)
    throw BudgetExceeded("exhaustive quenched average limited to 20 stochastic users");

  const std::uint64_t n_t = std::uint64_t{1} << free_users.size();
  for (std::uint64_t mask = 0; mask < n_t; ++mask) {
    auto t = base;
    double prob = 1.0;
    for (std::size_t k = 0; k < free_users.size(); ++k) {
      const Index u = free_users[k];
      const bool on = (mask >> k) & 1U;
      t[u] = on;
      prob *= on ? inst.activity(u) : 1.0 - inst.activity(u);
    }
    const auto avg = uniform_average(inst, t, observable, budget);
    result.mean += prob * avg.mean;
    for (std::size_t e = 0; e < inst.n_edges(); ++e) result.edge_service[e] += prob * avg.edge_service[e];
  }
  result.realizations = static_cast<std::int64_t>(n_t);
  return result;
}

}  // namespace spg::oracle
