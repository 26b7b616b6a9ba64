#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spg/model.hpp"
#include "spg/rng.hpp"

namespace spg::oracle {

/// Thrown when the enumeration space exceeds the configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultBudget = 1e7;

struct EquilibriumCensus {
  std::vector<Assignment> equilibria;
  std::map<std::int64_t, std::int64_t> utility_histogram;
  std::int64_t count = 0;
};

/// Exhaustive list of pure Nash equilibria. `active` empty means all users
/// active. Refuses (BudgetExceeded) when prod_u (deg(u)+1) > budget.
EquilibriumCensus enumerate_nash(const GameInstance& inst, std::vector<std::uint8_t> active = {},
                                 double budget = kDefaultBudget);

/// Size of the assignment space enumerate_nash would walk.
double enumeration_size(const GameInstance& inst, const std::vector<std::uint8_t>& active);

/// Frequency with which each edge is Serving across the census, with
/// equilibria reweighted by exp(mu * U).
std::vector<double> edge_service_frequencies(const GameInstance& inst,
                                             const EquilibriumCensus& census, double mu = 0.0);

struct WeightedAverages {
  double utility = 0.0;
  double disconnected = 0.0;
  double spare_capacity = 0.0;
  double log_count = 0.0;  // log of sum_y exp(mu U(y)) over the census
  double entropy = 0.0;
  std::vector<double> edge_service;  // per edge P[y_ua = S]
};

/// Exact Gibbs averages over the census at bias mu.
WeightedAverages gibbs_averages(const GameInstance& inst, const EquilibriumCensus& census,
                                double mu);

using Observable = std::function<double(const Assignment&, const ObservableReport&)>;

double observe_utility(const Assignment&, const ObservableReport& r);
double observe_disconnected(const Assignment&, const ObservableReport& r);
double observe_spare_capacity(const Assignment&, const ObservableReport& r);

struct QuenchedResult {
  double mean = 0.0;
  std::int64_t realizations = 0;  // t vectors enumerated or sampled
  bool exhaustive = true;
  std::vector<double> edge_service;  // quenched per-edge P[y_ua = S]
};

/// Double average over activity vectors t ~ prod Bernoulli(p_u) and over the
/// uniform measure on the equilibria of each t. Exhaustive over t when
/// `samples` is empty (at most 20 users with 0 < p < 1), sampled otherwise.
QuenchedResult quenched_average(const GameInstance& inst, const Observable& observable,
                                std::optional<std::int64_t> samples = std::nullopt,
                                std::uint64_t seed = 0, double budget = kDefaultBudget);

}  // namespace spg::oracle
