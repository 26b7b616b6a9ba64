#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spg/model.hpp"
#include "spg/rng.hpp"

namespace spg {

struct DynamicsRun {
  Assignment final;
  int rounds = 0;                          // best-response rounds, including the final quiet one
  int moves = 0;                           // improving moves applied
  std::vector<std::int64_t> trajectory;    // U after each improving move
  std::int64_t init_utility = 0;
  std::int64_t final_utility = 0;
};

/// Activity vector drawn from the instance's p_u (all ones when deterministic).
std::vector<std::uint8_t> draw_activity(const GameInstance& inst, Rng& rng);

// Sequential initializations: users of `active` are visited once in a random
// permutation and pick among the units still available to them; users with
// no available unit stay disconnected. Empty `active` means everyone.
Assignment init_random(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active = {});
Assignment init_worst(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active = {});
Assignment init_best(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active = {});
/// P(a) proportional to v_ua^gamma among available units; |gamma| >= 64 is
/// treated as the exact argmax/argmin.
Assignment init_gamma(const GameInstance& inst, double gamma, Rng& rng,
                      std::vector<std::uint8_t> active = {});

/// init_worst / init_best visiting users in the given order.
Assignment init_worst_ordered(const GameInstance& inst, std::span<const Index> order,
                              std::vector<std::uint8_t> active = {});
Assignment init_best_ordered(const GameInstance& inst, std::span<const Index> order,
                             std::vector<std::uint8_t> active = {});

inline constexpr double kGammaCutoff = 64.0;

/// Greedy placement; the result is a Nash equilibrium (checked by a quiet
/// best-response sweep).
DynamicsRun greedy(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active = {});

/// Same, visiting users in the given order.
DynamicsRun greedy_ordered(const GameInstance& inst, std::span<const Index> order,
                           std::vector<std::uint8_t> active = {});

/// Rounds of best responses in fresh random permutations until a quiet round.
DynamicsRun best_response_run(const GameInstance& inst, Assignment x0, Rng& rng);

/// Best-response rounds that always use `order` (users absent from it never move).
DynamicsRun best_response_run_ordered(const GameInstance& inst, Assignment x0,
                                      std::span<const Index> order);

/// Trajectory of assignments visited by an ordered best-response run.
std::vector<Assignment> improvement_path(const GameInstance& inst, Assignment x0,
                                         std::span<const Index> order);

struct RepairResult {
  Assignment assignment;
  int dropped = 0;  // users disconnected to restore feasibility
  int moves = 0;    // best-response moves afterwards
};

/// Turns any structurally valid assignment into a Nash equilibrium:
/// overloaded units shed their lowest-value users, then best responses in
/// user-id order run to quiescence.
RepairResult repair_to_nash(const GameInstance& inst, Assignment x);

struct ArrivalsDeparturesOptions {
  std::int64_t steps = 0;     // recorded steps; 0 means 100 N
  std::int64_t burn_in = -1;  // discarded steps; negative means 10 N
  bool certify = true;        // check every recorded state with is_nash
};

struct ArrivalsDeparturesStep {
  std::int64_t utility = 0;
  std::int64_t disconnected = 0;
  std::int64_t spare_capacity = 0;
  std::int64_t active = 0;
};

struct ArrivalsDeparturesRun {
  DynamicsRun run;                               // final state; moves summed over steps
  std::vector<ArrivalsDeparturesStep> series;    // one entry per recorded step
  std::vector<double> activity_fraction;         // per user, over recorded steps
  bool all_nash = true;
  bool trajectories_increasing = true;
};

/// Users flip activity (active -> inactive w.p. (1-p)/N, inactive -> active
/// w.p. p/N, arriving users pick greedily), then best response restores
/// equilibrium after every step. Starts with everyone inactive.
ArrivalsDeparturesRun arrivals_departures(const GameInstance& inst,
                                          const ArrivalsDeparturesOptions& options, Rng& rng);

enum class Algorithm { Greedy, BestResponse, BestResponseBad, GammaBestResponse, ArrivalsDepartures };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm algo);

/// One run of G / BR / BRB / gamma-BR on a fresh activity draw. Arrivals
/// and departures are not handled here (see arrivals_departures).
DynamicsRun run_dynamics(const GameInstance& inst, Algorithm algo, double gamma, Rng& rng);

/// True when `trajectory` is strictly increasing.
bool strictly_increasing(std::span<const std::int64_t> trajectory);

}  // namespace spg
