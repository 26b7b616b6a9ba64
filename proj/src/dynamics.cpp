#include "spg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace spg {

namespace {

// Picks one entry of `available` (edge ids, unit-id order) or -1.
using Chooser = std::function<Index(std::span<const Index> available)>;

std::vector<std::uint8_t> all_active(const GameInstance& inst, std::vector<std::uint8_t> active) {
  if (active.empty()) active.assign(inst.n_users(), 1);
  if (active.size() != static_cast<std::size_t>(inst.n_users()))
    throw StructuralError("activity vector length mismatch");
  return active;
}

Assignment place_sequentially(const GameInstance& inst, std::span<const Index> order,
                              std::vector<std::uint8_t> active, const Chooser& choose) {
  Assignment x = Assignment::empty(inst, std::move(active));
  std::vector<std::int64_t> load(inst.n_units(), 0);
  std::vector<Index> available;
  for (Index u : order) {
    if (!x.active[u]) continue;
    available.clear();
    for (Index e : inst.user_edges(u)) {
      const Edge& ed = inst.edge(e);
      if (load[ed.unit] + ed.weight <= inst.capacity(ed.unit)) available.push_back(e);
    }
    if (available.empty()) continue;
    const Index e = choose(available);
    x.choice[u] = inst.edge(e).unit;
    load[inst.edge(e).unit] += inst.edge(e).weight;
  }
  return x;
}

Index pick_best(const GameInstance& inst, std::span<const Index> available) {
  Index best = available.front();
  for (Index e : available)
    if (inst.edge(e).value > inst.edge(best).value) best = e;
  return best;
}

Index pick_worst(const GameInstance& inst, std::span<const Index> available) {
  Index worst = available.front();
  for (Index e : available)
    if (inst.edge(e).value < inst.edge(worst).value) worst = e;
  return worst;
}

std::int64_t utility_of(const GameInstance& inst, const Assignment& x) {
  std::int64_t total = 0;
  for (Index u = 0; u < inst.n_users(); ++u)
    if (auto v = current_value(inst, x, u)) total += *v;
  return total;
}

// Applies one round of best responses in `order`; returns moves made.
int best_response_round(const GameInstance& inst, Assignment& x, std::vector<std::int64_t>& load,
                        std::span<const Index> order, std::int64_t& utility,
                        std::vector<std::int64_t>* trajectory,
                        std::vector<Assignment>* path = nullptr) {
  int moves = 0;
  for (Index u : order) {
    if (!x.active[u]) continue;
    const auto target = best_response_of(inst, x, u, load);
    if (!target) continue;
    const Index from = x.choice[u];
    if (from != kDisconnected) {
      const Edge& old = inst.edge(inst.find_edge(u, from));
      load[from] -= old.weight;
      utility -= old.value;
    }
    const Edge& nw = inst.edge(inst.find_edge(u, *target));
    load[*target] += nw.weight;
    utility += nw.value;
    x.choice[u] = *target;
    ++moves;
    if (trajectory) trajectory->push_back(utility);
    if (path) path->push_back(x);
  }
  return moves;
}

DynamicsRun finish_greedy(const GameInstance& inst, Assignment x) {
  DynamicsRun run;
  run.init_utility = utility_of(inst, x);
  auto load = unit_loads(inst, x);
  std::vector<Index> ids(inst.n_users());
  for (Index u = 0; u < inst.n_users(); ++u) ids[u] = u;
  std::int64_t utility = run.init_utility;
  run.moves = best_response_round(inst, x, load, ids, utility, &run.trajectory);
  if (run.moves != 0) throw std::logic_error("greedy placement was not an equilibrium");
  run.rounds = 1;
  run.final_utility = utility;
  run.final = std::move(x);
  return run;
}

}  // namespace

std::vector<std::uint8_t> draw_activity(const GameInstance& inst, Rng& rng) {
  std::vector<std::uint8_t> t(inst.n_users(), 1);
  for (Index u = 0; u < inst.n_users(); ++u) {
    const double p = inst.activity(u);
    if (p < 1.0) t[u] = uniform01(rng) < p;
  }
  return t;
}

Assignment init_random(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active) {
  const auto order = random_permutation(inst.n_users(), rng);
  return place_sequentially(inst, order, all_active(inst, std::move(active)),
                            [&](std::span<const Index> av) {
                              std::uniform_int_distribution<std::size_t> pick(0, av.size() - 1);
                              return av[pick(rng)];
                            });
}

Assignment init_worst(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active) {
  const auto order = random_permutation(inst.n_users(), rng);
  return place_sequentially(inst, order, all_active(inst, std::move(active)),
                            [&](std::span<const Index> av) { return pick_worst(inst, av); });
}

Assignment init_best(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active) {
  const auto order = random_permutation(inst.n_users(), rng);
  return place_sequentially(inst, order, all_active(inst, std::move(active)),
                            [&](std::span<const Index> av) { return pick_best(inst, av); });
}

Assignment init_worst_ordered(const GameInstance& inst, std::span<const Index> order,
                              std::vector<std::uint8_t> active) {
  return place_sequentially(inst, order, all_active(inst, std::move(active)),
                            [&](std::span<const Index> av) { return pick_worst(inst, av); });
}

Assignment init_best_ordered(const GameInstance& inst, std::span<const Index> order,
                             std::vector<std::uint8_t> active) {
  return place_sequentially(inst, order, all_active(inst, std::move(active)),
                            [&](std::span<const Index> av) { return pick_best(inst, av); });
}

Assignment init_gamma(const GameInstance& inst, double gamma, Rng& rng,
                      std::vector<std::uint8_t> active) {
  if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
  if (gamma >= kGammaCutoff) return init_best(inst, rng, std::move(active));
  if (gamma <= -kGammaCutoff) return init_worst(inst, rng, std::move(active));
  const auto order = random_permutation(inst.n_users(), rng);
  std::vector<double> weight;
  return place_sequentially(
      inst, order, all_active(inst, std::move(active)), [&](std::span<const Index> av) {
        // scale by the extreme value so every weight is <= 1
        std::int64_t ref = inst.edge(av.front()).value;
        for (Index e : av)
          ref = gamma > 0 ? std::max(ref, inst.edge(e).value) : std::min(ref, inst.edge(e).value);
        if (ref == 0) {
          if (gamma < 0.0) throw std::invalid_argument("negative gamma needs values >= 1");
          std::uniform_int_distribution<std::size_t> pick(0, av.size() - 1);
          return av[pick(rng)];
        }
        weight.resize(av.size());
        double total = 0.0;
        for (std::size_t i = 0; i < av.size(); ++i) {
          weight[i] = std::pow(static_cast<double>(inst.edge(av[i]).value) /
                                   static_cast<double>(ref), gamma);
          total += weight[i];
        }
        double r = uniform01(rng) * total;
        for (std::size_t i = 0; i < av.size(); ++i) {
          r -= weight[i];
          if (r < 0.0) return av[i];
        }
        return av.back();
      });
}

DynamicsRun greedy(const GameInstance& inst, Rng& rng, std::vector<std::uint8_t> active) {
  return finish_greedy(inst, init_best(inst, rng, std::move(active)));
}

DynamicsRun greedy_ordered(const GameInstance& inst, std::span<const Index> order,
                           std::vector<std::uint8_t> active) {
  return finish_greedy(inst, init_best_ordered(inst, order, std::move(active)));
}

DynamicsRun best_response_run(const GameInstance& inst, Assignment x0, Rng& rng) {
  if (!check_feasible(inst, x0).feasible)
    throw InfeasibleAssignment("best response needs a feasible start");
  DynamicsRun run;
  run.init_utility = utility_of(inst, x0);
  auto load = unit_loads(inst, x0);
  std::int64_t utility = run.init_utility;
  while (true) {
    const auto order = random_permutation(inst.n_users(), rng);
    const int moves = best_response_round(inst, x0, load, order, utility, &run.trajectory);
    ++run.rounds;
    run.moves += moves;
    if (moves == 0) break;
  }
  run.final_utility = utility;
  run.final = std::move(x0);
  return run;
}

DynamicsRun best_response_run_ordered(const GameInstance& inst, Assignment x0,
                                      std::span<const Index> order) {
  if (!check_feasible(inst, x0).feasible)
    throw InfeasibleAssignment("best response needs a feasible start");
  DynamicsRun run;
  run.init_utility = utility_of(inst, x0);
  auto load = unit_loads(inst, x0);
  std::int64_t utility = run.init_utility;
  while (true) {
    const int moves = best_response_round(inst, x0, load, order, utility, &run.trajectory);
    ++run.rounds;
    run.moves += moves;
    if (moves == 0) break;
  }
  run.final_utility = utility;
  run.final = std::move(x0);
  return run;
}

std::vector<Assignment> improvement_path(const GameInstance& inst, Assignment x0,
                                         std::span<const Index> order) {
  if (!check_feasible(inst, x0).feasible)
    throw InfeasibleAssignment("best response needs a feasible start");
  std::vector<Assignment> path{x0};
  auto load = unit_loads(inst, x0);
  std::int64_t utility = utility_of(inst, x0);
  while (best_response_round(inst, x0, load, order, utility, nullptr, &path) > 0) {
  }
  return path;
}

RepairResult repair_to_nash(const GameInstance& inst, Assignment x) {
  check_structure(inst, x);
  RepairResult result;
  for (Index u = 0; u < inst.n_users(); ++u)
    if (!x.active[u] && x.choice[u] != kDisconnected) {
      x.choice[u] = kDisconnected;
      ++result.dropped;
    }
  auto load = unit_loads(inst, x);
  for (Index a = 0; a < inst.n_units(); ++a) {
    while (load[a] > inst.capacity(a)) {
      Index victim = -1;
      std::int64_t victim_v = 0;
      for (Index e : inst.unit_edges(a)) {
        const Edge& ed = inst.edge(e);
        if (x.choice[ed.user] != a) continue;
        if (victim < 0 || ed.value < victim_v) {
          victim = ed.user;
          victim_v = ed.value;
        }
      }
      load[a] -= inst.edge(inst.find_edge(victim, a)).weight;
      x.choice[victim] = kDisconnected;
      ++result.dropped;
    }
  }
  std::vector<Index> ids(inst.n_users());
  for (Index u = 0; u < inst.n_users(); ++u) ids[u] = u;
  auto run = best_response_run_ordered(inst, std::move(x), ids);
  result.moves = run.moves;
  result.assignment = std::move(run.final);
  return result;
}

ArrivalsDeparturesRun arrivals_departures(const GameInstance& inst,
                                          const ArrivalsDeparturesOptions& options, Rng& rng) {
  const Index n = inst.n_users();
  const std::int64_t steps = options.steps > 0 ? options.steps : 100 * static_cast<std::int64_t>(n);
  const std::int64_t burn = options.burn_in >= 0 ? options.burn_in : 10 * static_cast<std::int64_t>(n);
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;

  ArrivalsDeparturesRun out;
  Assignment x = Assignment::empty(inst, std::vector<std::uint8_t>(n, 0));
  auto load = unit_loads(inst, x);
  std::int64_t utility = 0;
  std::vector<std::int64_t> active_steps(n, 0);
  out.series.reserve(static_cast<std::size_t>(steps));

  for (std::int64_t step = 0; step < burn + steps; ++step) {
    const auto order = random_permutation(n, rng);
    for (Index u : order) {
      const double p = inst.activity(u);
      if (x.active[u]) {
        if (uniform01(rng) < (1.0 - p) * inv_n) {
          if (x.choice[u] != kDisconnected) {
            const Edge& ed = inst.edge(inst.find_edge(u, x.choice[u]));
            load[ed.unit] -= ed.weight;
            utility -= ed.value;
          }
          x.choice[u] = kDisconnected;
          x.active[u] = 0;
        }
      } else if (uniform01(rng) < p * inv_n) {
        x.active[u] = 1;
        Index best = -1;
        for (Index e : inst.user_edges(u)) {
          const Edge& ed = inst.edge(e);
          if (load[ed.unit] + ed.weight > inst.capacity(ed.unit)) continue;
          if (best < 0 || ed.value > inst.edge(best).value) best = e;
        }
        if (best >= 0) {
          x.choice[u] = inst.edge(best).unit;
          load[inst.edge(best).unit] += inst.edge(best).weight;
          utility += inst.edge(best).value;
        }
      }
    }

    std::vector<std::int64_t> trajectory;
    while (true) {
      const auto br_order = random_permutation(n, rng);
      const int moves = best_response_round(inst, x, load, br_order, utility, &trajectory);
      ++out.run.rounds;
      out.run.moves += moves;
      if (moves == 0) break;
    }
    if (!strictly_increasing(trajectory)) out.trajectories_increasing = false;

    if (step < burn) continue;
    if (options.certify && !is_nash(inst, x)) out.all_nash = false;
    ArrivalsDeparturesStep rec;
    rec.utility = utility;
    std::int64_t total_load = 0;
    for (auto l : load) total_load += l;
    rec.spare_capacity = inst.total_capacity() - total_load;
    for (Index u = 0; u < n; ++u) {
      if (!x.active[u]) continue;
      ++rec.active;
      ++active_steps[u];
      if (x.choice[u] == kDisconnected) ++rec.disconnected;
    }
    out.series.push_back(rec);
  }

  out.activity_fraction.resize(n);
  for (Index u = 0; u < n; ++u)
    out.activity_fraction[u] = static_cast<double>(active_steps[u]) / static_cast<double>(steps);
  out.run.init_utility = out.series.empty() ? 0 : out.series.front().utility;
  out.run.final_utility = utility;
  out.run.final = std::move(x);
  return out;
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "greedy" || name == "g") return Algorithm::Greedy;
  if (name == "br") return Algorithm::BestResponse;
  if (name == "brb") return Algorithm::BestResponseBad;
  if (name == "gbr") return Algorithm::GammaBestResponse;
  if (name == "ad") return Algorithm::ArrivalsDepartures;
  throw std::invalid_argument("unknown dynamics '" + name + "'");
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Greedy: return "greedy";
    case Algorithm::BestResponse: return "br";
    case Algorithm::BestResponseBad: return "brb";
    case Algorithm::GammaBestResponse: return "gbr";
    case Algorithm::ArrivalsDepartures: return "ad";
  }
  return "?";
}

DynamicsRun run_dynamics(const GameInstance& inst, Algorithm algo, double gamma, Rng& rng) {
  auto t = draw_activity(inst, rng);
  switch (algo) {
    case Algorithm::Greedy:
      return greedy(inst, rng, std::move(t));
    case Algorithm::BestResponse:
      return best_response_run(inst, init_random(inst, rng, std::move(t)), rng);
    case Algorithm::BestResponseBad:
      return best_response_run(inst, init_worst(inst, rng, std::move(t)), rng);
    case Algorithm::GammaBestResponse:
      return best_response_run(inst, init_gamma(inst, gamma, rng, std::move(t)), rng);
    case Algorithm::ArrivalsDepartures:
      break;
  }
  throw std::invalid_argument("run_dynamics does not handle arrivals/departures");
}

bool strictly_increasing(std::span<const std::int64_t> trajectory) {
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    if (trajectory[i] <= trajectory[i - 1]) return false;
  return true;
}

}  // namespace spg
