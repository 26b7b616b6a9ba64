#include "spg/model.hpp"

#include <algorithm>

namespace spg {

Assignment Assignment::empty(const GameInstance& inst) {
  return Assignment{std::vector<Index>(inst.n_users(), kDisconnected),
                    std::vector<std::uint8_t>(inst.n_users(), 1)};
}

Assignment Assignment::empty(const GameInstance& inst, std::vector<std::uint8_t> active) {
  if (active.size() != static_cast<std::size_t>(inst.n_users()))
    throw StructuralError("activity vector length mismatch");
  return Assignment{std::vector<Index>(inst.n_users(), kDisconnected), std::move(active)};
}

char to_char(EdgeState s) {
  switch (s) {
    case EdgeState::Unavailable: return 'U';
    case EdgeState::Available: return 'A';
    case EdgeState::Serving: return 'S';
  }
  return '?';
}

void check_structure(const GameInstance& inst, const Assignment& x) {
  const auto n = static_cast<std::size_t>(inst.n_users());
  if (x.choice.size() != n || x.active.size() != n)
    throw StructuralError("assignment length does not match the number of users");
  for (Index u = 0; u < inst.n_users(); ++u) {
    const Index a = x.choice[u];
    if (a == kDisconnected) continue;
    if (inst.find_edge(u, a) < 0)
      throw StructuralError("user " + std::to_string(u) + " assigned to non-adjacent unit " +
                            std::to_string(a));
  }
}

std::vector<std::int64_t> unit_loads(const GameInstance& inst, const Assignment& x) {
  std::vector<std::int64_t> load(inst.n_units(), 0);
  for (Index u = 0; u < inst.n_users(); ++u) {
    const Index a = x.choice[u];
    if (a == kDisconnected) continue;
    load[a] += inst.edge(inst.find_edge(u, a)).weight;
  }
  return load;
}

FeasibilityReport check_feasible(const GameInstance& inst, const Assignment& x) {
  check_structure(inst, x);
  FeasibilityReport report;
  for (Index u = 0; u < inst.n_users(); ++u)
    if (!x.active[u] && x.choice[u] != kDisconnected)
      report.violations.push_back({Violation::Kind::InactiveServed, u, 0, 0});
  const auto load = unit_loads(inst, x);
  for (Index a = 0; a < inst.n_units(); ++a)
    if (load[a] > inst.capacity(a))
      report.violations.push_back({Violation::Kind::Capacity, a, load[a], inst.capacity(a)});
  report.feasible = report.violations.empty();
  return report;
}

EdgeStateConfig lift_to_edge_states(const GameInstance& inst, const Assignment& x) {
  if (!check_feasible(inst, x).feasible)
    throw InfeasibleAssignment("cannot lift an infeasible assignment");
  const auto load = unit_loads(inst, x);
  EdgeStateConfig y(inst.n_edges());
  for (std::size_t e = 0; e < inst.n_edges(); ++e) {
    const Edge& ed = inst.edge(e);
    if (x.choice[ed.user] == ed.unit)
      y[e] = EdgeState::Serving;
    else if (ed.weight + load[ed.unit] <= inst.capacity(ed.unit))
      y[e] = EdgeState::Available;
    else
      y[e] = EdgeState::Unavailable;
  }
  return y;
}

Assignment project_to_assignment(const GameInstance& inst, const EdgeStateConfig& y,
                                 std::span<const std::uint8_t> active) {
  Assignment x = Assignment::empty(inst);
  if (!active.empty()) x.active.assign(active.begin(), active.end());
  for (std::size_t e = 0; e < inst.n_edges(); ++e) {
    if (y[e] != EdgeState::Serving) continue;
    const Edge& ed = inst.edge(e);
    if (x.choice[ed.user] != kDisconnected)
      throw StructuralError("user " + std::to_string(ed.user) + " serves two units");
    x.choice[ed.user] = ed.unit;
  }
  return x;
}

bool check_valid(const GameInstance& inst, const EdgeStateConfig& y,
                 std::span<const std::uint8_t> active) {
  if (y.size() != inst.n_edges()) return false;

  // (i) at most t_u served edges per user
  for (Index u = 0; u < inst.n_users(); ++u) {
    int served = 0;
    for (Index e : inst.user_edges(u)) served += y[e] == EdgeState::Serving;
    const int allowed = active.empty() ? 1 : static_cast<int>(active[u] != 0);
    if (served > allowed) return false;
  }

  // (ii) capacity
  std::vector<std::int64_t> load(inst.n_units(), 0);
  for (std::size_t e = 0; e < inst.n_edges(); ++e)
    if (y[e] == EdgeState::Serving) load[inst.edge(e).unit] += inst.edge(e).weight;
  for (Index a = 0; a < inst.n_units(); ++a)
    if (load[a] > inst.capacity(a)) return false;

  for (std::size_t e = 0; e < inst.n_edges(); ++e) {
    const Edge& ed = inst.edge(e);
    if (y[e] == EdgeState::Serving) continue;
    // (iii) availability: load of the others equals the unit load here
    const bool fits = ed.weight + load[ed.unit] <= inst.capacity(ed.unit);
    if ((y[e] == EdgeState::Available) != fits) return false;
    // (iv) an available edge needs a served edge of at least the same value;
    // inactive users play no part in the game
    const bool user_active = active.empty() || active[ed.user] != 0;
    if (user_active && y[e] == EdgeState::Available) {
      bool covered = false;
      for (Index f : inst.user_edges(ed.user))
        if (y[f] == EdgeState::Serving && inst.edge(f).value >= ed.value) covered = true;
      if (!covered) return false;
    }
  }
  return true;
}

std::optional<std::int64_t> current_value(const GameInstance& inst, const Assignment& x,
                                          Index u) {
  if (x.choice[u] == kDisconnected) return std::nullopt;
  return inst.edge(inst.find_edge(u, x.choice[u])).value;
}

std::optional<Index> best_response_of(const GameInstance& inst, const Assignment& x, Index u,
                                      std::span<const std::int64_t> loads) {
  if (!x.active[u]) return std::nullopt;
  const Index current = x.choice[u];
  std::int64_t own_load = 0;
  std::optional<std::int64_t> current_v;
  if (current != kDisconnected) {
    const Edge& ce = inst.edge(inst.find_edge(u, current));
    own_load = ce.weight;
    current_v = ce.value;
  }
  Index best = kDisconnected;
  std::int64_t best_v = 0;
  for (Index e : inst.user_edges(u)) {  // unit-id order: first max wins ties
    const Edge& ed = inst.edge(e);
    const std::int64_t others = loads[ed.unit] - (ed.unit == current ? own_load : 0);
    if (ed.weight + others > inst.capacity(ed.unit)) continue;
    if (best == kDisconnected || ed.value > best_v) {
      best = ed.unit;
      best_v = ed.value;
    }
  }
  if (best == kDisconnected || best == current) return std::nullopt;
  if (current_v && best_v <= *current_v) return std::nullopt;
  return best;
}

std::optional<Index> best_response_of(const GameInstance& inst, const Assignment& x, Index u) {
  const auto loads = unit_loads(inst, x);
  return best_response_of(inst, x, u, loads);
}

bool is_nash(const GameInstance& inst, const Assignment& x) {
  if (!check_feasible(inst, x).feasible) return false;
  const auto loads = unit_loads(inst, x);
  for (Index u = 0; u < inst.n_users(); ++u)
    if (best_response_of(inst, x, u, loads)) return false;
  return true;
}

ObservableReport observables(const GameInstance& inst, const Assignment& x) {
  if (!check_feasible(inst, x).feasible)
    throw InfeasibleAssignment("observables require a feasible assignment");
  ObservableReport r;
  r.per_unit_load = unit_loads(inst, x);
  for (Index u = 0; u < inst.n_users(); ++u) {
    if (!x.active[u]) continue;
    if (auto v = current_value(inst, x, u))
      r.total_utility += *v;
    else
      ++r.disconnected;
  }
  for (auto l : r.per_unit_load) r.total_load += l;
  r.spare_capacity = inst.total_capacity() - r.total_load;
  return r;
}

double utility_upper_bound(const GameInstance& inst, bool weighted) {
  double total = 0.0;
  for (Index u = 0; u < inst.n_users(); ++u) {
    std::int64_t best = 0;
    for (Index e : inst.user_edges(u)) best = std::max(best, inst.edge(e).value);
    total += (weighted ? inst.activity(u) : 1.0) * static_cast<double>(best);
  }
  return total;
}

}  // namespace spg
