#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spg/instance.hpp"

namespace spg {

/// Action profile: the unit serving each user (or kDisconnected), plus the
/// activity flag t_u used by stochastic play.
struct Assignment {
  std::vector<Index> choice;
  std::vector<std::uint8_t> active;

  /// Everyone active and disconnected.
  static Assignment empty(const GameInstance& inst);
  /// Disconnected everywhere with the given activity vector.
  static Assignment empty(const GameInstance& inst, std::vector<std::uint8_t> active);

  std::size_t size() const { return choice.size(); }
  bool operator==(const Assignment&) const = default;
};

enum class EdgeState : std::uint8_t { Unavailable = 0, Available = 1, Serving = 2 };

char to_char(EdgeState s);

/// Per-edge label y_ua, indexed by edge id.
using EdgeStateConfig = std::vector<EdgeState>;

/// Raised for an assignment that does not fit the instance (wrong length,
/// choice outside the user's neighbourhood). Distinct from infeasibility.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation requires a feasible assignment.
class InfeasibleAssignment : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  enum class Kind { Capacity, InactiveServed } kind;
  Index index;              // unit for Capacity, user for InactiveServed
  std::int64_t load = 0;
  std::int64_t capacity = 0;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
};

struct ObservableReport {
  std::int64_t total_utility = 0;
  std::int64_t disconnected = 0;
  std::int64_t spare_capacity = 0;
  std::int64_t total_load = 0;
  std::vector<std::int64_t> per_unit_load;
};

/// Throws StructuralError when x does not fit inst.
void check_structure(const GameInstance& inst, const Assignment& x);

FeasibilityReport check_feasible(const GameInstance& inst, const Assignment& x);

std::vector<std::int64_t> unit_loads(const GameInstance& inst, const Assignment& x);

/// Deterministic x -> y lift. Throws InfeasibleAssignment for infeasible x.
EdgeStateConfig lift_to_edge_states(const GameInstance& inst, const Assignment& x);

/// Inverse of the lift: reads the served unit of every user off y.
/// Throws StructuralError if some user has more than one Serving edge.
Assignment project_to_assignment(const GameInstance& inst, const EdgeStateConfig& y,
                                 std::span<const std::uint8_t> active = {});

/// All four constraint families: matching (<= t_u), capacity, availability
/// and best-available. `active` empty means everyone active.
bool check_valid(const GameInstance& inst, const EdgeStateConfig& y,
                 std::span<const std::uint8_t> active = {});

bool is_nash(const GameInstance& inst, const Assignment& x);

ObservableReport observables(const GameInstance& inst, const Assignment& x);

/// Value currently enjoyed by u, nullopt when disconnected.
std::optional<std::int64_t> current_value(const GameInstance& inst, const Assignment& x, Index u);

/// Best available unit for u (capacity computed without u's own load) when
/// it strictly improves u's value; nullopt means no improving move. Value
/// ties go to the lowest unit id. Disconnection never improves, so the
/// result is always a unit.
std::optional<Index> best_response_of(const GameInstance& inst, const Assignment& x, Index u,
                                      std::span<const std::int64_t> loads);
std::optional<Index> best_response_of(const GameInstance& inst, const Assignment& x, Index u);

/// Upper bound on total utility: sum over users of their best edge value,
/// weighted by the activity probability when `weighted`.
double utility_upper_bound(const GameInstance& inst, bool weighted = false);

}  // namespace spg
