#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spg {

using Index = std::int32_t;

/// Sentinel used in Assignment::choice for a user served by no unit.
inline constexpr Index kDisconnected = -1;

struct Edge {
  Index user = 0;
  Index unit = 0;
  std::int64_t weight = 1;  // load placed on the unit
  std::int64_t value = 1;   // utility the user draws from the unit (>= 0)
};

/// Bipartite user/unit graph with per-edge load and value, per-unit capacity
/// and per-user activity probability. Immutable once built.
class GameInstance {
 public:
  GameInstance() = default;

  /// Throws std::invalid_argument on dangling or duplicate edges, weights or
  /// capacities below 1, or negative values. `activity` may be empty (all 1).
  GameInstance(Index n_users, Index n_units, std::vector<Edge> edges,
               std::vector<std::int64_t> capacities,
               std::vector<double> activity = {});

  Index n_users() const { return n_users_; }
  Index n_units() const { return n_units_; }
  std::size_t n_edges() const { return edges_.size(); }

  const Edge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  std::int64_t capacity(Index a) const { return capacities_[a]; }
  std::span<const std::int64_t> capacities() const { return capacities_; }
  double activity(Index u) const { return activity_[u]; }
  std::span<const double> activities() const { return activity_; }

  /// Edge ids incident on user u, in unit-id order.
  std::span<const Index> user_edges(Index u) const {
    return {user_adj_.data() + user_off_[u], user_adj_.data() + user_off_[u + 1]};
  }
  /// Edge ids incident on unit a, in user-id order.
  std::span<const Index> unit_edges(Index a) const {
    return {unit_adj_.data() + unit_off_[a], unit_adj_.data() + unit_off_[a + 1]};
  }

  /// Edge id for (u, a), or -1 when a is not adjacent to u.
  Index find_edge(Index u, Index a) const;

  std::int64_t total_capacity() const;
  bool deterministic() const;

  /// Same graph with every activity probability replaced.
  GameInstance with_activity(std::vector<double> activity) const;

 private:
  Index n_users_ = 0;
  Index n_units_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::int64_t> capacities_;
  std::vector<double> activity_;
  std::vector<Index> user_off_{0};
  std::vector<Index> user_adj_;
  std::vector<Index> unit_off_{0};
  std::vector<Index> unit_adj_;
};

}  // namespace spg
