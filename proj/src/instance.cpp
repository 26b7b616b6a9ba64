#include "spg/instance.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace spg {

GameInstance::GameInstance(Index n_users, Index n_units, std::vector<Edge> edges,
                           std::vector<std::int64_t> capacities,
                           std::vector<double> activity)
    : n_users_(n_users),
      n_units_(n_units),
      edges_(std::move(edges)),
      capacities_(std::move(capacities)),
      activity_(std::move(activity)) {
  if (n_users_ < 0 || n_units_ < 0) throw std::invalid_argument("negative node count");
  if (capacities_.size() != static_cast<std::size_t>(n_units_))
    throw std::invalid_argument("capacities must have one entry per unit");
  if (activity_.empty()) activity_.assign(n_users_, 1.0);
  if (activity_.size() != static_cast<std::size_t>(n_users_))
    throw std::invalid_argument("activity must have one entry per user");
  for (Index a = 0; a < n_units_; ++a)
    if (capacities_[a] < 1)
      throw std::invalid_argument("capacity of unit " + std::to_string(a) + " must be >= 1");
  for (double p : activity_)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("activity probability outside [0,1]");

  std::set<std::pair<Index, Index>> seen;
  for (const Edge& e : edges_) {
    if (e.user < 0 || e.user >= n_users_ || e.unit < 0 || e.unit >= n_units_)
      throw std::invalid_argument("edge references an unknown user or unit");
    if (e.weight < 1) throw std::invalid_argument("edge weight must be >= 1");
    if (e.value < 0) throw std::invalid_argument("edge value must be >= 0");
    if (!seen.emplace(e.user, e.unit).second)
      throw std::invalid_argument("duplicate edge (" + std::to_string(e.user) + "," +
                                  std::to_string(e.unit) + ")");
  }

  // CSR adjacency in both directions.
  std::vector<Index> order(edges_.size());
  std::iota(order.begin(), order.end(), 0);

  user_off_.assign(n_users_ + 1, 0);
  for (const Edge& e : edges_) ++user_off_[e.user + 1];
  std::partial_sum(user_off_.begin(), user_off_.end(), user_off_.begin());
  std::sort(order.begin(), order.end(), [&](Index x, Index y) {
    return std::pair(edges_[x].user, edges_[x].unit) < std::pair(edges_[y].user, edges_[y].unit);
  });
  user_adj_ = order;

  unit_off_.assign(n_units_ + 1, 0);
  for (const Edge& e : edges_) ++unit_off_[e.unit + 1];
  std::partial_sum(unit_off_.begin(), unit_off_.end(), unit_off_.begin());
  std::sort(order.begin(), order.end(), [&](Index x, Index y) {
    return std::pair(edges_[x].unit, edges_[x].user) < std::pair(edges_[y].unit, edges_[y].user);
  });
  unit_adj_ = order;
}

Index GameInstance::find_edge(Index u, Index a) const {
  for (Index e : user_edges(u))
    if (edges_[e].unit == a) return e;
  return -1;
}

std::int64_t GameInstance::total_capacity() const {
  return std::accumulate(capacities_.begin(), capacities_.end(), std::int64_t{0});
}

bool GameInstance::deterministic() const {
  return std::all_of(activity_.begin(), activity_.end(), [](double p) { return p == 1.0; });
}

GameInstance GameInstance::with_activity(std::vector<double> activity) const {
  return GameInstance(n_users_, n_units_, edges_, capacities_, std::move(activity));
}

}  // namespace spg
