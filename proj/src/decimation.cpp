#include <algorithm>

#include "spg/bp.hpp"
#include "spg/dynamics.hpp"

namespace spg {

namespace {

struct Candidate {
  Index user;
  Index action;  // unit id or kDisconnected
  double polarization;
};

// Most likely action of u; Disconnected loses ties to any unit.
Candidate most_likely(const GameInstance& inst, const UserMarginal& m, Index u) {
  Candidate c{u, kDisconnected, m.disconnected};
  const auto edges = inst.user_edges(u);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const bool better = c.action == kDisconnected ? m.served[i] >= c.polarization
                                                  : m.served[i] > c.polarization;
    if (better) {
      c.action = inst.edge(edges[i]).unit;
      c.polarization = m.served[i];
    }
  }
  return c;
}

}  // namespace

DecimationResult decimate(const GameInstance& inst, double mu, const DecimationOptions& options) {
  DecimationResult result;
  result.assignment = Assignment::empty(inst);
  BpSolver solver(inst, mu, options.bp);
  try {
    solver.run();
  } catch (const BpContradiction& e) {
    result.failed = true;
    result.failure = e.what();
    return result;
  }

  std::vector<std::uint8_t> fixed(inst.n_users(), 0);
  for (Index left = inst.n_users(); left > 0; --left) {
    const Marginals m = solver.marginals();
    std::vector<Candidate> cands;
    for (Index u = 0; u < inst.n_users(); ++u)
      if (!fixed[u]) cands.push_back(most_likely(inst, m.user[u], u));
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.polarization > b.polarization;
    });

    bool placed = false;
    for (const Candidate& c : cands) {
      const MessageSet saved = solver.messages();
      solver.clamp(c.user, c.action);
      try {
        solver.run();
      } catch (const BpContradiction&) {
        solver.clamp(c.user, kFree);
        solver.set_messages(saved);
        if (++result.retries > options.max_retries) break;
        continue;
      }
      fixed[c.user] = 1;
      result.assignment.choice[c.user] = c.action;
      placed = true;
      break;
    }
    if (!placed) {
      result.failed = true;
      result.failure = "contradiction retries exhausted";
      break;
    }
  }
  if (result.failed) {
    for (Index u = 0; u < inst.n_users(); ++u)
      if (!fixed[u]) result.assignment.choice[u] = kDisconnected;
  }

  if (!is_nash(inst, result.assignment)) {
    auto repair = repair_to_nash(inst, result.assignment);
    result.repaired = true;
    result.repair_moves = repair.moves + repair.dropped;
    result.assignment = std::move(repair.assignment);
  }
  return result;
}

}  // namespace spg
