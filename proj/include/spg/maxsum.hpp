#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spg/factor_kernels.hpp"
#include "spg/model.hpp"

namespace spg {

enum class Sense { Maximize, Minimize };

Sense parse_sense(const std::string& name);

/// Max-marginal messages (max entry 0) and reinforcement fields per edge.
struct MaxSumMessages {
  std::vector<Triple> to_user;
  std::vector<Triple> to_unit;
  std::vector<Triple> field;
  Sense sense = Sense::Maximize;
};

struct MaxSumOptions {
  double rho = 1e-3;          // reinforcement rate; field += rho * t * belief
  int max_iterations = 1000;
  int restarts = 10;
  int stable_iterations = 10; // decoded equilibrium unchanged this long => done
  double noise = 1e-3;        // scale of the random initial fields
  std::uint64_t seed = 1;
};

struct MaxSumResult {
  Assignment assignment;
  std::int64_t utility = 0;   // certified: observables(assignment).total_utility
  bool converged = false;
  bool repaired = false;      // decoding was not an equilibrium and needed repair
  int repair_moves = 0;
  int iterations = 0;         // of the run that produced `assignment`
  int attempts = 0;           // runs performed (1 + restarts used)
  bool failed = false;        // no run converged; `assignment` is the best found
};

/// Reinforced max-sum on the equilibrium constraints with per-edge score
/// +v (maximize) or -v (minimize). The result always passes is_nash.
MaxSumResult run_maxsum(const GameInstance& inst, Sense sense, const MaxSumOptions& options = {});

/// Per-user decoding of the current messages (ties: lowest unit id, units
/// before Disconnected).
Assignment decode_maxsum(const GameInstance& inst, const MaxSumMessages& messages);

}  // namespace spg
