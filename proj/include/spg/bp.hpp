#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spg/factor_kernels.hpp"
#include "spg/model.hpp"
#include "spg/rng.hpp"

namespace spg {

/// Directed messages on every edge: unit->user P_au and user->unit P^_ua,
/// each a normalized distribution over {U, A, S}.
struct MessageSet {
  std::vector<Triple> to_user;  // P_au, indexed by edge id
  std::vector<Triple> to_unit;  // P^_ua, indexed by edge id
  double mu = 0.0;

  static MessageSet uniform(const GameInstance& inst, double mu = 0.0);
};

struct BpOptions {
  double damping = 0.0;       // new = (1 - damping) * update + damping * old
  double tolerance = 1e-10;   // on the max absolute message change per sweep
  int max_iterations = 2000;
  std::uint64_t seed = 1;     // sweep-order randomness
};

struct BpReport {
  bool converged = false;
  int iterations = 0;
  double max_change = 0.0;
};

/// A factor forbids every state of one of its outgoing messages.
class BpContradiction : public std::runtime_error {
 public:
  BpContradiction(const std::string& what, Index edge, Index user)
      : std::runtime_error(what), edge(edge), user(user) {}
  Index edge;  // -1 for a mirror (activity) contradiction
  Index user;
};

/// Sentinel for an unclamped user.
inline constexpr Index kFree = -2;

struct UserMarginal {
  double inactive = 0.0;
  double disconnected = 0.0;    // active and unserved
  std::vector<double> served;   // aligned with inst.user_edges(u)
};

struct Marginals {
  std::vector<Triple> edge;         // per edge belief over {U, A, S}
  std::vector<UserMarginal> user;
  /// P[y_ua = S]
  double serving(std::size_t e) const { return edge[e][kS]; }
};

/// One Bethe evaluation at a BP fixed point.
struct LandscapePoint {
  double mu = 0.0;
  double utility = 0.0;
  double disconnected = 0.0;
  double spare_capacity = 0.0;
  double entropy = 0.0;
  double free_entropy = 0.0;  // mu * utility + entropy
  double log_z = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string branch;
};

/// Asynchronous sum-product BP on the user/unit factor graph with the
/// utility bias exp(mu U). The same solver runs the deterministic game, a
/// fixed activity vector, clamped users (decimation) and the mirror-message
/// system for stochastic activity.
class BpSolver {
 public:
  BpSolver(const GameInstance& inst, double mu, BpOptions options = {});

  const GameInstance& instance() const { return *inst_; }
  double mu() const { return messages_.mu; }
  void set_mu(double mu);
  const BpOptions& options() const { return options_; }
  void set_options(BpOptions options) { options_ = options; }

  const MessageSet& messages() const { return messages_; }
  void set_messages(MessageSet messages);

  /// Fixed activity t: inactive users keep every edge out of service.
  void set_activity(const std::vector<std::uint8_t>& active);
  /// Activity weights Q_u(t) follow the mirror update towards p_u.
  void enable_mirror(bool on);
  bool mirror() const { return mirror_; }
  /// Current (Q_u(0), Q_u(1)).
  const std::vector<std::array<double, 2>>& activity_weights() const { return q_; }
  void set_activity_weights(std::vector<std::array<double, 2>> q);
  /// Normalized cavity field (Q^_u(0), Q^_u(1)) sent by the rest of the graph.
  std::array<double, 2> activity_cavity(Index u) const;

  /// Restrict u to a single action (a unit id or kDisconnected); kFree lifts it.
  void clamp(Index u, Index choice);
  Index clamped(Index u) const { return clamp_[u]; }

  /// Sweeps until the max change drops below tolerance or max_iterations.
  /// Throws BpContradiction.
  BpReport run();
  /// One asynchronous sweep in random order; returns the max change.
  double sweep();

  Marginals marginals() const;
  LandscapePoint thermodynamics() const;
  /// Belief that user u is active, Q_u(1) Q^_u(1) / sum_t Q_u(t) Q^_u(t).
  double activity_belief(Index u) const;

 private:
  UserFactorInput user_input(Index u, std::vector<UserNeighbor>& buf) const;
  double update_user(Index u);
  double update_unit(Index a);
  UserFactorSummary user_summary(Index u) const;

  const GameInstance* inst_;
  BpOptions options_;
  MessageSet messages_;
  std::vector<std::array<double, 2>> q_;
  std::vector<Index> clamp_;
  bool mirror_ = false;
  Rng rng_;
  int sweeps_done_ = 0;
};

struct BpResult {
  MessageSet messages;
  BpReport report;
};

/// Deterministic BP. Throws BpContradiction.
BpResult run_bp(const GameInstance& inst, double mu, const BpOptions& options = {},
                const MessageSet* warm_start = nullptr);

Marginals marginals(const GameInstance& inst, const MessageSet& messages);
LandscapePoint bethe_thermodynamics(const GameInstance& inst, const MessageSet& messages);

struct SweepPoint {
  LandscapePoint point;
  bool physical = true;
};

struct TransitionReport {
  bool two_branches = false;
  std::optional<double> mu_star;        // crossing of the two branches' free entropy
  std::optional<double> jump_up;        // mu where the upward sweep jumps
  std::optional<double> jump_down;      // mu where the downward sweep jumps
  double gap_low = 0.0;                 // utility gap between branch supports
  double gap_high = 0.0;
};

struct MuSweepResult {
  std::vector<SweepPoint> up;    // increasing mu, warm-started
  std::vector<SweepPoint> down;  // decreasing mu, warm-started
  TransitionReport transition;
};

enum class SweepDirection { Up, Down, Both };

/// Warm-started BP along a monotone mu grid. Points after the first
/// unphysical one (S < -1e-6 or U > U+ + 1e-6) are dropped from the branch.
MuSweepResult mu_sweep(const GameInstance& inst, std::vector<double> grid,
                       SweepDirection direction = SweepDirection::Both,
                       const BpOptions& options = {});

/// Locates the branch crossing and jump points of an up/down sweep pair.
/// Jumps are consecutive-point utility changes larger than `jump_fraction`
/// of U+.
TransitionReport analyze_transition(const std::vector<SweepPoint>& up,
                                    const std::vector<SweepPoint>& down, double upper_bound,
                                    double jump_fraction = 0.05);

struct DecimationOptions {
  BpOptions bp;
  int max_retries = 10;
};

struct DecimationResult {
  Assignment assignment;
  bool repaired = false;       // a best-response repair pass was needed
  int repair_moves = 0;
  int retries = 0;             // contradictions recovered by the next candidate
  bool failed = false;
  std::string failure;
};

/// BP-guided decimation: repeatedly fix the most polarized free user to her
/// most likely action.
DecimationResult decimate(const GameInstance& inst, double mu, const DecimationOptions& options = {});

}  // namespace spg
