#pragma once

// Local factor computations shared by sum-product BP and max-sum.
//
// Every edge variable y_ua in {U, A, S} touches exactly two factors: the
// user factor (matching + best-available constraints, plus the utility bias)
// and the unit factor (capacity + availability constraints). The kernels
// below compute all outgoing messages of one factor from its incoming ones,
// generic over the (add, mul) semiring so that the max-sum updates are the
// literal (max, +) image of the BP updates.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace spg {

using Triple = std::array<double, 3>;  // indexed by EdgeState (U, A, S)

inline constexpr int kU = 0;
inline constexpr int kA = 1;
inline constexpr int kS = 2;

struct SumProduct {
  static constexpr double zero() { return 0.0; }
  static constexpr double one() { return 1.0; }
  static double add(double a, double b) { return a + b; }
  static double mul(double a, double b) { return a * b; }
  static double div(double a, double b) { return a / b; }
  /// Semiring image of exp(x).
  static double from_log(double x) { return std::exp(x); }
  static double to_log(double x) { return std::log(x); }
};

struct MaxPlus {
  static constexpr double zero() { return -std::numeric_limits<double>::infinity(); }
  static constexpr double one() { return 0.0; }
  static double add(double a, double b) { return a > b ? a : b; }
  static double mul(double a, double b) { return a + b; }
  static double div(double a, double b) { return a - b; }
  static double from_log(double x) { return x; }
  static double to_log(double x) { return x; }
};

/// Normalizes in place (sum to 1, or max to 0). Returns false when every
/// entry is the semiring zero, i.e. the factor forbids all three states.
template <class R>
bool normalize(Triple& t);

struct UserNeighbor {
  Triple in;                  // message from the unit side (plus any field)
  std::int64_t value = 1;
  bool may_serve = true;      // clamping: may this edge be the served one
};

struct UserFactorInput {
  std::span<const UserNeighbor> neighbors;
  double bias = 0.0;          // mu: each served edge carries exp(mu * v)
  double weight_inactive;     // Q_u(0) in semiring units
  double weight_active;       // Q_u(1) in semiring units
  bool may_disconnect = true; // clamping: may an active user stay unserved
};

/// Unnormalized quantities over the full neighbourhood, used by marginals,
/// the Bethe free energy and the mirror update.
struct UserFactorSummary {
  double inactive = 0.0;              // Qhat(0): prod (U + A)
  double disconnected = 0.0;          // active, no edge served: prod U
  std::vector<double> served;         // active, served by neighbour b
  double active = 0.0;                // Qhat(1): disconnected (+) sum of served
  double total = 0.0;                 // Q0 Qhat(0) (+) Q1 Qhat(1)
};

/// Outgoing user->unit messages for all neighbours (unnormalized) plus the
/// full-neighbourhood summary.
template <class R>
void user_factor(const UserFactorInput& input, std::span<Triple> out, UserFactorSummary& summary);

struct UnitNeighbor {
  Triple in;                  // message from the user side (plus any field)
  std::int64_t weight = 1;
};

/// Outgoing unit->user messages (unnormalized) for a unit of capacity
/// `capacity`. Returns the log of the factor normalizer sum_{T} P_{all}(T, T)
/// (the normalizer itself under MaxPlus). Outgoing triples are rescaled so their
/// largest entry is one.
template <class R>
double unit_factor(std::span<const UnitNeighbor> neighbors, std::int64_t capacity,
                   std::span<Triple> out);

}  // namespace spg
