#pragma once

#include <cstdint>
#include <string>

#include "spg/correlation.hpp"
#include "spg/instance.hpp"

namespace spg {

struct EnsembleParams {
  Index n_users = 100;     // N
  Index n_units = 10;      // M
  std::int64_t capacity = 120;
  double q = 0.2;          // edge probability
  IntRange w{6, 15};
  IntRange v{1, 10};
  double c = 0.0;          // Pearson correlation of (w, v) on each edge
  bool stochastic = false; // draw p_u uniformly in (0, 1)
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Instance number `index` of the ensemble; reproducible from (seed, index).
GameInstance sample_instance(const EnsembleParams& params, std::uint64_t index = 0);

struct CapacityBounds {
  double lower = 0.0;  // sum_u min_a w_ua
  double upper = 0.0;  // sum_u max_a w_ua
};

/// Users without edges contribute 0; `weighted` multiplies each user by p_u.
CapacityBounds capacity_bounds(const GameInstance& inst, bool weighted = false);

/// Exact fraction with a positive denominator, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  bool operator==(const Rational&) const = default;
  auto operator<=>(const Rational& o) const {
    return static_cast<__int128>(num) * o.den <=> static_cast<__int128>(o.num) * den;
  }
};

Rational operator+(Rational a, Rational b);
Rational operator-(Rational a, Rational b);
Rational operator*(Rational a, Rational b);
Rational operator/(Rational a, Rational b);

struct MeanFieldPoint {
  Rational utility;
  Rational disconnected;  // D
  Rational mean_value;    // v-bar over served users
};

struct MeanFieldBounds {
  MeanFieldPoint min;
  MeanFieldPoint max;
};

/// Mean-field utility range for c = 1 ensembles (w = v + delta on every
/// edge): U = (N - D) v-bar with load (N - D)(v-bar + delta). The maximum is
/// taken under L <= M C; the minimum additionally requires the mean spare
/// capacity C - L/M not to exceed the mean weight. D and v-bar range over
/// the reals with v-bar in [v_min, v_max].
MeanFieldBounds mean_field_bounds(const EnsembleParams& params);

}  // namespace spg
