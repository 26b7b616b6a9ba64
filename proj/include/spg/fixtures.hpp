#pragma once

#include "spg/instance.hpp"

namespace spg::fixtures {

/// Three users, two units (a = 0, b = 1):
/// w = {1a:3, 1b:1, 2a:1, 2b:2, 3a:1, 3b:2}, v = {1a:2, 1b:1, 2a:3, 2b:0, 3a:0, 3b:1},
/// C = (3, 4). Users 1..3 are ids 0..2.
inline GameInstance example() {
  return GameInstance(3, 2,
                      {{0, 0, 3, 2}, {0, 1, 1, 1}, {1, 0, 1, 3}, {1, 1, 2, 0}, {2, 0, 1, 0}, {2, 1, 2, 1}},
                      {3, 4});
}

/// One unit of capacity 1 shared by two unit-weight users with values 7 and 4.
inline GameInstance star(double p1 = 1.0, double p2 = 1.0) {
  return GameInstance(2, 1, {{0, 0, 1, 7}, {1, 0, 1, 4}}, {1}, {p1, p2});
}

}  // namespace spg::fixtures
