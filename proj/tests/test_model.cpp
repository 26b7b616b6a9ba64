#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spg/model.hpp"
#include "support.hpp"

using namespace spg;
using testing::reduced;

namespace {

EdgeState at(const GameInstance& inst, const EdgeStateConfig& y, Index u, Index a) {
  return y[inst.find_edge(u, a)];
}

constexpr Index kA_ = 0, kB_ = 1;

}  // namespace

TEST_CASE("instance construction rejects malformed input") {
  CHECK_THROWS_AS(GameInstance(1, 1, {{0, 1, 1, 1}}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(GameInstance(1, 1, {{0, 0, 1, 1}, {0, 0, 2, 2}}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(GameInstance(1, 1, {{0, 0, 0, 1}}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(GameInstance(1, 1, {{0, 0, 1, -1}}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(GameInstance(1, 1, {{0, 0, 1, 1}}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(GameInstance(1, 1, {{0, 0, 1, 1}}, {1}, {1.5}), std::invalid_argument);
}

TEST_CASE("check_feasible on the example") {
  const auto inst = fixtures::example();
  CHECK(check_feasible(inst, reduced(inst, {1, 0, 0})).feasible);

  const auto bad = check_feasible(inst, reduced(inst, {1, 1, 0}));
  REQUIRE_FALSE(bad.feasible);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].kind == Violation::Kind::Capacity);
  CHECK(bad.violations[0].index == kA_);
  CHECK(bad.violations[0].load == 4);
  CHECK(bad.violations[0].capacity == 3);

  CHECK(check_feasible(inst, Assignment::empty(inst)).feasible);
}

TEST_CASE("structural errors are distinct from infeasibility") {
  const auto inst = fixtures::star();
  Assignment x = Assignment::empty(inst);
  x.choice[0] = 3;
  CHECK_THROWS_AS(check_feasible(inst, x), StructuralError);
  x.choice = {0};
  CHECK_THROWS_AS(check_feasible(inst, x), StructuralError);

  Assignment idle = Assignment::empty(inst, {0, 1});
  idle.choice[0] = 0;
  const auto r = check_feasible(inst, idle);
  REQUIRE_FALSE(r.feasible);
  CHECK(r.violations[0].kind == Violation::Kind::InactiveServed);
}

TEST_CASE("lift of the example equilibrium") {
  const auto inst = fixtures::example();
  const auto y = lift_to_edge_states(inst, reduced(inst, {0, 1, 0}));
  CHECK(at(inst, y, 0, kB_) == EdgeState::Serving);
  CHECK(at(inst, y, 2, kB_) == EdgeState::Serving);
  CHECK(at(inst, y, 1, kA_) == EdgeState::Serving);
  CHECK(at(inst, y, 0, kA_) == EdgeState::Unavailable);
  CHECK(at(inst, y, 1, kB_) == EdgeState::Unavailable);
  CHECK(at(inst, y, 2, kA_) == EdgeState::Available);
  CHECK(check_valid(inst, y));

  CHECK_THROWS_AS(lift_to_edge_states(inst, reduced(inst, {1, 1, 0})), InfeasibleAssignment);
}

TEST_CASE("lift of a lone disconnected user") {
  const GameInstance fits(1, 1, {{0, 0, 2, 1}}, {2});
  const GameInstance too_big(1, 1, {{0, 0, 3, 1}}, {2});
  CHECK(lift_to_edge_states(fits, Assignment::empty(fits))[0] == EdgeState::Available);
  CHECK(lift_to_edge_states(too_big, Assignment::empty(too_big))[0] == EdgeState::Unavailable);
}

TEST_CASE("check_valid flags the best-available violation") {
  const auto inst = fixtures::example();
  auto y = lift_to_edge_states(inst, reduced(inst, {0, 1, 1}));
  CHECK(at(inst, y, 2, kB_) == EdgeState::Available);
  CHECK_FALSE(check_valid(inst, y));

  const GameInstance one(2, 1, {{0, 0, 2, 1}, {1, 0, 3, 1}}, {2});
  CHECK_FALSE(check_valid(one, EdgeStateConfig(2, EdgeState::Unavailable)));
}

TEST_CASE("check_valid respects activity") {
  const auto inst = fixtures::star();
  EdgeStateConfig y{EdgeState::Serving, EdgeState::Unavailable};
  const std::vector<std::uint8_t> first_off{0, 1};
  CHECK(check_valid(inst, y));
  CHECK_FALSE(check_valid(inst, y, first_off));
}

TEST_CASE("is_nash and observables on the example") {
  const auto inst = fixtures::example();
  const auto good = reduced(inst, {0, 1, 0});
  CHECK(is_nash(inst, good));
  const auto g = observables(inst, good);
  CHECK(g.total_utility == 5);
  CHECK(g.disconnected == 0);
  CHECK(g.per_unit_load == std::vector<std::int64_t>{1, 3});
  CHECK(g.spare_capacity == 3);

  const auto saturated = reduced(inst, {1, 0, 0});
  CHECK(is_nash(inst, saturated));
  const auto s = observables(inst, saturated);
  CHECK(s.per_unit_load == std::vector<std::int64_t>{3, 4});
  CHECK(s.spare_capacity == 0);
  // v_1a + v_2b + v_3b with the example's values
  CHECK(s.total_utility == 2 + 0 + 1);

  CHECK_FALSE(is_nash(inst, reduced(inst, {0, 0, 1})));

  const auto empty = observables(inst, Assignment::empty(inst));
  CHECK(empty.total_utility == 0);
  CHECK(empty.disconnected == 3);
  CHECK(empty.spare_capacity == 7);
  CHECK_THROWS_AS(observables(inst, reduced(inst, {1, 1, 0})), InfeasibleAssignment);
}

TEST_CASE("best_response_of") {
  const auto inst = fixtures::example();
  CHECK(best_response_of(inst, reduced(inst, {0, 0, 1}), 1) == std::optional<Index>(kA_));
  CHECK_FALSE(best_response_of(inst, reduced(inst, {0, 1, 0}), 0).has_value());

  const GameInstance lone(1, 2, {{0, 0, 5, 1}, {0, 1, 1, 1}}, {2, 2});
  CHECK(best_response_of(lone, Assignment::empty(lone), 0) == std::optional<Index>(1));

  const GameInstance tie(1, 2, {{0, 0, 1, 3}, {0, 1, 1, 3}}, {1, 1});
  CHECK(best_response_of(tie, Assignment::empty(tie), 0) == std::optional<Index>(0));
  Assignment on_b = Assignment::empty(tie);
  on_b.choice[0] = 1;
  CHECK_FALSE(best_response_of(tie, on_b, 0).has_value());
  CHECK(is_nash(tie, on_b));
}

TEST_CASE("utility upper bound") {
  CHECK(utility_upper_bound(fixtures::example()) == 6.0);
  CHECK(utility_upper_bound(fixtures::star(0.5, 0.25), true) == doctest::Approx(3.5 + 1.0));
  CHECK(utility_upper_bound(fixtures::star(0.0, 0.0), true) == 0.0);
}

TEST_CASE("round trip and certification equivalence on exhaustive assignments") {
  Rng rng = make_rng(11);
  int feasible = 0, nash = 0;
  for (int k = 0; k < 40; ++k) {
    const auto inst = k % 2 ? testing::random_tree(rng, 8) : testing::random_graph(rng, 4, 3, 0.7);
    if (inst.n_edges() > 12) continue;
    testing::for_each_assignment(inst, [&](const Assignment& x) {
      if (!check_feasible(inst, x).feasible) return;
      ++feasible;
      const auto y = lift_to_edge_states(inst, x);
      CHECK(project_to_assignment(inst, y) == x);
      const bool n = is_nash(inst, x);
      nash += n;
      CHECK(n == check_valid(inst, y));
    });
  }
  CHECK(feasible > 1000);
  CHECK(nash > 50);
}

TEST_CASE("applying a best response raises U and leaves everyone else unchanged") {
  Rng rng = make_rng(12);
  int moves = 0;
  for (int k = 0; k < 200; ++k) {
    const auto inst = testing::random_graph(rng, 6, 3, 0.6);
    Assignment x = Assignment::empty(inst);
    for (int step = 0; step < 30; ++step) {
      const Index u = std::uniform_int_distribution<Index>(0, inst.n_users() - 1)(rng);
      const auto br = best_response_of(inst, x, u);
      if (!br) continue;
      Assignment next = x;
      next.choice[u] = *br;
      REQUIRE(check_feasible(inst, next).feasible);
      CHECK(observables(inst, next).total_utility > observables(inst, x).total_utility);
      for (Index other = 0; other < inst.n_users(); ++other)
        if (other != u) CHECK(current_value(inst, next, other) == current_value(inst, x, other));
      x = next;
      ++moves;
    }
  }
  CHECK(moves > 200);
}

TEST_CASE("every social optimum is a Nash equilibrium") {
  Rng rng = make_rng(13);
  for (int k = 0; k < 60; ++k) {
    const auto inst = testing::random_graph(rng, 5, 3, 0.6);
    std::int64_t best = -1;
    std::vector<Assignment> optima;
    testing::for_each_assignment(inst, [&](const Assignment& x) {
      if (!check_feasible(inst, x).feasible) return;
      const auto u = observables(inst, x).total_utility;
      if (u > best) best = u, optima.clear();
      if (u == best) optima.push_back(x);
    });
    for (const auto& x : optima) CHECK(is_nash(inst, x));
  }
}
