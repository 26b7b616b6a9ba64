#include <doctest.h>

#include <cmath>
#include <random>

#include "spg/bp.hpp"
#include "spg/ensemble.hpp"
#include "spg/oracle.hpp"
#include "support.hpp"

using namespace spg;
using testing::reduced;

namespace {

Triple user_out(const std::vector<Triple>& in, const std::vector<std::int64_t>& value, double mu,
                std::size_t a, double q0 = 0.0, double q1 = 1.0) {
  std::vector<UserNeighbor> nb;
  for (std::size_t i = 0; i < in.size(); ++i) nb.push_back({in[i], value[i], true});
  std::vector<Triple> out(in.size());
  UserFactorSummary summary;
  user_factor<SumProduct>({nb, mu, q0, q1, true}, out, summary);
  return testing::normalized(out[a]);
}

Triple unit_out(const std::vector<Triple>& in, const std::vector<std::int64_t>& weight,
                std::int64_t capacity, std::size_t a) {
  std::vector<UnitNeighbor> nb;
  for (std::size_t i = 0; i < in.size(); ++i) nb.push_back({in[i], weight[i]});
  std::vector<Triple> out(in.size());
  unit_factor<SumProduct>(nb, capacity, out);
  return testing::normalized(out[a]);
}

double max_diff(const Triple& a, const Triple& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

const Triple kFlat{1.0 / 3, 1.0 / 3, 1.0 / 3};

}  // namespace

TEST_CASE("degree-one user factor") {
  CHECK(max_diff(user_out({kFlat}, {5}, 0.0, 0), Triple{0.5, 0.0, 0.5}) < 1e-15);
  const double e = std::exp(0.7 * 5);
  CHECK(max_diff(user_out({kFlat}, {5}, 0.7, 0), Triple{1 / (1 + e), 0.0, e / (1 + e)}) < 1e-15);
}

TEST_CASE("degree-two user factor against brute force") {
  // edge 0 has the lower value
  const std::vector<Triple> in{kFlat, kFlat};
  const std::vector<std::int64_t> value{2, 5};
  const auto ref = testing::brute_user_factor(in, value, 0.0, 0.0, 1.0);
  for (std::size_t a = 0; a < 2; ++a)
    CHECK(max_diff(user_out(in, value, 0.0, a), testing::normalized(ref[a])) < 1e-14);
}

TEST_CASE("leaf unit factor") {
  CHECK(max_diff(unit_out({kFlat}, {2}, 3, 0), Triple{0.0, 0.5, 0.5}) < 1e-15);
  CHECK(max_diff(unit_out({kFlat}, {4}, 3, 0), Triple{1.0, 0.0, 0.0}) < 1e-15);
}

TEST_CASE("factor updates match single-factor marginalization") {
  Rng rng = make_rng(31);
  std::uniform_int_distribution<int> deg(1, 4), val(0, 4), wt(1, 3), cap(1, 6);
  double worst_user = 0.0, worst_unit = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int d = deg(rng);
    std::vector<Triple> in(d);
    std::vector<std::int64_t> value(d), weight(d);
    for (int i = 0; i < d; ++i) in[i] = testing::random_triple(rng), value[i] = val(rng), weight[i] = wt(rng);
    const double mu = 4.0 * uniform01(rng) - 2.0;
    const double q0 = uniform01(rng), q1 = 1.0 - q0;
    const auto ref_user = testing::brute_user_factor(in, value, mu, q0, q1);
    const std::int64_t c = cap(rng);
    const auto ref_unit = testing::brute_unit_factor(in, weight, c);
    for (int a = 0; a < d; ++a) {
      worst_user = std::max(worst_user, max_diff(user_out(in, value, mu, a, q0, q1), testing::normalized(ref_user[a])));
      worst_unit = std::max(worst_unit, max_diff(unit_out(in, weight, c, a), testing::normalized(ref_unit[a])));
    }
  }
  CHECK(worst_user < 1e-10);
  CHECK(worst_unit < 1e-10);
}

TEST_CASE("unit factor survives long products of small entries") {
  // 40 neighbours that can only be served with tiny weight; everything fits
  const std::vector<Triple> in(40, Triple{0.0, 0.0, 1e-20});
  const std::vector<std::int64_t> w(40, 1);
  const auto t = unit_out(in, w, 40, 7);
  CHECK(t[kU] == 0.0);
  CHECK(t[kA] == doctest::Approx(0.5));
  CHECK(t[kS] == doctest::Approx(0.5));

  std::vector<UnitNeighbor> nb;
  for (const auto& m : in) nb.push_back({m, 1});
  std::vector<Triple> out(in.size());
  CHECK(unit_factor<SumProduct>(nb, 40, out) == doctest::Approx(40 * std::log(1e-20)));
}

TEST_CASE("strongly negative bias on a congested instance") {
  // BP need not converge here; it must not fail through underflow
  EnsembleParams p;
  p.n_users = 100, p.n_units = 10, p.capacity = 120, p.c = -1.0;
  const auto inst = sample_instance(p, 100);
  BpOptions opt;
  opt.max_iterations = 50;
  BpResult r;
  REQUIRE_NOTHROW(r = run_bp(inst, -4.0, opt));
  for (const auto& m : r.messages.to_user) {
    CHECK(std::isfinite(m[0] + m[1] + m[2]));
    CHECK(m[0] + m[1] + m[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("star at zero bias") {
  const auto inst = fixtures::star();
  const auto r = run_bp(inst, 0.0);
  REQUIRE(r.report.converged);
  const auto p = bethe_thermodynamics(inst, r.messages);
  CHECK(p.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(p.utility == doctest::Approx(5.5).epsilon(1e-10));
  CHECK(p.free_entropy == p.entropy);
  const auto m = marginals(inst, r.messages);
  CHECK(m.serving(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(m.serving(1) == doctest::Approx(0.5).epsilon(1e-10));
  for (const auto& um : m.user) {
    double total = um.inactive + um.disconnected;
    for (double s : um.served) total += s;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("strong bias selects the best equilibrium of the star") {
  const auto inst = fixtures::star();
  const auto m = marginals(inst, run_bp(inst, 8.0).messages);
  CHECK(m.serving(0) > 0.99);
  const auto low = marginals(inst, run_bp(inst, -8.0).messages);
  CHECK(low.serving(1) > 0.99);
}

TEST_CASE("example at zero bias" * doctest::may_fail()) {
  const auto inst = fixtures::example();
  const auto r = run_bp(inst, 0.0);
  REQUIRE(r.report.converged);
  const double n = std::exp(bethe_thermodynamics(inst, r.messages).entropy);
  MESSAGE("Bethe count on the example: " << n << " (exact 2)");
  CHECK(std::abs(n - 2.0) / 2.0 <= 0.25);
}

TEST_CASE("messages stay normalized") {
  const auto inst = fixtures::example();
  const auto r = run_bp(inst, 1.3);
  for (const auto* side : {&r.messages.to_user, &r.messages.to_unit})
    for (const auto& t : *side) {
      CHECK(std::abs(t[0] + t[1] + t[2] - 1.0) < 1e-12);
      for (double x : t) CHECK(x >= 0.0);
    }
}

TEST_CASE("warm start at a fixed point stays put") {
  EnsembleParams p;
  p.n_users = 40, p.n_units = 5, p.capacity = 40;
  const auto inst = sample_instance(p, 3);
  const auto r = run_bp(inst, 0.5);
  REQUIRE(r.report.converged);
  BpSolver solver(inst, 0.5);
  solver.set_messages(r.messages);
  CHECK(solver.sweep() < 1e-9);
  const auto again = run_bp(inst, 0.5, {}, &r.messages);
  CHECK(again.report.iterations <= 2);
}

TEST_CASE("trees are solved exactly") {
  Rng rng = make_rng(32);
  for (int k = 0; k < 15; ++k) {
    const auto inst = testing::random_tree(rng, 3 + k % 10);
    const auto census = oracle::enumerate_nash(inst);
    for (double mu : {0.0, 2.0, -2.0}) {
      const auto r = run_bp(inst, mu);
      REQUIRE(r.report.converged);
      const auto ref = testing::reweighted_frequencies(inst, census, mu);
      const auto m = marginals(inst, r.messages);
      for (std::size_t e = 0; e < inst.n_edges(); ++e) CHECK(std::abs(m.serving(e) - ref.serving[e]) < 1e-6);
      const auto point = bethe_thermodynamics(inst, r.messages);
      CHECK(std::abs(point.log_z - std::log(ref.z)) < 1e-6);
      CHECK(std::abs(point.utility - ref.utility) < 1e-6);
    }
  }
}

TEST_CASE("symmetric edges get equal marginals") {
  const GameInstance sym(2, 2, {{0, 0, 1, 1}, {0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 1, 1}}, {1, 1});
  const auto m = marginals(sym, run_bp(sym, 0.0).messages);
  for (std::size_t e = 1; e < 4; ++e) CHECK(m.serving(e) == doctest::Approx(m.serving(0)).epsilon(1e-9));
}

TEST_CASE("fixed activity switches users off") {
  const auto inst = fixtures::star();
  BpSolver solver(inst, 0.0);
  solver.set_activity({1, 0});
  REQUIRE(solver.run().converged);
  const auto m = solver.marginals();
  CHECK(m.serving(0) == doctest::Approx(1.0));
  CHECK(m.serving(1) == doctest::Approx(0.0));
  CHECK(solver.thermodynamics().entropy == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("bias range is checked") {
  CHECK_THROWS_AS(run_bp(fixtures::star(), 1000.0), std::invalid_argument);
}

TEST_CASE("single-point sweep") {
  const auto inst = fixtures::example();
  const auto s = mu_sweep(inst, {0.0}, SweepDirection::Up);
  REQUIRE(s.up.size() == 1);
  const auto direct = bethe_thermodynamics(inst, run_bp(inst, 0.0).messages);
  CHECK(s.up[0].point.entropy == doctest::Approx(direct.entropy).epsilon(1e-9));
  CHECK(s.up[0].point.free_entropy == s.up[0].point.entropy);
}

TEST_CASE("utility grows with the bias along a branch") {
  EnsembleParams p;
  p.n_users = 40, p.n_units = 5, p.capacity = 50;
  const auto inst = sample_instance(p, 1);
  std::vector<double> grid;
  for (double mu = -1.0; mu <= 1.0001; mu += 0.1) grid.push_back(mu);
  const auto s = mu_sweep(inst, grid, SweepDirection::Up);
  REQUIRE(s.up.size() > 10);
  for (std::size_t i = 1; i < s.up.size(); ++i) {
    if (!s.up[i].point.converged || !s.up[i - 1].point.converged) continue;
    CHECK(s.up[i].point.utility >= s.up[i - 1].point.utility - 1e-8);
    CHECK(s.up[i].point.free_entropy ==
          doctest::Approx(s.up[i].point.mu * s.up[i].point.utility + s.up[i].point.entropy).epsilon(1e-8));
  }
}

TEST_CASE("transition analysis on synthetic branches") {
  auto point = [](double mu, double u, double s) {
    SweepPoint p;
    p.point.mu = mu, p.point.utility = u, p.point.entropy = s, p.point.free_entropy = mu * u + s;
    p.point.converged = true;
    return p;
  };
  // low branch U = 10, S = 5; high branch U = 20, S = 2; crossing at mu = 0.3
  std::vector<SweepPoint> up, down;
  for (int i = 0; i <= 10; ++i) {
    const double mu = 0.1 * i;
    up.push_back(i <= 6 ? point(mu, 10, 5) : point(mu, 20, 2));
  }
  for (int i = 10; i >= 0; --i) {
    const double mu = 0.1 * i;
    down.push_back(i >= 1 ? point(mu, 20, 2) : point(mu, 10, 5));
  }
  const auto t = analyze_transition(up, down, 30.0);
  CHECK(t.two_branches);
  REQUIRE(t.mu_star.has_value());
  CHECK(*t.mu_star == doctest::Approx(0.3));
  REQUIRE(t.jump_up.has_value());
  REQUIRE(t.jump_down.has_value());
  CHECK(*t.jump_down <= *t.mu_star);
  CHECK(*t.mu_star <= *t.jump_up);
  CHECK(t.gap_high - t.gap_low == doctest::Approx(10.0));
}

TEST_CASE("decimation finds the extremal equilibria") {
  const auto star = fixtures::star();
  const auto hi = decimate(star, 4.0);
  CHECK(hi.assignment.choice == std::vector<Index>{0, kDisconnected});
  const auto lo = decimate(star, -4.0);
  CHECK(lo.assignment.choice == std::vector<Index>{kDisconnected, 0});

  const auto ex = fixtures::example();
  const auto good = decimate(ex, 4.0);
  CHECK(good.assignment == reduced(ex, {0, 1, 0}));
  const auto bad = decimate(ex, -4.0);
  CHECK(bad.assignment == reduced(ex, {1, 0, 0}));
  CHECK(observables(ex, bad.assignment).total_utility == 3);
}

TEST_CASE("decimation output is always an equilibrium") {
  EnsembleParams p;
  p.n_users = 30, p.n_units = 4, p.capacity = 40;
  for (int k = 0; k < 5; ++k) {
    const auto inst = sample_instance(p, k);
    const auto r = decimate(inst, k % 2 ? 1.0 : -1.0);
    CHECK_FALSE(r.failed);
    CHECK(is_nash(inst, r.assignment));
  }
}
