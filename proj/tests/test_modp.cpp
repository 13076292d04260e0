#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mdma/harness.hpp"
#include "mdma/modp.hpp"
#include "mdma/sca.hpp"
#include "oracles.hpp"

using namespace mdma;

namespace {

Scenario tiny(std::mt19937_64& rng) {
  ScenarioConfig c;
  const int K = 1 + static_cast<int>(uniform01(rng) * 3);
  c.num_comm = c.num_pos = c.num_sense = 0;
  for (int k = 0; k < K; ++k) {
    const int t = static_cast<int>(uniform01(rng) * 3);
    (t == 0 ? c.num_comm : t == 1 ? c.num_pos : c.num_sense)++;
  }
  c.grid.num_bands = 1 + static_cast<int>(uniform01(rng) * 2);
  c.grid.num_frames = 1 + static_cast<int>(uniform01(rng) * 2);
  c.a_max = 2;
  while (c.grid.num_rbs() * c.a_max < K) ++c.grid.num_frames;
  c.p_max_dbm = uniform(rng, 10.0, 40.0);
  return generate(c, rng());
}

}  // namespace

TEST_CASE("initial vertex contains every achievable z") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 30; ++t) {
    ScenarioConfig c;
    c.grid.num_bands = 2, c.grid.num_frames = 2, c.a_max = 3;
    const Scenario s = generate(c, rng());
    const Assignment a = random_assignment(s, rng());
    for (int n = 0; n < 2; ++n) {
      const SubframeAssignment a_n = slice(a, n);
      const SinrVector z0 = initial_vertex(a_n, s);
      const SubframeModel model = build_subframe_model(s, a_n);
      for (int r = 0; r < 20; ++r) {
        PowerAlloc p = PowerAlloc::Zero(s.num_users());
        double left = s.params().p_max;
        for (int k : model.powered) {
          p(k) = uniform01(rng) * left;
          left -= p(k);
        }
        const SinrVector z = induced_sinr(model, p);
        for (int k : a_n.users) CHECK(z(k) <= z0(k) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("projection onto the feasible set") {
  ScenarioConfig c;
  c.num_comm = 1, c.num_pos = 0, c.num_sense = 0;
  const Scenario s = generate(c, 2);
  Assignment a(1, 1, 3);
  a.assign(0, Rb{0, 0});
  const SubframeAssignment a_n = slice(a, 0);
  const SubframeModel model = build_subframe_model(s, a_n);
  const SinrVector z0 = initial_vertex(a_n, s);
  const Projection at = project(z0, model);
  CHECK(at.delta == 1.0);
  CHECK(at.delta_ub == 1.0);
  const Projection twice = project(2.0 * z0, model, 1e-6);
  CHECK(twice.delta <= 0.5);
  CHECK(twice.delta_ub >= 0.5);
  CHECK(twice.delta_ub - twice.delta <= 1e-6);
  CHECK(model.max_violation(twice.point, twice.p) <= 1e-9 * twice.point(0));
}

TEST_CASE("polyblock on a lone service returns the vertex") {
  ScenarioConfig c;
  c.num_comm = 1, c.num_pos = 0, c.num_sense = 0;
  c.p_max_dbm = 0.0;
  const Scenario s = generate(c, 4);
  Assignment a(1, 1, 3);
  a.assign(0, Rb{0, 0});
  const SubframeAssignment a_n = slice(a, 0);
  const PolyblockResult r = polyblock_solve(a_n, s);
  const double want = subframe_objective(s, a_n, initial_vertex(a_n, s));
  CHECK(r.certified);
  CHECK(r.lower == doctest::Approx(want).epsilon(1e-9));
  CHECK(r.upper >= r.lower);
}

TEST_CASE("polyblock bounds bracket the grid optimum") {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 15; ++t) {
    ScenarioConfig c;
    c.num_comm = 2, c.num_pos = 1, c.num_sense = 0;
    c.grid.num_frames = 1, c.a_max = 3;
    c.p_max_dbm = uniform(rng, 10.0, 40.0);
    const Scenario s = generate(c, rng());
    Assignment a(3, 1, 1);
    for (int k = 0; k < 3; ++k) a.assign(k, Rb{0, 0});
    const PolyblockResult r = polyblock_solve(slice(a, 0), s);
    const double grid = oracle::frame_grid_best(s, a, 0, 80).value;
    CHECK(r.certified);
    CHECK(r.upper - r.lower <= 0.05 * std::abs(r.lower) + 1e-6);
    CHECK(r.upper >= grid - 1e-6 * std::abs(grid));
    CHECK(oracle::power_feasible(s, a, 0, r.p, 1e-7));
    CHECK(r.lower == doctest::Approx(oracle::frame_value(s, a, 0, r.p)).epsilon(1e-6));
    for (size_t i = 1; i < r.history.size(); ++i) {
      CHECK(r.history[i].first >= r.history[i - 1].first);
      CHECK(r.history[i].second <= r.history[i - 1].second + 1e-9 * std::abs(r.history[i - 1].second));
    }
  }
}

TEST_CASE("enumerate_a_n counts") {
  ScenarioConfig c;
  c.grid.num_bands = 2;
  c.a_max = 2;
  const Scenario s = generate(c, 1);
  CHECK(enumerate_a_n({}, 0, s).size() == 1);
  CHECK(enumerate_a_n({3}, 0, s).size() == 2);
  CHECK(enumerate_a_n({0, 1, 2}, 0, s).size() == 6);
  CHECK(enumerate_a_n({0, 1, 2, 3}, 0, s).size() == 6);
  CHECK(enumerate_a_n({0, 1, 2, 3, 4}, 0, s).empty());
  for (const auto& e : enumerate_a_n({2, 0, 1}, 1, s)) {
    CHECK(e.n == 1);
    CHECK(e.users == std::vector<int>{0, 1, 2});
  }
}

TEST_CASE("MODP against exhaustive search on small instances") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 12; ++t) {
    const Scenario s = tiny(rng);
    const SolveResult r = modp_solve(s);
    const double brute = oracle::brute_force_optimum(s, 40);
    CHECK(r.unassigned.empty());
    CHECK(p1_violation(s, r.assignment, r.p) <= 1e-7);
    CHECK(brute <= r.log_objective + 0.05 * std::abs(r.log_objective) + 1e-6);
    CHECK(r.diag.upper_bound >= brute - 1e-6 * std::abs(brute) - 1e-9);
  }
}

TEST_CASE("pruning does not change the certified value") {
  std::mt19937_64 rng(54);
  for (int t = 0; t < 6; ++t) {
    const Scenario s = tiny(rng);
    ModpOptions on, off;
    off.polyblock.prune = false;
    const double a = modp_solve(s, on).log_objective, b = modp_solve(s, off).log_objective;
    CHECK(std::abs(a - b) <= 0.05 * std::max(std::abs(a), std::abs(b)) + 1e-6);
  }
}

TEST_CASE("MODP trace and limits") {
  ScenarioConfig c;
  c.num_comm = 2, c.num_pos = 0, c.num_sense = 0;
  c.grid.num_frames = 2;
  const Scenario s = generate(c, 6);
  std::ostringstream tr;
  ModpOptions opt;
  opt.trace = &tr;
  modp_solve(s, opt);
  CHECK_FALSE(tr.str().empty());

  ModpOptions tight;
  tight.state_budget = 1;
  CHECK_THROWS_AS(modp_solve(generate(ScenarioConfig{}, 1), tight), StateBudgetExceeded);

  ScenarioConfig crowded;
  crowded.grid.num_frames = 1;
  crowded.a_max = 2;
  const SolveResult r = modp_solve(generate(crowded, 2));
  CHECK(r.diag.infeasible);
  CHECK(static_cast<int>(r.unassigned.size()) == crowded.num_users());
}
