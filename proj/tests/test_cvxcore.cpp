#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "mdma/cvxcore.hpp"
#include "mdma/harness.hpp"
#include "mdma/kpi.hpp"
#include "mdma/sca.hpp"
#include "oracles.hpp"

using namespace mdma;

namespace {

Scenario small(std::uint64_t seed, int bands = 2, int frames = 2) {
  ScenarioConfig c;
  c.grid.num_bands = bands, c.grid.num_frames = frames;
  c.a_max = 3;
  return generate(c, seed);
}

}  // namespace

TEST_CASE("feasibility oracle") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    const Scenario s = small(rng());
    const Assignment a = random_assignment(s, rng());
    for (int n = 0; n < s.grid().num_frames; ++n) {
      const SubframeModel model = build_subframe_model(s, slice(a, n));
      const SinrVector zero = SinrVector::Zero(s.num_users());
      const FeasibilityResult f0 = feasible_power(model, zero);
      CHECK(f0.feasible);

      // whatever a P1-feasible p induces is feasible, and its witness checks out
      const SinrVector z = induced_sinr(model, sca_power(a, s).p);
      const FeasibilityResult f = feasible_power(model, 0.999 * z, true);
      CHECK(f.feasible);
      REQUIRE(f.p);
      CHECK(model.max_violation(0.999 * z, *f.p) <= 1e-7);
      CHECK(oracle::power_feasible(s, a, n, *f.p, 1e-7));
      CHECK(feasible_power(model, 0.5 * z).feasible);

      if (model.powered.empty()) continue;
      const FeasibilityResult far = feasible_power(model, SinrVector::Constant(s.num_users(), 1e30));
      CHECK_FALSE(far.feasible);
    }
  }
}

TEST_CASE("feasibility example: one comm user at full power") {
  ScenarioConfig c;
  c.num_comm = 1, c.num_pos = 0, c.num_sense = 0;
  const Scenario s = generate(c, 5);
  Assignment a(1, 1, 3);
  a.assign(0, Rb{0, 0});
  const SubframeModel model = build_subframe_model(s, slice(a, 0));
  const double zmax = s.params().p_max * s.link_gain(0, 0, Rb{0, 0}) / s.user(0).noise;
  CHECK(feasible_power(model, SinrVector::Constant(1, zmax * (1.0 - 1e-6))).feasible);
  CHECK_FALSE(feasible_power(model, SinrVector::Constant(1, zmax * (1.0 + 1e-6))).feasible);
}

TEST_CASE("DC identity and gradients") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 30; ++t) {
    const Scenario s = small(rng(), 1, 2);
    const Assignment a = random_assignment(s, rng());
    const int K = s.num_users();
    PowerAlloc p(K);
    SinrVector z(K);
    for (int k = 0; k < K; ++k) {
      p(k) = uniform01(rng) * s.params().p_max / K;
      z(k) = std::exp(uniform(rng, -3.0, 5.0));
    }
    const DcTerms d = dc_eval(z, p, a, s);
    for (const auto& term : d.terms) {
      const double lhs = term.noise * 0.25 * (term.qa - term.qb);
      const double rhs = z(term.target) * (term.interference + term.noise);
      // A - B cancels; the rounding of A bounds the error
      CHECK(std::abs(lhs - rhs) <= 1e-15 * term.noise * term.qa);
    }

    // central differences on every coordinate, matching terms by (target, observer)
    const Vec x = stack_zp(z, p);
    auto find = [](const DcTerms& ts, const DcTerm& ref) -> const DcTerm& {
      for (const auto& u : ts.terms)
        if (u.target == ref.target && u.observer == ref.observer) return u;
      throw std::logic_error("term not found");
    };
    for (int i = 0; i < 2 * K; ++i) {
      const double h = 1e-6 * std::max(std::abs(x(i)), i < K ? 1.0 : s.params().p_max);
      Vec xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const DcTerms dp = dc_eval(xp.head(K), xp.tail(K), a, s);
      const DcTerms dm = dc_eval(xm.head(K), xm.tail(K), a, s);
      for (const auto& term : d.terms) {
        const double ga = (find(dp, term).qa - find(dm, term).qa) / (2 * h);
        const double gb = (find(dp, term).qb - find(dm, term).qb) / (2 * h);
        const double scale = std::abs(term.grad_a(i)) + std::abs(term.grad_b(i)) + 1e-8 * term.qa / h;
        CHECK(std::abs(ga - term.grad_a(i)) <= 1e-5 * scale);
        CHECK(std::abs(gb - term.grad_b(i)) <= 1e-5 * scale);
      }
    }
  }
}

TEST_CASE("Taylor bound under-estimates the convex term") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 20; ++t) {
    const Scenario s = small(rng(), 1, 2);
    const Assignment a = random_assignment(s, rng());
    const int K = s.num_users();
    auto draw = [&] {
      Vec x(2 * K);
      for (int k = 0; k < K; ++k) {
        x(k) = std::exp(uniform(rng, -3.0, 5.0));
        x(K + k) = uniform01(rng) * s.params().p_max / K;
      }
      return x;
    };
    const Vec xa = draw();
    const DcTerms at = dc_eval(xa.head(K), xa.tail(K), a, s);
    for (int r = 0; r < 20; ++r) {
      const Vec xq = draw();
      const DcTerms q = dc_eval(xq.head(K), xq.tail(K), a, s);
      for (size_t i = 0; i < at.terms.size(); ++i) {
        const double lb = taylor_lower_bound(at.terms[i], xa, xq);
        CHECK(q.terms[i].qb >= lb - 1e-9 * (1.0 + std::abs(q.terms[i].qb)));
      }
      for (const auto& term : at.terms)
        CHECK(taylor_lower_bound(term, xa, xa) == doctest::Approx(term.qb).epsilon(1e-14));
    }
  }
}

TEST_CASE("P4 improves on a feasible anchor") {
  std::mt19937_64 rng(44);
  int solved = 0;
  for (int t = 0; t < 30; ++t) {
    const Scenario s = small(rng());
    const Assignment a = random_assignment(s, rng());
    // anchor: an LP witness for half of what SCA reaches, which is P1-feasible but not optimal
    PowerAlloc p0 = PowerAlloc::Zero(s.num_users());
    const PowerAlloc ps = sca_power(a, s).p;
    for (int n = 0; n < s.grid().num_frames; ++n) {
      const SubframeModel model = build_subframe_model(s, slice(a, n));
      const auto f = feasible_power(model, 0.5 * induced_sinr(model, ps));
      REQUIRE(f.p);
      for (int k : model.powered) p0(k) = (*f.p)(k);
    }
    const SinrVector z0 = sinr_from_powers(a, p0, s);
    const P4Result r = solve_p4(a, z0, p0, s);
    double anchor = 0.0;
    for (int n = 0; n < s.grid().num_frames; ++n) anchor += subframe_objective(s, slice(a, n), z0);
    CHECK(r.objective >= anchor - 1e-9 * std::abs(anchor));
    CHECK(p1_violation(s, a, r.p) <= 1e-7);
    // the returned z is achievable at the returned p
    const SinrVector zi = sinr_from_powers(a, r.p, s);
    for (int k = 0; k < s.num_users(); ++k) CHECK(r.z(k) <= zi(k) * (1.0 + 1e-6) + 1e-12);
    solved += !r.anchor_returned;
  }
  CHECK(solved > 0);
}

TEST_CASE("P4 with a lone comm user reaches the 1-D optimum") {
  ScenarioConfig c;
  c.num_comm = 1, c.num_pos = 0, c.num_sense = 0;
  c.p_max_dbm = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario s = generate(c, seed);
    Assignment a(1, 1, 3);
    a.assign(0, Rb{0, 0});
    const PowerAlloc p0 = PowerAlloc::Constant(1, 0.5 * s.params().p_max);
    const SinrVector z0 = sinr_from_powers(a, p0, s);
    if (!(z0(0) > z_min(s, 0, Rb{0, 0}, true))) continue;
    const P4Result r = solve_p4(a, z0, p0, s);
    const oracle::GridBest g = oracle::frame_grid_best(s, a, 0, 2001);
    CHECK(r.objective >= g.value - 1e-4 * std::abs(g.value) - 1e-9);
  }
}

TEST_CASE("P4 refuses an infeasible anchor") {
  const Scenario s = small(3);
  const Assignment a = random_assignment(s, 3);
  const PowerAlloc p = PowerAlloc::Constant(s.num_users(), s.params().p_max);
  const SinrVector z = sinr_from_powers(a, p, s);
  CHECK_THROWS_AS(solve_p4(a, z, p, s), ConstraintViolation);
  CHECK_THROWS_AS(solve_p4(a, z.head(2), p, s), std::invalid_argument);
}
