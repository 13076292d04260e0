#include "mdma/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "mdma/cvxcore.hpp"
#include "mdma/harness.hpp"
#include "mdma/kpi.hpp"
#include "mdma/sca.hpp"
#include "mdma/vosmetric.hpp"

namespace mdma {

namespace {

ScenarioConfig small_config(std::mt19937_64& rng) {
  ScenarioConfig c;
  c.num_comm = 1 + static_cast<int>(uniform01(rng) * 3);
  c.num_pos = static_cast<int>(uniform01(rng) * 3);
  c.num_sense = static_cast<int>(uniform01(rng) * 2);
  c.grid.num_bands = 1 + static_cast<int>(uniform01(rng) * 2);
  c.grid.num_frames = 1 + static_cast<int>(uniform01(rng) * 2);
  const int rbs = c.grid.num_bands * c.grid.num_frames;
  c.a_max = std::max(2, (c.num_users() + rbs - 1) / rbs);
  c.p_max_dbm = uniform(rng, 10.0, 40.0);
  return c;
}

KpiSpec random_spec(std::mt19937_64& rng) {
  KpiSpec k;
  k.direction = uniform01(rng) < 0.5 ? Direction::High : Direction::Low;
  k.target = uniform(rng, 0.1, 10.0);
  k.alpha = uniform(rng, 0.05, 5.0);
  k.beta = uniform(rng, 0.05, 0.95);
  k.weight = uniform(rng, 0.1, 2.0);
  return k;
}

SinrVector random_z(const Scenario& s, std::mt19937_64& rng) {
  SinrVector z(s.num_users());
  for (int k = 0; k < s.num_users(); ++k) z(k) = std::exp(uniform(rng, -3.0, 8.0));
  return z;
}

}  // namespace

SelftestReport run_selftest(std::ostream& os, std::uint64_t seed, int instances) {
  SelftestReport rep;
  std::mt19937_64 rng(seed);
  auto check = [&](const std::string& name, const std::function<std::string()>& body) {
    std::string err;
    try {
      err = body();
    } catch (const std::exception& e) {
      err = std::string("exception: ") + e.what();
    }
    os << (err.empty() ? "PASS " : "FAIL ") << name;
    if (!err.empty()) os << "  " << err;
    os << '\n';
    ++(err.empty() ? rep.passed : rep.failed);
  };

  check("normalize in [0,1] and monotone", [&]() -> std::string {
    for (int t = 0; t < 50 * instances; ++t) {
      const KpiSpec k = random_spec(rng);
      const double q1 = uniform(rng, 0.0, 3.0 * k.target / k.beta);
      const double q2 = q1 + uniform(rng, 0.0, k.target);
      const double v1 = normalize(q1, k), v2 = normalize(q2, k);
      if (!(v1 >= 0.0 && v1 <= 1.0)) return "value out of range at q=" + std::to_string(q1);
      const bool ok = k.direction == Direction::High ? v2 >= v1 - 1e-15 : v2 <= v1 + 1e-15;
      if (!ok) return "monotonicity broken at q=" + std::to_string(q1);
    }
    return {};
  });

  check("objective_L nondecreasing in z", [&]() -> std::string {
    for (int t = 0; t < instances; ++t) {
      const Scenario s = generate(small_config(rng), rng());
      const Assignment a = random_assignment(s, rng());
      SinrVector z = random_z(s, rng);
      for (int k = 0; k < s.num_users(); ++k) {
        const double before = objective_L(a, z, s).floored;
        z(k) *= 1.0 + uniform01(rng);
        if (objective_L(a, z, s).floored < before - 1e-12) return "decrease at user " + std::to_string(k);
      }
    }
    return {};
  });

  check("fixed_power fills each sub-frame budget", [&]() -> std::string {
    for (int t = 0; t < instances; ++t) {
      const Scenario s = generate(small_config(rng), rng());
      const Assignment a = random_assignment(s, rng());
      const PowerAlloc p = fixed_power(a, s);
      for (int n = 0; n < s.grid().num_frames; ++n) {
        double sum = 0.0;
        bool powered = false;
        for (int k : a.users_in_frame(n))
          if (s.user(k).bs_powered()) {
            sum += p(k);
            powered = true;
          }
        if (powered && std::abs(sum - s.params().p_max) > 1e-12 * s.params().p_max)
          return "frame " + std::to_string(n) + " sums to " + std::to_string(sum);
      }
    }
    return {};
  });

  check("DC split reproduces z (I + sigma)", [&]() -> std::string {
    for (int t = 0; t < instances; ++t) {
      const Scenario s = generate(small_config(rng), rng());
      const Assignment a = random_assignment(s, rng());
      const SinrVector z = random_z(s, rng);
      PowerAlloc p(s.num_users());
      for (int k = 0; k < s.num_users(); ++k) p(k) = uniform01(rng) * s.params().p_max;
      for (const DcTerm& d : dc_eval(z, p, a, s).terms) {
        const double lhs = 0.25 * (d.qa - d.qb) * d.noise;
        const double rhs = z(d.target) * (d.interference + d.noise);
        if (std::abs(lhs - rhs) > 1e-9 * std::max(std::abs(rhs), 1e-300))
          return "mismatch " + std::to_string(lhs) + " vs " + std::to_string(rhs);
      }
    }
    return {};
  });

  check("FIM positive semidefinite", [&]() -> std::string {
    for (int t = 0; t < instances; ++t) {
      const Fim j = fim_matrix(1 + static_cast<int>(uniform01(rng) * 8), 4 + static_cast<int>(uniform01(rng) * 12),
                               4 + static_cast<int>(uniform01(rng) * 12), uniform(rng, -1.0, 1.0),
                               uniform(rng, 1e-7, 1e-6));
      const double lo = Eigen::SelfAdjointEigenSolver<Fim>(j).eigenvalues().minCoeff();
      if (lo < -1e-9 * j.trace()) return "eigenvalue " + std::to_string(lo);
    }
    return {};
  });

  check("SCA trace nondecreasing and P1 feasible", [&]() -> std::string {
    for (int t = 0; t < instances; ++t) {
      const Scenario s = generate(small_config(rng), rng());
      const Assignment a = vos_prioritized_assignment(s, rng());
      const ScaResult r = sca_power(a, s);
      for (size_t i = 1; i < r.trace.size(); ++i)
        if (r.trace[i] < r.trace[i - 1] - 1e-9 * std::max(1.0, std::abs(r.trace[i - 1])))
          return "trace drops at round " + std::to_string(i);
      if (p1_violation(s, a, r.p) > 1e-7) return "P1 violated";
    }
    return {};
  });

  check("results recompute from (a, p)", [&]() -> std::string {
    for (int t = 0; t < instances; ++t) {
      const Scenario s = generate(small_config(rng), rng());
      const SolveResult r = run_algorithm("Random-SCA", s, rng());
      const SolveResult again = make_result(s, r.assignment, r.p);
      if (std::abs(again.log_objective - r.log_objective) > 1e-9 * std::max(1.0, std::abs(r.log_objective)) ||
          std::abs(again.product_vos - r.product_vos) > 1e-9)
        return "stored values drift";
    }
    return {};
  });

  return rep;
}

}  // namespace mdma
