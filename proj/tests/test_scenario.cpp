#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mdma/scenario.hpp"

using namespace mdma;

TEST_CASE("steering vector") {
  const CVec v0 = steering_vector(0.0, 4);
  for (int l = 0; l < 4; ++l) CHECK(v0(l) == std::complex<double>(1.0, 0.0));

  const CVec v = steering_vector(0.7, 6);
  for (int l = 0; l < 6; ++l) CHECK(std::abs(v(l)) == doctest::Approx(1.0).epsilon(1e-15));

  const CVec v2 = steering_vector(std::numbers::pi / 6, 2);
  CHECK(std::abs(std::arg(v2(1))) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK_THROWS_AS(steering_vector(0.1, 0), std::invalid_argument);
}

TEST_CASE("path loss") {
  CHECK(path_loss_linear(1.0) == doctest::Approx(std::pow(10.0, -7.42)).epsilon(1e-14));
  CHECK(path_loss_linear(100.0) ==
        doctest::Approx(std::pow(10.0, -(74.2 + 33.6) / 10.0)).epsilon(1e-14));
  CHECK(path_loss_linear(60.0) / path_loss_linear(30.0) ==
        doctest::Approx(std::pow(10.0, -1.68 * std::log10(2.0))).epsilon(1e-13));
  CHECK_THROWS_AS(path_loss_linear(0.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_linear(-3.0), std::invalid_argument);
}

TEST_CASE("generate is deterministic per seed") {
  ScenarioConfig c;
  const auto a = to_json(generate(c, 11));
  const auto b = to_json(generate(c, 11));
  CHECK(a == b);
  CHECK(a != to_json(generate(c, 12)));
}

TEST_CASE("save and load round trip bit-exactly") {
  ScenarioConfig c;
  c.grid.num_bands = 2;
  const Scenario s = generate(c, 5);
  const auto path = std::filesystem::temp_directory_path() / "mdma_roundtrip.json";
  save_scenario(s, path);
  const Scenario t = load_scenario(path);
  std::filesystem::remove(path);
  CHECK(to_json(s) == to_json(t));
  for (int r = 0; r < c.grid.num_rbs(); ++r) {
    CHECK((s.coefficients().link_gain[r].array() == t.coefficients().link_gain[r].array()).all());
    CHECK((s.coefficients().pos_gain[r].array() == t.coefficients().pos_gain[r].array()).all());
  }
  for (int k = 0; k < s.num_users(); ++k)
    for (int m = 0; m < 2; ++m) {
      CHECK(s.echo_covariance(k, m) == t.echo_covariance(k, m));
      if (s.user(k).type == ServiceType::Pos) CHECK(s.crb(k, m).angle == t.crb(k, m).angle);
    }
}

TEST_CASE("Rician channel power matches L_tx PL(d)") {
  ScenarioConfig c;
  c.num_comm = 1, c.num_pos = 0, c.num_sense = 0;
  c.grid.num_bands = 100, c.grid.num_frames = 100;
  c.comm_dist_min = c.comm_dist_max = 250.0;
  const Scenario s = generate(c, 3);
  double mean = 0.0;
  for (const auto& per_rb : s.coefficients().channel) mean += per_rb[0].squaredNorm();
  mean /= c.grid.num_rbs();
  CHECK(mean == doctest::Approx(c.num_tx * path_loss_linear(250.0)).epsilon(0.03));
}

TEST_CASE("LoS-only limit gives the scaled steering vector") {
  ScenarioConfig c;
  c.rician_k = std::numeric_limits<double>::infinity();
  const Scenario s = generate(c, 9);
  for (int k = 0; k < s.num_users(); ++k) {
    const auto& u = s.user(k);
    const CVec want = std::sqrt(path_loss_linear(u.distance)) * steering_vector(u.angle, c.num_tx);
    CHECK((s.coefficients().channel[0][k] - want).norm() == 0.0);
  }
}

TEST_CASE("MRT gain, comm ordering and round-trip constants") {
  ScenarioConfig c;
  c.num_comm = 4;
  c.grid.num_bands = 2;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario s = generate(c, seed);
    for (int r = 0; r < c.grid.num_rbs(); ++r) {
      const Rb rb{r % 2, r / 2};
      for (int k = 0; k < c.num_comm; ++k) {
        const double h2 = s.coefficients().channel[r][k].squaredNorm();
        CHECK(s.link_gain(k, k, rb) == doctest::Approx(h2).epsilon(1e-12));
      }
    }
    for (int k = 1; k < c.num_comm; ++k) CHECK(s.user(k - 1).distance <= s.user(k).distance);
    for (int k = 0; k < s.num_users(); ++k) {
      const auto& u = s.user(k);
      if (u.type != ServiceType::Pos) continue;
      for (int m = 0; m < 2; ++m) {
        const double f = s.grid().band_frequency(m);
        const double cl = s.params().speed_of_light;
        const double rho2 = cl * cl * u.rcs /
                            (std::pow(4.0 * std::numbers::pi, 3) * f * f * std::pow(u.distance, 4));
        CHECK(s.round_trip(k, m) * s.round_trip(k, m) == doctest::Approx(rho2).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("invalid configurations are refused") {
  ScenarioConfig c;
  c.num_comm = c.num_pos = c.num_sense = 0;
  CHECK_THROWS_AS(generate(c, 1), std::invalid_argument);
  ScenarioConfig d;
  d.beta_cap = 1.0;
  CHECK_THROWS_AS(generate(d, 1), std::invalid_argument);
  ScenarioConfig e;
  e.grid.num_bands = 0;
  CHECK_THROWS_AS(generate(e, 1), std::invalid_argument);
}

TEST_CASE("KPI targets follow the generation rules") {
  ScenarioConfig c;
  const Scenario s = generate(c, 4);
  const double lt = c.grid.symbols * c.grid.symbol_duration;
  for (int k = 0; k < s.num_users(); ++k) {
    const auto& u = s.user(k);
    CHECK(u.kpis.back().target == doctest::Approx(lt));
    for (const auto& spec : u.kpis) {
      CHECK(spec.alpha >= 1e-3);
      CHECK(spec.alpha <= c.alpha_cap);
      CHECK(spec.beta >= 1e-3);
      CHECK(spec.beta <= c.beta_cap);
    }
    if (u.type == ServiceType::Comm) CHECK(u.kpis[0].target == 4.0);
    if (u.type == ServiceType::Sense) CHECK(u.kpis[0].target == 0.8);
    if (u.type == ServiceType::Pos) CHECK(u.kpis[0].target == s.crb(k, 0).angle / 20.0);
  }
}
