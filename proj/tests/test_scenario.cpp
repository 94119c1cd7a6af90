#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stackpc/config.hpp"
#include "stackpc/follower_dynamics.hpp"
#include "stackpc/scenario.hpp"
#include "support.hpp"

using namespace stackpc;

TEST_CASE("placement") {
  const auto empty = generate(3, 0);
  CHECK(empty.size() == 0);
  CHECK(empty.sue_pos.empty());
  CHECK(empty.mbs_pos.isZero());
  CHECK(empty.mue_pos.norm() <= 1000.0);

  CHECK(generate(42, 6) == generate(42, 6));
  CHECK(generate(42, 6).hash() == generate(42, 6).hash());
  CHECK_FALSE(generate(42, 6) == generate(43, 6));

  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto s = generate(seed, 8);
    CHECK(s.mue_pos.norm() <= s.macro_radius);
    for (Index i = 0; i < 8; ++i) {
      CHECK(s.sbs_pos[i].norm() <= s.macro_radius);
      CHECK((s.sue_pos[i] - s.sbs_pos[i]).norm() <= s.small_radius);
      if (s.separation_satisfied)
        for (Index j = 0; j < i; ++j) CHECK((s.sbs_pos[i] - s.sbs_pos[j]).norm() >= 2 * s.small_radius);
    }
  }
}

TEST_CASE("a larger drop extends a smaller one") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto small = generate(seed, 2), big = generate(seed, 8);
    CHECK(small.mue_pos == big.mue_pos);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(small.sbs_pos[i] == big.sbs_pos[i]);
      CHECK(small.sue_pos[i] == big.sue_pos[i]);
    }
  }
}

TEST_CASE("macro user distance matches the uniform-disc mean") {
  double sum = 0.0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) sum += generate(static_cast<std::uint64_t>(seed), 4).mue_pos.norm();
  const double expected = 2.0 / 3.0 * 1000.0;
  CHECK(std::abs(sum / n - expected) < 0.02 * expected);
}

TEST_CASE("path-loss law") {
  PathLossModel plm;
  plm.reference_gain = 3.0;
  CHECK(plm.gain(1.0) == 3.0);
  CHECK(plm.gain(0.01) == 3.0);  // clamped at the reference distance
  CHECK(plm.gain(10.0) == doctest::Approx(3e-4).epsilon(1e-14));
  plm.exponent = 0.0;
  CHECK_THROWS_AS(plm.validate(), ContractViolation);
}

TEST_CASE("mirror geometry gives symmetric cross gains") {
  Scenario s;
  s.sbs_pos = {{-150.0, 40.0}, {150.0, 40.0}};
  s.sue_pos = {{-120.0, 10.0}, {120.0, 10.0}};
  s.mue_pos = {0.0, 500.0};
  const auto g = gains_from_scenario(s, PathLossModel{});
  CHECK(g.h_ss_cross(0, 1) == g.h_ss_cross(1, 0));
  CHECK(g.h_ss_direct(0) == g.h_ss_direct(1));
  CHECK(g.h_m_from_sue(0) == g.h_m_from_sue(1));
  CHECK(g.h_sbs_from_mue(0) == g.h_sbs_from_mue(1));
  CHECK(g.h_ss_cross(0, 0) == 0.0);
}

TEST_CASE("gain mapping follows the links") {
  const auto s = generate(11, 3);
  PathLossModel plm;
  const auto g = gains_from_scenario(s, plm);
  CHECK(g.h_mm == plm.gain(s.mue_pos.norm()));
  for (Index i = 0; i < 3; ++i) {
    CHECK(g.h_m_from_sue(i) == plm.gain(s.sue_pos[i].norm()));
    CHECK(g.h_sbs_from_mue(i) == plm.gain((s.mue_pos - s.sbs_pos[i]).norm()));
    CHECK(g.h_ss_direct(i) == plm.gain((s.sue_pos[i] - s.sbs_pos[i]).norm()));
    for (Index j = 0; j < 3; ++j)
      if (i != j) CHECK(g.h_ss_cross(i, j) == plm.gain((s.sue_pos[j] - s.sbs_pos[i]).norm()));
  }
}

TEST_CASE("generated gains are finite and positive, with or without shadowing") {
  PathLossModel shadowed;
  shadowed.shadowing_sigma_db = 8.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = generate(seed, 5);
    for (const auto& plm : {PathLossModel{}, shadowed}) {
      const auto g = gains_from_scenario(s, plm);
      CHECK_NOTHROW(g.validate());
      CHECK(g.h_mm > 0.0);
      for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j)
          if (i != j) CHECK(g.h_ss_cross(i, j) > 0.0);
    }
    CHECK(gains_from_scenario(s, shadowed).h_mm == gains_from_scenario(s, shadowed).h_mm);
  }
}

TEST_CASE("adversarial geometry is flagged by the contraction report") {
  // Each SUE sits at the edge of its own cell, right next to the other SBS.
  Scenario s;
  s.sbs_pos = {{0.0, 0.0}, {30.0, 0.0}};
  s.sue_pos = {{28.0, 0.0}, {2.0, 0.0}};
  s.mue_pos = {500.0, 0.0};
  const auto g = gains_from_scenario(s, PathLossModel{});
  CHECK(g.h_ss_cross(0, 1) > g.h_ss_direct(0));
  CHECK_FALSE(build_w_matrix(g).contraction_certified);
}

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dbm_to_watts(-104.0) == doctest::Approx(3.981071705534972e-14).epsilon(1e-12));
  CHECK(noise_power_watts(-174.0, 10e6) == doctest::Approx(dbm_to_watts(-104.0)).epsilon(1e-12));
  CHECK(watts_to_dbm(noise_power_watts(-174.0, 10e6)) == doctest::Approx(-104.0).epsilon(1e-12));
  for (double x = -150.0; x <= 60.0; x += 0.37) {
    CHECK(watts_to_dbm(dbm_to_watts(x)) == doctest::Approx(x).epsilon(1e-12));
    CHECK(linear_to_db(db_to_linear(x)) == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK(db_to_linear(30.0) == doctest::Approx(1e3));
  CHECK_THROWS_AS(noise_power_watts(-174.0, 0.0), ContractViolation);
}

TEST_CASE("config text round-trips") {
  const std::string text = R"(# paper defaults with a lambda sweep
[scenario]
seed = 7
k = 8
[pathloss]
exponent = 3.5      ; urban
shadowing_sigma_db = 6
[game]
lambda_db = 30
pt_dbm = -10
[solver]
max_outer = 100
[sweep]
axis = lambda
values_db = 10, 20, 30
drops = 50
schemes = sg
output = results/lambda
)";
  const auto c = parse_config(text);
  CHECK(c.scenario.seed == 7);
  CHECK(c.scenario.k == 8);
  CHECK(c.pathloss.exponent == 3.5);
  CHECK(c.pathloss.shadowing_sigma_db == 6.0);
  CHECK(c.game.lambda_mue == doctest::Approx(1e3));
  CHECK(c.game.lambda_sue == c.game.lambda_mue);
  CHECK(c.game.pt_dbm == -10.0);
  CHECK(c.solver.max_outer == 100);
  CHECK(c.sweep.axis == SweepAxis::lambda);
  REQUIRE(c.sweep.values.size() == 3);
  CHECK(c.sweep.values[0] == doctest::Approx(10.0));
  CHECK(c.sweep.values[2] == doctest::Approx(1000.0));
  CHECK(c.sweep.schemes == std::vector<Scheme>{Scheme::sg});
  CHECK(c.sweep.output == "results/lambda");

  const std::string canonical = serialize_config(c);
  CHECK(parse_config(canonical) == c);
  CHECK(serialize_config(parse_config(canonical)) == canonical);
  CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});

  CounterRng rng(5, StreamRole::test_instance, 0);
  for (int i = 0; i < 200; ++i) {
    ExperimentConfig r;
    r.scenario.seed = rng.next_u64();
    r.scenario.k = static_cast<Index>(rng.next_u64() % 20);
    r.scenario.small_radius_m = rng.uniform(1.0, 200.0);
    r.pathloss.exponent = rng.uniform(2.0, 5.0);
    r.game.lambda_mue = rng.uniform(0.0, 1e6);
    r.game.lambda_sue = rng.uniform(1e-3, 1e6);
    r.game.pt_dbm = rng.uniform(-40.0, 40.0);
    r.solver.tol_outer = rng.uniform(1e-15, 1e-6);
    r.sweep.values = {rng.uniform(-30.0, 0.0), rng.uniform(0.1, 30.0)};
    r.sweep.axis = SweepAxis::pt_dbm;
    const std::string s = serialize_config(r);
    REQUIRE(parse_config(s) == r);
    CHECK(serialize_config(parse_config(s)) == s);
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[nowhere]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("k = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[scenario]\nk 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[scenario]\nk = three\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[scenario]\nk = 3.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[scenario]\nradius = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[game]\nlambda_sue = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[game]\npt_dbm = 1e999\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\naxis = frequency\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nschemes = sg, nash\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[pathloss]\nexponent = -1\n"), ConfigError);
  CHECK_THROWS_WITH(parse_config("[scenario]\n\nk = x\n"), doctest::Contains("line 3"));
  CHECK_THROWS_AS(load_config("/nonexistent/stackpc.cfg"), ConfigError);

  SweepSpec s;
  s.values = {1.0, 1.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.values = {1.0, 2.0};
  s.drops = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.drops = 1;
  s.axis = SweepAxis::k;
  s.values = {1.5, 2.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.values = {2.0, 4.0};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("config maps to game parameters") {
  ExperimentConfig c;
  const auto p = make_params(c);
  CHECK(p.k_sue == 4);
  CHECK(p.p_max == doctest::Approx(1e-3));
  CHECK(p.lambda_mue == 1e3);
  CHECK(p.noise == doctest::Approx(3.981071705534972e-14).epsilon(1e-12));
  CHECK(at_axis_value(c, SweepAxis::k, 8).scenario.k == 8);
  CHECK(at_axis_value(c, SweepAxis::pt_dbm, 20).game.pt_dbm == 20.0);
  const auto l = at_axis_value(c, SweepAxis::lambda, 10.0);
  CHECK(l.game.lambda_mue == 10.0);
  CHECK(l.game.lambda_sue == 10.0);
}
