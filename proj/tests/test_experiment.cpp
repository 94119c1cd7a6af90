#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stackpc/experiment.hpp"
#include "support.hpp"

using namespace stackpc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stackpc_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("drop records are deterministic") {
  ExperimentConfig c;
  for (Scheme scheme : {Scheme::sg, Scheme::ncg}) {
    const auto a = run_drop(drop_seed(1, 3), c, scheme);
    const auto b = run_drop(drop_seed(1, 3), c, scheme);
    CHECK(a.ok);
    CHECK(a.profile == b.profile);
    CHECK(a.u_mue == b.u_mue);
    CHECK(a.u_sue == b.u_sue);
    CHECK(a.outer_iterations == b.outer_iterations);
    CHECK(a.scenario_hash == b.scenario_hash);
  }
  CHECK(drop_seed(1, 0) != drop_seed(1, 1));
  CHECK(drop_seed(1, 0) != drop_seed(2, 0));
}

TEST_CASE("schemes see the same scenarios") {
  ExperimentConfig c;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto seed = drop_seed(c.scenario.seed, i);
    CHECK(run_drop(seed, c, Scheme::sg).scenario_hash == run_drop(seed, c, Scheme::ncg).scenario_hash);
  }
}

TEST_CASE("drops without small cells leave follower metrics empty") {
  ExperimentConfig c;
  c.scenario.k = 0;
  const auto d = run_drop(5, c, Scheme::sg);
  CHECK(d.ok);
  CHECK(d.outer_iterations == 1);
  const auto m = drop_metrics(d, c);
  CHECK(std::isnan(m.u_sue));
  CHECK(std::isnan(m.r_sue));
  CHECK(std::isnan(m.p_sue));
  CHECK(m.r_all == m.r_mue);

  const std::vector<DropMetrics> ms{m, m};
  const auto row = aggregate_metrics(0.0, ms);
  const std::string csv = metrics_csv(SweepAxis::k, {row}, "utility");
  CHECK(csv.find("0,") == csv.find('\n') + 1);
  const auto line = csv.substr(csv.find('\n') + 1);
  CHECK(line.substr(line.size() - 3) == ",,\n");
}

TEST_CASE("converged drops carry equilibrium certificates") {
  ExperimentConfig c;
  for (std::uint64_t i = 0; i < 200; i += 10) {
    const auto seed = drop_seed(c.scenario.seed, i);
    const auto d = run_drop(seed, c, Scheme::sg);
    REQUIRE(d.converged);
    const auto in = testkit::scenario_instance(seed, c.scenario.k, c);
    const auto cert = verify_equilibrium(d.profile, in.g, in.params);
    CHECK(cert.follower_gap < 1e-6);
    CHECK(cert.leader_gap < 1e-6);
  }
}

TEST_CASE("aggregation") {
  const std::vector<double> constant(17, 0.25);
  const auto a = aggregate(constant);
  CHECK(a.mean == 0.25);
  CHECK(a.se == 0.0);

  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0, NAN};
  const auto b = aggregate(xs);
  CHECK(b.mean == doctest::Approx(2.5));
  CHECK(b.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(std::isnan(aggregate(std::vector<double>{}).mean));

  DropMetrics m;
  m.ok = true;
  m.converged = true;
  m.outer_iterations = 3;
  m.u_mue = 0.5;
  m.u_sue = -0.1;
  m.r_mue = 1.0;
  m.r_sue = 2.0;
  m.r_all = 1.8;
  m.p_mue = 1e-3;
  m.p_sue = 5e-4;
  DropMetrics failed;
  failed.outer_iterations = 7;
  const std::vector<DropMetrics> ms{m, m, m, failed};
  const auto row = aggregate_metrics(1.0, ms);
  CHECK(row.u_mue.mean == 0.5);
  CHECK(row.u_mue.se == 0.0);
  CHECK(row.p_sue.mean == 5e-4);
  CHECK(row.drops == 4);
  CHECK(row.drops_ok == 3);
  CHECK(row.convergence_rate == 0.75);
  CHECK(row.mean_outer_iterations == doctest::Approx(4.0));
}

TEST_CASE("paired differences") {
  auto drop = [](double r) {
    DropMetrics m;
    m.ok = true;
    m.r_mue = r;
    return m;
  };
  const std::vector<DropMetrics> a{drop(1.0), drop(10.0), drop(100.0), DropMetrics{}};
  const std::vector<DropMetrics> b{drop(2.0), drop(12.0), drop(103.0), drop(5.0)};
  const auto d = paired_difference(a, b, &DropMetrics::r_mue);
  CHECK(d.mean == doctest::Approx(2.0));
  CHECK(d.se == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK_THROWS(paired_difference(a, std::vector<DropMetrics>(2), &DropMetrics::r_mue));
}

TEST_CASE("profile metrics average over followers") {
  const auto in = testkit::synthetic(3, 3);
  const PowerProfiled p(0.2, Eigen::Vector3d(0.1, 0.5, 0.9));
  const auto m = profile_metrics(p, in.g, in.params);
  double rs = 0.0, us = 0.0;
  for (Index k = 0; k < 3; ++k) {
    rs += rate_sue(k, p, in.g, in.params);
    us += utility_sue(k, p, in.g, in.params);
  }
  CHECK(m.r_sue == doctest::Approx(rs / 3));
  CHECK(m.u_sue == doctest::Approx(us / 3));
  CHECK(m.p_sue == doctest::Approx(0.5));
  CHECK(m.r_all == doctest::Approx((rate_mue(p, in.g, in.params) + rs) / 4));
}

TEST_CASE("sweep files are identical across worker counts") {
  ExperimentConfig c;
  c.sweep.axis = SweepAxis::pt_dbm;
  c.sweep.values = {-10.0, 0.0, 10.0};
  c.sweep.drops = 24;
  const auto d1 = scratch("w1"), d8 = scratch("w8");
  const auto r1 = run_sweep(c, 1, d1.string());
  const auto r8 = run_sweep(c, 8, d8.string());
  REQUIRE(r1.files == r8.files);
  CHECK(r1.files.size() == 9);
  for (const auto& f : r1.files) CHECK(slurp(d1 / f) == slurp(d8 / f));

  const auto header = slurp(d1 / "sg_utility.csv").substr(0, slurp(d1 / "sg_utility.csv").find('\n'));
  CHECK(header == "pt_dbm,u0_mean,u0_stderr,uk_mean,uk_stderr");
  CHECK(slurp(d1 / "ncg_rate.csv").rfind("pt_dbm,r0_mean,r0_stderr,rk_mean,rk_stderr,r_mean,r_stderr\n", 0) == 0);
  CHECK(slurp(d1 / "sg_power.csv").rfind("pt_dbm,p0_mean,p0_stderr,pk_mean,pk_stderr\n", 0) == 0);
  CHECK(slurp(d1 / "sg_convergence.csv").rfind("pt_dbm,convergence_rate,mean_outer_iterations,drops_ok,drops\n", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest["axis"] == "pt_dbm");
  CHECK(manifest["drops"] == 24);
  CHECK(manifest["version"] == code_version());
  CHECK(parse_config(manifest["config"].get<std::string>()) == c);
  fs::remove_all(d1);
  fs::remove_all(d8);
}

TEST_CASE("iteration sweep reads the traces") {
  ExperimentConfig c;
  c.sweep.axis = SweepAxis::iteration;
  c.sweep.values = {1, 2, 3, 10};
  c.sweep.drops = 10;
  c.sweep.schemes = {Scheme::sg};
  const auto res = run_sweep(c, 2);
  REQUIRE(res.schemes.size() == 1);
  const auto& rows = res.schemes[0].rows;
  REQUIRE(rows.size() == 4);
  CHECK(rows.back().convergence_rate == 1.0);
  REQUIRE(res.schemes[0].drops.size() == 4);
  for (const auto& ds : res.schemes[0].drops) CHECK(ds.size() == 10);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].convergence_rate >= rows[i - 1].convergence_rate);
  // Past convergence the iterate is the final profile.
  std::vector<DropMetrics> finals;
  for (std::uint64_t i = 0; i < 10; ++i) finals.push_back(drop_metrics(run_drop(drop_seed(c.scenario.seed, i), c, Scheme::sg), c));
  CHECK(rows.back().u_mue.mean == doctest::Approx(aggregate_metrics(10, finals).u_mue.mean).epsilon(1e-12));
  CHECK(res.files.empty());
}

TEST_CASE("sweep errors") {
  ExperimentConfig c;
  c.sweep.values = {};
  CHECK_THROWS_AS(run_sweep(c), ConfigError);
  c.sweep.values = {0.0, 1.0};
  c.sweep.drops = 1;
  const auto file = fs::temp_directory_path() / "stackpc_test_blocker";
  { std::ofstream(file) << "x"; }
  CHECK_THROWS(run_sweep(c, 1, (file / "sub").string()));
  fs::remove(file);
  CHECK_THROWS_AS(metrics_csv(SweepAxis::k, {}, "bogus"), ConfigError);
}
