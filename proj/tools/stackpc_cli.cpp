// stackpc: run, sweep, verify and inspect small-cell power-control drops.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stackpc/baseline_ncg.hpp"
#include "stackpc/config.hpp"
#include "stackpc/experiment.hpp"
#include "stackpc/scenario.hpp"
#include "stackpc/stackelberg_engine.hpp"

using namespace stackpc;
using nlohmann::ordered_json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string config_path;
};

ExperimentConfig resolve_config(const Globals& g) {
  ExperimentConfig c = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  if (g.seed) c.scenario.seed = *g.seed;
  return c;
}

ordered_json vec_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

ordered_json report_json(const ContractionReportd& r) {
  ordered_json w = ordered_json::array();
  for (Eigen::Index i = 0; i < r.w_matrix.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < r.w_matrix.cols(); ++j) row.push_back(r.w_matrix(i, j));
    w.push_back(row);
  }
  return {{"w_matrix", w},
          {"row_sum_norm", r.row_sum_norm},
          {"spectral_radius_estimate", r.spectral_radius_estimate},
          {"contraction_certified", r.contraction_certified}};
}

ordered_json drop_json(const DropRecord& d) {
  ordered_json j;
  j["seed"] = d.seed;
  j["scheme"] = to_string(d.scheme);
  j["k"] = d.k;
  j["scenario_hash"] = d.scenario_hash;
  j["ok"] = d.ok;
  j["converged"] = d.converged;
  j["outer_iterations"] = d.outer_iterations;
  if (!d.ok) {
    j["error"] = d.error;
    return j;
  }
  j["p_mue"] = d.profile.p_mue;
  j["p_sue"] = vec_json(d.profile.p_sue);
  j["u_mue"] = d.u_mue;
  j["u_sue"] = vec_json(d.u_sue);
  j["r_mue"] = d.r_mue;
  j["r_sue"] = vec_json(d.r_sue);
  j["spectral_radius_estimate"] = d.contraction.spectral_radius_estimate;
  return j;
}

struct FailureKind {
  const char* kind;
  std::string message;
};

int fail(const FailureKind& f) {
  ordered_json err{{"error", f.kind}, {"message", f.message}};
  std::cerr << err.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg uplink power control for two-tier small-cell networks"};
  app.require_subcommand(1);

  Globals globals;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Scenario seed (overrides the config)");
  app.add_option("--out-dir", globals.out_dir, "Output directory for sweep CSVs and saved records");
  app.add_option("--config", globals.config_path, "Experiment config file");

  auto* run_cmd = app.add_subcommand("run", "Solve a single drop and print its record");
  std::string run_scheme = "sg";
  std::string save_path;
  run_cmd->add_option("--scheme", run_scheme, "sg or ncg")->check(CLI::IsMember({"sg", "ncg"}));
  run_cmd->add_option("--save", save_path, "Also write the record as JSON to this file");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the sweep described by --config and write CSVs");
  int workers = 1;
  sweep_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* verify_cmd = app.add_subcommand("verify", "Re-check the equilibrium certificate of a solved drop");
  std::string record_path;
  VerifyOptions vopts;
  verify_cmd->add_option("--record", record_path, "Record written by 'run --save' (re-solves when omitted)");
  verify_cmd->add_option("--follower-grid", vopts.follower_grid, "Follower deviation grid points");
  verify_cmd->add_option("--leader-grid", vopts.leader_grid, "Leader deviation grid points");
  verify_cmd->add_option("--tol", vopts.tol, "Gap tolerance");

  auto* contract_cmd = app.add_subcommand("contract", "Print the contraction report of a scenario");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) globals.seed = seed_value;

  try {
    ExperimentConfig config = resolve_config(globals);

    if (run_cmd->parsed()) {
      const DropRecord d = run_drop(config.scenario.seed, config, parse_scheme(run_scheme));
      const ordered_json j = drop_json(d);
      std::cout << j.dump(2) << std::endl;
      if (!save_path.empty()) {
        std::ofstream out(save_path);
        if (!out) return fail({"io", "cannot write '" + save_path + "'"});
        out << j.dump(2) << '\n';
      }
      std::cout << "summary: scheme=" << run_scheme << " ok=" << d.ok << " converged=" << d.converged
                << " outer_iterations=" << d.outer_iterations << std::endl;
      return d.ok ? 0 : fail({"solver", d.error});
    }

    if (sweep_cmd->parsed()) {
      if (globals.config_path.empty()) return fail({"usage", "sweep requires --config"});
      const std::string out_dir = globals.out_dir.empty() ? config.sweep.output : globals.out_dir;
      const SweepResult res = run_sweep(config, workers, out_dir);
      for (const auto& f : res.files) std::cout << "wrote " << out_dir << "/" << f << std::endl;
      std::cout << "summary: axis=" << to_string(config.sweep.axis) << " points=" << config.sweep.values.size()
                << " drops=" << config.sweep.drops << " files=" << res.files.size() << std::endl;
      return 0;
    }

    const Scenario s = generate(config.scenario.seed, config.scenario.k, make_radii(config), make_policy(config));
    const ChannelGainsd g = gains_from_scenario(s, config.pathloss);
    const GameParamsd params = make_params(config);

    if (verify_cmd->parsed()) {
      PowerProfiled profile;
      if (!record_path.empty()) {
        std::ifstream in(record_path);
        if (!in) return fail({"io", "cannot read '" + record_path + "'"});
        const auto rec = nlohmann::json::parse(in);
        if (rec.value("seed", config.scenario.seed) != config.scenario.seed)
          return fail({"usage", "record seed differs from the configured seed; pass --seed"});
        if (!rec.value("ok", false)) return fail({"usage", "record holds no solved profile"});
        const auto p = rec.at("p_sue").get<std::vector<double>>();
        profile = PowerProfiled(rec.at("p_mue").get<double>(), Eigen::Map<const Eigen::VectorXd>(p.data(), p.size()));
      } else {
        profile = solve(g, params, config.solver.p0_init_fraction * params.p_max).profile;
      }
      const EquilibriumCertificate cert = verify_equilibrium(profile, g, params, vopts);
      ordered_json j{{"seed", config.scenario.seed},
                     {"follower_gap", cert.follower_gap},
                     {"leader_gap", cert.leader_gap},
                     {"is_ne", cert.is_ne},
                     {"is_se", cert.is_se},
                     {"skipped_leader_points", cert.skipped_leader_points}};
      std::cout << j.dump(2) << std::endl;
      std::cout << "summary: is_ne=" << cert.is_ne << " is_se=" << cert.is_se << std::endl;
      return 0;
    }

    if (contract_cmd->parsed()) {
      const ContractionReportd r = build_w_matrix(g);
      ordered_json j = report_json(r);
      j["seed"] = config.scenario.seed;
      j["separation_satisfied"] = s.separation_satisfied;
      std::cout << j.dump(2) << std::endl;
      std::cout << "summary: certified=" << r.contraction_certified << std::endl;
      return 0;
    }
  } catch (const ConfigError& e) {
    return fail({"config", e.what()});
  } catch (const ContractViolation& e) {
    return fail({"contract", e.what()});
  } catch (const SolveError& e) {
    return fail({"solver", e.what()});
  } catch (const std::exception& e) {
    return fail({"internal", e.what()});
  }
  return 0;
}
