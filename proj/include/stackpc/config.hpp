#pragma once

// Experiment configuration and its line-oriented text format.
//
//   # comment            ; comment
//   [section]
//   key = value
//   key = v1, v2, v3
//
// Sections and keys are listed in docs/config.md. serialize_config() writes
// the canonical form: every section and key in a fixed order, numbers in
// shortest round-trip notation, prices in 1/W.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackpc/core_model.hpp"
#include "stackpc/scenario.hpp"

namespace stackpc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepAxis { pt_dbm, lambda, k, iteration };
enum class Scheme { sg, ncg };

const char* to_string(SweepAxis axis);
const char* to_string(Scheme scheme);
SweepAxis parse_axis(const std::string& name);
Scheme parse_scheme(const std::string& name);

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Index k = 4;
  double macro_radius_m = 1000.0;
  double small_radius_m = 100.0;
  int max_placement_tries = 10000;
  double separation_factor = 2.0;
  bool operator==(const ScenarioConfig&) const = default;
};

struct GameConfig {
  double lambda_mue = 1e3;  ///< 1/W
  double lambda_sue = 1e3;  ///< 1/W, shared by every small-cell user
  double pt_dbm = 0.0;
  double noise_density_dbm_hz = -174.0;
  double bandwidth_hz = 10e6;
  bool operator==(const GameConfig&) const = default;
};

struct SolverConfig {
  double tol_inner = 1e-12;
  double tol_outer = 1e-12;
  int max_inner = 10000;
  int max_outer = 500;
  double p0_init_fraction = 0.5;  ///< initial leader power as a fraction of P_T
  bool operator==(const SolverConfig&) const = default;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::pt_dbm;
  std::vector<double> values;  ///< strictly increasing; prices in 1/W for the lambda axis
  int drops = 200;
  std::vector<Scheme> schemes{Scheme::sg, Scheme::ncg};
  std::string output = "out";

  /// Throws ConfigError unless the spec can be run.
  void validate() const;
  bool operator==(const SweepSpec&) const = default;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  PathLossModel pathloss;
  GameConfig game;
  SolverConfig solver;
  SweepSpec sweep;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

GameParamsd make_params(const ExperimentConfig& config);
CellRadii make_radii(const ExperimentConfig& config);
PlacementPolicy make_policy(const ExperimentConfig& config);

/// Copy of `config` with the sweep axis set to `value`.
ExperimentConfig at_axis_value(const ExperimentConfig& config, SweepAxis axis, double value);

}  // namespace stackpc
