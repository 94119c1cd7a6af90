#pragma once

// Monte Carlo drops, parameter sweeps and their CSV/manifest output.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stackpc/config.hpp"
#include "stackpc/stackelberg_engine.hpp"

namespace stackpc {

/// Seed of drop `index` in a sweep. Independent of axis value and scheme,
/// so compared configurations see the same geometry.
std::uint64_t drop_seed(std::uint64_t base_seed, std::uint64_t index);

struct DropRecord {
  std::uint64_t seed = 0;
  std::uint64_t scenario_hash = 0;
  Scheme scheme = Scheme::sg;
  Index k = 0;
  bool ok = false;  ///< the solver produced a profile
  bool converged = false;
  int outer_iterations = 0;
  PowerProfiled profile;
  double u_mue = 0.0;
  double r_mue = 0.0;
  Eigen::VectorXd u_sue;
  Eigen::VectorXd r_sue;
  ContractionReportd contraction;
  SolveTrace trace;
  std::string error;
};

/// Scenario -> gains -> solve for one seed. Solver failures are recorded in
/// `error` with ok = false rather than thrown.
DropRecord run_drop(std::uint64_t seed, const ExperimentConfig& config, Scheme scheme);

/// Per-drop scalars that enter the sweep averages. Averages over small-cell
/// users are NaN when K = 0.
struct DropMetrics {
  bool ok = false;
  bool converged = false;
  int outer_iterations = 0;
  double u_mue = 0.0, u_sue = 0.0;
  double r_mue = 0.0, r_sue = 0.0, r_all = 0.0;
  double p_mue = 0.0, p_sue = 0.0;
};

DropMetrics profile_metrics(const PowerProfiled& profile, const ChannelGainsd& g, const GameParamsd& params);

/// Metrics of the final profile, or of the state after outer iteration
/// `iteration` (1-based; later iterations repeat the final state).
DropMetrics drop_metrics(const DropRecord& drop, const ExperimentConfig& config,
                         std::optional<int> iteration = std::nullopt);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;  ///< sample standard deviation / sqrt(n); NaN-free inputs only
};

/// Mean and standard error of the finite entries; NaN mean when none.
MeanStderr aggregate(std::span<const double> values);

struct MetricsRow {
  double axis_value = 0.0;
  MeanStderr u_mue, u_sue, r_mue, r_sue, r_all, p_mue, p_sue;
  double convergence_rate = 0.0;
  double mean_outer_iterations = 0.0;
  int drops = 0;
  int drops_ok = 0;
};

MetricsRow aggregate_metrics(double axis_value, std::span<const DropMetrics> drops);

struct SchemeRows {
  Scheme scheme = Scheme::sg;
  std::vector<MetricsRow> rows;
  std::vector<std::vector<DropMetrics>> drops;  ///< drops[v][i]: drop i at axis value v
};

/// Mean and standard error of the per-drop differences b - a of `field`
/// over drops where both sides produced a profile. Paired through common
/// random numbers, so this is the comparison to use between axis values.
MeanStderr paired_difference(std::span<const DropMetrics> a, std::span<const DropMetrics> b,
                             double DropMetrics::*field);

struct SweepResult {
  std::vector<SchemeRows> schemes;
  std::vector<std::string> files;  ///< written paths, relative to the output directory
};

/// Runs every (axis value, scheme, drop) combination on `workers` threads.
/// Drop i uses drop_seed(config.scenario.seed, i) everywhere. Writes CSVs
/// and manifest.json into `out_dir` when it is non-empty.
SweepResult run_sweep(const ExperimentConfig& config, int workers = 1, const std::string& out_dir = "");

/// CSV text for one metric family: "utility", "rate", "power" or "convergence".
std::string metrics_csv(SweepAxis axis, const std::vector<MetricsRow>& rows, const std::string& family);

const char* code_version();

}  // namespace stackpc
