#pragma once

// Two-layer leader/follower iteration and equilibrium verification.

#include <stdexcept>
#include <string>
#include <vector>

#include "stackpc/core_model.hpp"
#include "stackpc/follower_dynamics.hpp"
#include "stackpc/leader_solver.hpp"

namespace stackpc {

/// State of one outer iteration n: the leader power P0(n), the followers'
/// response to it, and what the leader chose next.
struct OuterRecord {
  int iteration = 0;
  double p_mue = 0.0;
  Eigen::VectorXd p_sue;
  double u_mue = 0.0;
  Eigen::VectorXd u_sue;
  int inner_iterations = 0;
  double row_sum_norm = 0.0;
  double spectral_radius = 0.0;
  bool contraction_certified = true;
  double p_mue_next = 0.0;
  bool empty_interval_fallback = false;
  bool regime_mismatch = false;  ///< regimes at P0(n+1) differ from the ones frozen at step n
  bool no_valid_candidate = false;
  int discarded_candidates = 0;
};

struct SolveTrace {
  std::vector<OuterRecord> outer;
  bool converged = false;
  int outer_iterations = 0;
  ContractionReportd contraction;
};

struct SolveResult {
  PowerProfiled profile;
  SolveTrace trace;
};

/// A solve that could not produce an equilibrium; carries the partial trace.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, SolveTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
  const SolveTrace& trace() const { return trace_; }

 private:
  SolveTrace trace_;
};

/// How the leader steps inside the outer iteration.
enum class LeaderStep {
  /// Closed form over the interval that keeps the current regimes.
  current_regime,
  /// Closed form on every regime segment of [0, P_T]; best segment wins.
  all_regimes,
};

struct SolveOptions {
  LeaderStep leader_step = LeaderStep::all_regimes;
};

struct OuterStep {
  InnerResultd inner;
  LeaderSolutiond leader;
};

/// One pass of the two-layer scheme at leader power `p_mue`: followers
/// settle, then the leader best-responds.
OuterStep outer_step(const ChannelGainsd& g, const GameParamsd& params, double p_mue,
                     const SolveOptions& options = {});

/// Alternates follower settling and leader steps until the leader power moves
/// less than params.tol_outer or params.max_outer steps have run. The
/// returned profile is the leader's last power with the followers' response.
/// Throws SolveError (with the trace so far) if an inner iteration diverges
/// or hits its cap.
SolveResult solve(const ChannelGainsd& g, const GameParamsd& params, double p0_init,
                  const SolveOptions& options = {});
SolveResult solve(const ChannelGainsd& g, const GameParamsd& params);

struct VerifyOptions {
  int follower_grid = 10000;
  int leader_grid = 200;
  double tol = 1e-6;
};

struct EquilibriumCertificate {
  double follower_gap = 0.0;
  double leader_gap = 0.0;
  bool is_ne = false;
  bool is_se = false;
  int skipped_leader_points = 0;  ///< leader grid points whose inner iteration failed
};

/// Best unilateral improvements found on uniform grids over [0, P_T]; the
/// current strategy is always among the alternatives, so gaps are >= 0.
/// Followers deviate with everyone else fixed; the leader's alternatives
/// are re-equilibrated through the inner iteration.
EquilibriumCertificate verify_equilibrium(const PowerProfiled& profile, const ChannelGainsd& g,
                                          const GameParamsd& params, const VerifyOptions& options = {});

/// Largest gain follower k can get by moving alone, on an n-point grid.
double follower_deviation_gain(Index k, const PowerProfiled& profile, const ChannelGainsd& g,
                               const GameParamsd& params, int grid_points);

}  // namespace stackpc
