#include "stackpc/stackelberg_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stackpc {

namespace {

InnerResultd settle_followers(const ChannelGainsd& g, const GameParamsd& params, double p_mue,
                              const SolveTrace& trace) {
  InnerResultd inner;
  try {
    inner = inner_iteration(p_mue, g, params);
  } catch (const DivergenceError& e) {
    throw SolveError(e.what(), trace);
  }
  if (!inner.converged)
    throw SolveError("inner iteration reached max_inner without converging (spectral radius estimate " +
                         std::to_string(trace.contraction.spectral_radius_estimate) + ")",
                     trace);
  return inner;
}

OuterRecord make_record(int n, double p_mue, const InnerResultd& inner, const ChannelGainsd& g,
                        const GameParamsd& params, const ContractionReportd& report) {
  OuterRecord r;
  r.iteration = n;
  r.p_mue = p_mue;
  r.p_sue = inner.p_fixed;
  const PowerProfiled profile(p_mue, inner.p_fixed);
  r.u_mue = utility_mue(profile, g, params);
  r.u_sue.resize(g.size());
  for (Index k = 0; k < g.size(); ++k) r.u_sue(k) = utility_sue(k, profile, g, params);
  r.inner_iterations = inner.iterations;
  r.row_sum_norm = report.row_sum_norm;
  r.spectral_radius = report.spectral_radius_estimate;
  r.contraction_certified = report.contraction_certified;
  return r;
}

LeaderSolutiond leader_step(const InnerResultd& inner, const ChannelGainsd& g, const GameParamsd& params,
                            const SolveOptions& options) {
  return options.leader_step == LeaderStep::all_regimes ? global_leader_power(inner, g, params)
                                                        : optimal_leader_power(inner, g, params);
}

}  // namespace

OuterStep outer_step(const ChannelGainsd& g, const GameParamsd& params, double p_mue, const SolveOptions& options) {
  OuterStep step;
  step.inner = settle_followers(g, params, p_mue, SolveTrace{});
  step.leader = leader_step(step.inner, g, params, options);
  return step;
}

SolveResult solve(const ChannelGainsd& g, const GameParamsd& params, double p0_init, const SolveOptions& options) {
  g.validate();
  params.validate();
  detail::check_dims(g.size(), g, params);
  detail::require(p0_init >= 0.0 && p0_init <= params.p_max, "solve: initial leader power must lie in [0, p_max]");

  SolveTrace trace;
  trace.contraction = build_w_matrix(g);

  double p0 = p0_init;
  RegimeIndicators frozen;
  for (int n = 1; n <= params.max_outer; ++n) {
    const InnerResultd inner = settle_followers(g, params, p0, trace);
    if (!trace.outer.empty())
      trace.outer.back().regime_mismatch = regime_indicators(inner.p_raw, params.p_max) != frozen;

    const LeaderSolutiond leader = leader_step(inner, g, params, options);
    frozen = leader.regimes;

    OuterRecord record = make_record(n, p0, inner, g, params, trace.contraction);
    record.p_mue_next = leader.p_opt;
    record.empty_interval_fallback = leader.empty_interval_fallback;
    record.no_valid_candidate = leader.no_valid_candidate;
    record.discarded_candidates = leader.discarded_candidates;
    trace.outer.push_back(std::move(record));
    trace.outer_iterations = n;

    const double step = std::abs(leader.p_opt - p0);
    p0 = leader.p_opt;
    // Without followers the leader step is exact.
    if (g.size() == 0 || step < params.tol_outer) {
      trace.converged = true;
      break;
    }
  }

  const InnerResultd last = settle_followers(g, params, p0, trace);
  if (!trace.outer.empty())
    trace.outer.back().regime_mismatch = regime_indicators(last.p_raw, params.p_max) != frozen;
  return {PowerProfiled(p0, last.p_fixed), std::move(trace)};
}

SolveResult solve(const ChannelGainsd& g, const GameParamsd& params) { return solve(g, params, params.p_max / 2.0); }

double follower_deviation_gain(Index k, const PowerProfiled& profile, const ChannelGainsd& g,
                               const GameParamsd& params, int grid_points) {
  detail::require(grid_points >= 2, "verify: grid needs at least two points");
  const double interference = sue_interference(k, profile.p_mue, profile.p_sue, g, params.noise);
  const double h = g.h_ss_direct(k);
  const double price = params.lambda_sue(k);
  auto u = [&](double p) { return std::log1p(h * p / interference) - price * p; };
  const double base = u(profile.p_sue(k));
  double best = base;
  for (int i = 0; i < grid_points; ++i) {
    const double p = params.p_max * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    best = std::max(best, u(p));
  }
  return best - base;
}

EquilibriumCertificate verify_equilibrium(const PowerProfiled& profile, const ChannelGainsd& g,
                                          const GameParamsd& params, const VerifyOptions& options) {
  detail::check_dims(profile.size(), g, params);
  detail::require(profile.is_feasible(params.p_max), "verify: profile must be feasible");
  detail::require(options.leader_grid >= 2, "verify: grid needs at least two points");

  EquilibriumCertificate cert;
  for (Index k = 0; k < g.size(); ++k)
    cert.follower_gap = std::max(cert.follower_gap, follower_deviation_gain(k, profile, g, params, options.follower_grid));

  const double base = utility_mue(profile, g, params);
  double best = base;
  auto try_leader = [&](double p0) {
    try {
      const InnerResultd inner = inner_iteration(p0, g, params);
      if (!inner.converged) {
        ++cert.skipped_leader_points;
        return;
      }
      best = std::max(best, utility_mue(PowerProfiled(p0, inner.p_fixed), g, params));
    } catch (const DivergenceError&) {
      ++cert.skipped_leader_points;
    }
  };
  for (int i = 0; i < options.leader_grid; ++i)
    try_leader(params.p_max * static_cast<double>(i) / static_cast<double>(options.leader_grid - 1));
  cert.leader_gap = best - base;

  cert.is_ne = cert.follower_gap < options.tol;
  cert.is_se = cert.is_ne && cert.leader_gap < options.tol;
  return cert;
}

}  // namespace stackpc
