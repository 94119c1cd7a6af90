#include "stackpc/baseline_ncg.hpp"

#include <algorithm>
#include <cmath>

#include "stackpc/follower_dynamics.hpp"

namespace stackpc {

double ncg_mue_response(const Eigen::VectorXd& p_sue, const ChannelGainsd& g, const GameParamsd& params) {
  if (params.lambda_mue == 0.0) return params.p_max;
  const double raw = best_response_from_interference(g.h_mm, mue_interference(p_sue, g, params.noise),
                                                     params.lambda_mue);
  return clip_power(raw, params.p_max);
}

double ncg_sue_response(Index k, double p_mue, const Eigen::VectorXd& p_sue, const ChannelGainsd& g,
                        const GameParamsd& params) {
  const double raw = best_response_from_interference(
      g.h_ss_direct(k), sue_interference(k, p_mue, p_sue, g, params.noise), params.lambda_sue(k));
  return clip_power(raw, params.p_max);
}

SolveResult ncg_solve(const ChannelGainsd& g, const GameParamsd& params, const PowerProfiled& init) {
  g.validate();
  params.validate();
  detail::check_dims(init.size(), g, params);
  detail::require(init.is_feasible(params.p_max), "ncg: initial profile must be feasible");

  SolveTrace trace;
  trace.contraction = build_w_matrix(g);

  PowerProfiled p = init;
  for (int n = 1; n <= params.max_inner; ++n) {
    PowerProfiled next(ncg_mue_response(p.p_sue, g, params), Eigen::VectorXd(g.size()));
    for (Index k = 0; k < g.size(); ++k) next.p_sue(k) = ncg_sue_response(k, p.p_mue, p.p_sue, g, params);

    bool finite = std::isfinite(next.p_mue);
    for (Index k = 0; k < g.size(); ++k) finite = finite && std::isfinite(next.p_sue(k));
    if (!finite) throw SolveError("ncg iteration produced non-finite powers at iteration " + std::to_string(n), trace);

    double delta = std::abs(next.p_mue - p.p_mue);
    if (g.size() > 0) delta = std::max(delta, (next.p_sue - p.p_sue).cwiseAbs().maxCoeff());
    p = std::move(next);

    OuterRecord r;
    r.iteration = n;
    r.p_mue = p.p_mue;
    r.p_sue = p.p_sue;
    r.u_mue = utility_mue(p, g, params);
    r.u_sue.resize(g.size());
    for (Index k = 0; k < g.size(); ++k) r.u_sue(k) = utility_sue(k, p, g, params);
    r.row_sum_norm = trace.contraction.row_sum_norm;
    r.spectral_radius = trace.contraction.spectral_radius_estimate;
    r.contraction_certified = trace.contraction.contraction_certified;
    r.p_mue_next = p.p_mue;
    trace.outer.push_back(std::move(r));
    trace.outer_iterations = n;

    if (delta < params.tol_inner) {
      trace.converged = true;
      break;
    }
  }
  return {std::move(p), std::move(trace)};
}

SolveResult ncg_solve(const ChannelGainsd& g, const GameParamsd& params) {
  return ncg_solve(g, params, PowerProfiled(0.0, Eigen::VectorXd::Zero(g.size())));
}

}  // namespace stackpc
