#pragma once

// Non-cooperative baseline: the macro user and every small-cell user play
// simultaneous clipped best responses, with no leader.

#include "stackpc/core_model.hpp"
#include "stackpc/stackelberg_engine.hpp"

namespace stackpc {

/// Clipped best response of the macro user to fixed small-cell powers.
/// A zero price makes utility increasing in power, so the answer is P_T.
double ncg_mue_response(const Eigen::VectorXd& p_sue, const ChannelGainsd& g, const GameParamsd& params);

/// Clipped best response of small-cell user k.
double ncg_sue_response(Index k, double p_mue, const Eigen::VectorXd& p_sue, const ChannelGainsd& g,
                        const GameParamsd& params);

/// Projected Jacobi best-response dynamics from `init`. Stops when the
/// joint update is below params.tol_inner or after params.max_inner sweeps;
/// each sweep adds one record to the trace. Throws SolveError if an
/// iterate becomes non-finite.
SolveResult ncg_solve(const ChannelGainsd& g, const GameParamsd& params, const PowerProfiled& init);
SolveResult ncg_solve(const ChannelGainsd& g, const GameParamsd& params);

}  // namespace stackpc
