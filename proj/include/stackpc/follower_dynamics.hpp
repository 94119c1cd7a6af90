#pragma once

// Small-cell user best responses, the Jacobi inner iteration, and the
// contraction diagnostics of the co-tier interference ratio matrix W.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stackpc/core_model.hpp"

namespace stackpc {

template <typename Scalar>
struct ContractionReport {
  Matrix<Scalar> w_matrix;            ///< W(k, j) = H_kj / H_kk off-diagonal, 0 on the diagonal
  Scalar row_sum_norm{0};             ///< ||W||_inf
  Scalar spectral_radius_estimate{0};
  bool contraction_certified = true;  ///< spectral_radius_estimate < 1
};

using ContractionReportd = ContractionReport<double>;

/// The unclipped affine iteration produced non-finite powers.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, ContractionReportd report)
      : std::runtime_error("inner iteration diverged at iteration " + std::to_string(iteration) +
                           " (spectral radius estimate " +
                           std::to_string(report.spectral_radius_estimate) + ")"),
        iteration_(iteration),
        report_(std::move(report)) {}

  int iteration() const { return iteration_; }
  const ContractionReportd& report() const { return report_; }

 private:
  int iteration_;
  ContractionReportd report_;
};

template <typename Scalar>
struct InnerResult {
  Vector<Scalar> p_fixed;  ///< clipped powers, entries in [0, p_max]
  Vector<Scalar> p_raw;    ///< unclipped fixed point of the affine map
  int iterations = 0;      ///< updates before the iterate stopped moving
  bool converged = false;
  Scalar residual{0};      ///< final ||p(m+1) - p(m)||_inf
  std::vector<Scalar> update_norms;  ///< ||p(m+1) - p(m)||_inf for every sweep
};

using InnerResultd = InnerResult<double>;

/// Unconstrained maximizer of ln(1 + g P / I) - price P, i.e. 1/price - I/g.
/// Shared by the follower update and the non-cooperative macro user update.
template <typename Scalar>
Scalar best_response_from_interference(Scalar direct_gain, Scalar interference, Scalar price) {
  if (!(price > Scalar(0))) throw ContractViolation("unbounded best response: price must be positive");
  return Scalar(1) / price - interference / direct_gain;
}

/// Stationary point of U_k in P_k with everyone else fixed. Entry k of
/// `p_other` is ignored. May be negative or exceed p_max.
template <typename Scalar>
Scalar best_response_raw(Index k, const Vector<Scalar>& p_other, Scalar p_mue,
                         const ChannelGains<Scalar>& g, const GameParams<Scalar>& params) {
  detail::require(k >= 0 && k < g.size(), "small-cell user index out of range");
  detail::require(p_other.size() == g.size(), "dimension mismatch between power vector and gains");
  detail::require(params.lambda_sue.size() == g.size(), "dimension mismatch between params and gains");
  return best_response_from_interference(g.h_ss_direct(k),
                                         sue_interference(k, p_mue, p_other, g, params.noise),
                                         params.lambda_sue(k));
}

/// P_T - [P_T - (p_raw)^+]^+, i.e. the projection onto [0, P_T]. Written as
/// a clamp: the nested form rounds interior values (P_T - (P_T - x) != x).
template <typename Scalar>
Scalar clip_power(Scalar p_raw, Scalar p_max) {
  using std::max;
  using std::min;
  return min(max(p_raw, Scalar(0)), p_max);
}

template <typename Scalar>
Scalar clip_power(Scalar p_raw, const GameParams<Scalar>& params) {
  return clip_power(p_raw, params.p_max);
}

template <typename Scalar>
Vector<Scalar> clip_powers(const Vector<Scalar>& p_raw, Scalar p_max) {
  Vector<Scalar> out(p_raw.size());
  for (Index i = 0; i < p_raw.size(); ++i) out(i) = clip_power(p_raw(i), p_max);
  return out;
}

/// Spectral radius of a nonnegative matrix by power iteration on I + W.
/// The shift makes the Perron root the unique dominant eigenvalue, so the
/// iteration also settles for periodic W (e.g. K = 2).
template <typename Scalar>
Scalar nonnegative_spectral_radius(const Matrix<Scalar>& w, int max_steps = 200, Scalar rel_tol = Scalar(1e-12)) {
  using std::abs;
  const Index n = w.rows();
  if (n == 0) return Scalar(0);
  Vector<Scalar> x = Vector<Scalar>::Ones(n);
  Scalar estimate(0);
  for (int step = 0; step < max_steps; ++step) {
    Vector<Scalar> y = x + w * x;
    const Scalar norm = y.cwiseAbs().maxCoeff();
    if (!(norm > Scalar(0))) return Scalar(0);
    const Scalar next = norm / x.cwiseAbs().maxCoeff() - Scalar(1);
    x = y / norm;
    const bool settled = step > 0 && abs(next - estimate) <= rel_tol * (abs(next) + Scalar(1e-300));
    estimate = next;
    if (settled) break;
  }
  using std::max;
  return max(estimate, Scalar(0));
}

template <typename Scalar>
ContractionReport<Scalar> build_w_matrix(const ChannelGains<Scalar>& g) {
  const Index k = g.size();
  ContractionReport<Scalar> report;
  report.w_matrix = Matrix<Scalar>::Zero(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (i != j) report.w_matrix(i, j) = g.h_ss_cross(i, j) / g.h_ss_direct(i);
  report.row_sum_norm = k == 0 ? Scalar(0) : report.w_matrix.rowwise().sum().maxCoeff();
  report.spectral_radius_estimate = nonnegative_spectral_radius(report.w_matrix);
  report.contraction_certified = report.spectral_radius_estimate < Scalar(1);
  return report;
}

template <typename Scalar>
ContractionReportd to_double(const ContractionReport<Scalar>& r) {
  ContractionReportd out;
  out.w_matrix = r.w_matrix.template cast<double>();
  out.row_sum_norm = static_cast<double>(r.row_sum_norm);
  out.spectral_radius_estimate = static_cast<double>(r.spectral_radius_estimate);
  out.contraction_certified = r.contraction_certified;
  return out;
}

/// One Jacobi sweep of the unclipped best-response map: every follower reads
/// the same previous iterate.
template <typename Scalar>
Vector<Scalar> jacobi_sweep(Scalar p_mue, const Vector<Scalar>& p, const ChannelGains<Scalar>& g,
                            const GameParams<Scalar>& params) {
  Vector<Scalar> next(p.size());
  for (Index k = 0; k < p.size(); ++k) next(k) = best_response_raw(k, p, p_mue, g, params);
  return next;
}

/// Followers' inner iteration for a fixed leader power.
///
/// Iterates the unclipped affine best-response map from `p_init` until the
/// update size drops below params.tol_inner or params.max_inner sweeps have
/// run, then clips. `iterations` counts the updates needed to reach the
/// returned iterate; the final confirming sweep is not counted.
/// Throws DivergenceError when the iterate stops being finite.
template <typename Scalar>
InnerResult<Scalar> inner_iteration(Scalar p_mue, const Vector<Scalar>& p_init, const ChannelGains<Scalar>& g,
                                    const GameParams<Scalar>& params) {
  detail::check_dims(p_init.size(), g, params);
  for (Index i = 0; i < p_init.size(); ++i)
    detail::require(detail::finite(p_init(i)), "inner iteration: initial powers must be finite");
  detail::require(params.max_inner > 0 && params.tol_inner > Scalar(0),
                  "inner iteration: caps and tolerances must be positive");

  InnerResult<Scalar> result;
  Vector<Scalar> p = p_init;
  result.iterations = params.max_inner;
  for (int sweep = 1; sweep <= params.max_inner; ++sweep) {
    Vector<Scalar> next = jacobi_sweep(p_mue, p, g, params);
    for (Index i = 0; i < next.size(); ++i)
      if (!detail::finite(next(i))) throw DivergenceError(sweep, to_double(build_w_matrix(g)));
    const Scalar delta = next.size() == 0 ? Scalar(0) : (next - p).cwiseAbs().maxCoeff();
    result.update_norms.push_back(delta);
    p = std::move(next);
    result.residual = delta;
    if (delta < params.tol_inner) {
      result.converged = true;
      result.iterations = sweep - 1;
      break;
    }
  }
  result.p_raw = p;
  result.p_fixed = clip_powers(p, params.p_max);
  return result;
}

template <typename Scalar>
InnerResult<Scalar> inner_iteration(Scalar p_mue, const ChannelGains<Scalar>& g, const GameParams<Scalar>& params) {
  return inner_iteration(p_mue, Vector<Scalar>::Zero(g.size()).eval(), g, params);
}

}  // namespace stackpc
