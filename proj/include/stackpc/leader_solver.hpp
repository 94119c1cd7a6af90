#pragma once

// The macro user's best power given the followers' responses.
//
// Followers are classified as silent, interior or capped at the current
// inner fixed point. Holding that classification, the interior followers
// respond affinely to P0, the interference at the macro BS becomes A - B*P0,
// and the leader maximizes ln(1 + H00 P0 / (A - B P0)) - lambda0 P0 over the
// range of P0 that keeps the classification. Stationary points are roots of
// C1 P0^2 + C2 P0 + C3.
//
// global_leader_power() lifts the same rule to all of [0, P_T]: the
// followers' regime edges cut it into segments, each solved in closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "stackpc/core_model.hpp"
#include "stackpc/follower_dynamics.hpp"

namespace stackpc {

struct RegimeIndicators {
  std::vector<std::uint8_t> eps;        ///< 1 iff P_k^tmp > 0
  std::vector<std::uint8_t> eps_prime;  ///< 1 iff P_T - (P_k^tmp)^+ > 0

  std::size_t size() const { return eps.size(); }
  bool interior(std::size_t k) const { return eps[k] && eps_prime[k]; }
  bool capped(std::size_t k) const { return !eps_prime[k]; }
  bool silent(std::size_t k) const { return !eps[k]; }
  bool operator==(const RegimeIndicators&) const = default;
};

template <typename Scalar>
struct FeasibleInterval {
  Scalar lo{0};
  Scalar hi{0};
  bool empty() const { return lo > hi; }
  bool contains(Scalar x) const { return x >= lo && x <= hi; }
};

template <typename Scalar>
struct EffectiveCoefficients {
  Scalar a{0};  ///< W
  Scalar b{0};  ///< dimensionless
};

template <typename Scalar>
struct LeaderQuadratic {
  Scalar c1{0}, c2{0}, c3{0};
  std::vector<Scalar> roots;  ///< real roots, ascending
};

enum class CandidateKind { lower_end, upper_end, stationary };

template <typename Scalar>
struct LeaderCandidate {
  Scalar power{0};
  Scalar utility{0};
  CandidateKind kind = CandidateKind::lower_end;
  bool valid = true;  ///< false when A - B*power <= 0
};

template <typename Scalar>
struct LeaderSolution {
  Scalar p_opt{0};
  FeasibleInterval<Scalar> interval;
  Scalar coeff_a{0};
  Scalar coeff_b{0};
  std::vector<LeaderCandidate<Scalar>> candidates;
  LeaderQuadratic<Scalar> quadratic;
  RegimeIndicators regimes;
  bool empty_interval_fallback = false;
  bool no_valid_candidate = false;
  int discarded_candidates = 0;
};

using FeasibleIntervald = FeasibleInterval<double>;
using LeaderSolutiond = LeaderSolution<double>;

template <typename Scalar>
RegimeIndicators regime_indicators(const Vector<Scalar>& p_raw, Scalar p_max) {
  using std::max;
  RegimeIndicators r;
  r.eps.resize(static_cast<std::size_t>(p_raw.size()));
  r.eps_prime.resize(static_cast<std::size_t>(p_raw.size()));
  for (Index k = 0; k < p_raw.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    r.eps[i] = p_raw(k) > Scalar(0) ? 1 : 0;
    r.eps_prime[i] = p_max - max(p_raw(k), Scalar(0)) > Scalar(0) ? 1 : 0;
  }
  return r;
}

template <typename Scalar>
RegimeIndicators regime_indicators(const Vector<Scalar>& p_raw, const GameParams<Scalar>& params) {
  return regime_indicators(p_raw, params.p_max);
}

/// Range of leader powers that keeps every follower in its current regime,
/// with co-tier interference evaluated at the frozen clipped powers
/// `p_fixed`. Followers the leader does not reach (H_k0 = 0) impose nothing.
/// An empty result (lo > hi) is returned as is; callers decide what to do.
template <typename Scalar>
FeasibleInterval<Scalar> feasible_interval(const Vector<Scalar>& p_fixed, const RegimeIndicators& regimes,
                                           const ChannelGains<Scalar>& g, const GameParams<Scalar>& params) {
  using std::max;
  using std::min;
  detail::check_dims(p_fixed.size(), g, params);
  detail::require(regimes.size() == static_cast<std::size_t>(g.size()), "regime indicators: wrong length");

  const Scalar p_max = params.p_max;
  FeasibleInterval<Scalar> out{Scalar(0), p_max};
  for (Index k = 0; k < g.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Scalar h_k0 = g.h_sbs_from_mue(k);
    if (!(h_k0 > Scalar(0))) continue;
    const Scalar h_kk = g.h_ss_direct(k);
    const Scalar inv_lambda = Scalar(1) / params.lambda_sue(k);
    const Scalar base = params.noise + co_tier_interference(k, p_fixed, g);
    // P0 below which the follower saturates at P_T, and above which it goes silent.
    const Scalar cap_edge = ((inv_lambda - p_max) * h_kk - base) / h_k0;
    const Scalar silence_edge = (inv_lambda * h_kk - base) / h_k0;

    Scalar lo_k, hi_k;
    if (regimes.capped(i)) {
      lo_k = Scalar(0);
      hi_k = min(p_max, cap_edge);
    } else if (regimes.interior(i)) {
      lo_k = max(Scalar(0), cap_edge);
      hi_k = min(p_max, silence_edge);
    } else {
      lo_k = max(Scalar(0), silence_edge);
      hi_k = p_max;
    }
    out.lo = max(out.lo, lo_k);
    out.hi = min(out.hi, hi_k);
  }
  return out;
}

/// A and B such that the macro BS sees A - B*P0 while the regimes hold.
template <typename Scalar>
EffectiveCoefficients<Scalar> effective_coefficients(const Vector<Scalar>& p_fixed, const RegimeIndicators& regimes,
                                                     const ChannelGains<Scalar>& g, const GameParams<Scalar>& params) {
  detail::check_dims(p_fixed.size(), g, params);
  detail::require(regimes.size() == static_cast<std::size_t>(g.size()), "regime indicators: wrong length");

  std::vector<Scalar> a_terms, b_terms;
  for (Index k = 0; k < g.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Scalar eps = regimes.eps[i] ? Scalar(1) : Scalar(0);
    const Scalar eps_p = regimes.eps_prime[i] ? Scalar(1) : Scalar(0);
    const Scalar offset = Scalar(1) / params.lambda_sue(k) -
                          (params.noise + co_tier_interference(k, p_fixed, g)) / g.h_ss_direct(k);
    const Scalar bracket = params.p_max - eps_p * params.p_max + eps_p * eps * offset;
    a_terms.push_back(g.h_m_from_sue(k) * bracket);
    b_terms.push_back(eps_p * eps * g.h_m_from_sue(k) * g.h_sbs_from_mue(k) / g.h_ss_direct(k));
  }
  return {params.noise + detail::ordered_sum(a_terms), detail::ordered_sum(b_terms)};
}

template <typename Scalar>
EffectiveCoefficients<Scalar> effective_coefficients(const InnerResult<Scalar>& inner, const RegimeIndicators& regimes,
                                                     const ChannelGains<Scalar>& g, const GameParams<Scalar>& params) {
  return effective_coefficients(inner.p_fixed, regimes, g, params);
}

/// Leader objective in the A, B form.
template <typename Scalar>
Scalar leader_utility_ab(Scalar p0, Scalar a, Scalar b, Scalar h_mm, Scalar lambda_mue) {
  using std::log1p;
  return log1p(h_mm * p0 / (a - b * p0)) - lambda_mue * p0;
}

/// Coefficients of the stationarity condition and its real roots. Degenerate
/// cases return fewer roots: a single root when C1 = 0 != C2, none when
/// C1 = C2 = 0 or the discriminant is negative.
template <typename Scalar>
LeaderQuadratic<Scalar> quadratic_candidates(Scalar a, Scalar b, Scalar h_mm, Scalar lambda_mue) {
  using std::abs;
  using std::copysign;
  using std::sqrt;
  LeaderQuadratic<Scalar> q;
  q.c1 = lambda_mue * b * (h_mm - b);
  q.c2 = lambda_mue * a * (Scalar(2) * b - h_mm);
  q.c3 = a * h_mm - lambda_mue * a * a;

  if (q.c1 == Scalar(0)) {
    if (q.c2 != Scalar(0)) q.roots.push_back(-q.c3 / q.c2);
    return q;
  }
  const Scalar disc = q.c2 * q.c2 - Scalar(4) * q.c1 * q.c3;
  if (disc < Scalar(0)) return q;
  // Cancellation-free pair: q/c1 and c3/q.
  const Scalar half = -(q.c2 + copysign(sqrt(disc), q.c2)) / Scalar(2);
  if (half == Scalar(0)) {
    q.roots.push_back(Scalar(0));
    return q;
  }
  q.roots.push_back(half / q.c1);
  q.roots.push_back(q.c3 / half);
  std::sort(q.roots.begin(), q.roots.end());
  return q;
}

template <typename Scalar>
LeaderQuadratic<Scalar> quadratic_candidates(const EffectiveCoefficients<Scalar>& ab, const ChannelGains<Scalar>& g,
                                             const GameParams<Scalar>& params) {
  return quadratic_candidates(ab.a, ab.b, g.h_mm, params.lambda_mue);
}

/// Closed-form leader optimum on `interval` with the regimes held fixed:
/// the A, B objective is evaluated at both ends and at every stationary
/// point inside, and the best wins; ties go to the smaller power. Candidates
/// with A - B*P0 <= 0 are discarded.
template <typename Scalar>
LeaderSolution<Scalar> optimal_leader_power_in_regime(const Vector<Scalar>& p_fixed, const RegimeIndicators& regimes,
                                                      FeasibleInterval<Scalar> interval, const ChannelGains<Scalar>& g,
                                                      const GameParams<Scalar>& params) {
  LeaderSolution<Scalar> sol;
  sol.regimes = regimes;
  sol.interval = interval;
  const auto ab = effective_coefficients(p_fixed, regimes, g, params);
  sol.coeff_a = ab.a;
  sol.coeff_b = ab.b;
  sol.quadratic = quadratic_candidates(ab, g, params);

  auto consider = [&](Scalar p, CandidateKind kind) {
    LeaderCandidate<Scalar> c{p, Scalar(0), kind, true};
    if (!(ab.a - ab.b * p > Scalar(0))) {
      c.valid = false;
      ++sol.discarded_candidates;
    } else {
      c.utility = leader_utility_ab(p, ab.a, ab.b, g.h_mm, params.lambda_mue);
    }
    sol.candidates.push_back(c);
  };
  consider(interval.lo, CandidateKind::lower_end);
  consider(interval.hi, CandidateKind::upper_end);
  for (const Scalar& r : sol.quadratic.roots)
    if (interval.contains(r)) consider(r, CandidateKind::stationary);

  const LeaderCandidate<Scalar>* best = nullptr;
  for (const auto& c : sol.candidates) {
    if (!c.valid) continue;
    if (best == nullptr || c.utility > best->utility || (c.utility == best->utility && c.power < best->power))
      best = &c;
  }
  if (best == nullptr) {
    sol.no_valid_candidate = true;
    sol.p_opt = interval.lo;
  } else {
    sol.p_opt = best->power;
  }
  return sol;
}

/// Leader's optimal power against the followers' inner fixed point, within
/// the regimes observed there.
///
/// Regimes come from the raw fixed point, the interval from the clipped
/// powers. An empty interval falls back to [0, P_T] under the same frozen
/// regimes and sets `empty_interval_fallback`.
template <typename Scalar>
LeaderSolution<Scalar> optimal_leader_power(const InnerResult<Scalar>& inner, const ChannelGains<Scalar>& g,
                                            const GameParams<Scalar>& params) {
  detail::require(inner.converged, "leader step needs a converged inner iteration");
  const RegimeIndicators regimes = regime_indicators(inner.p_raw, params.p_max);
  FeasibleInterval<Scalar> interval = feasible_interval(inner.p_fixed, regimes, g, params);
  const bool empty = interval.empty();
  if (empty) interval = {Scalar(0), params.p_max};
  LeaderSolution<Scalar> sol = optimal_leader_power_in_regime(inner.p_fixed, regimes, interval, g, params);
  sol.empty_interval_fallback = empty;
  return sol;
}

/// Pieces of [0, P_T] on which every follower keeps one regime, with
/// co-tier interference frozen at `p_fixed`. Follower k changes regime where
/// its response reaches P_T and where it reaches 0 as P0 grows.
template <typename Scalar>
std::vector<std::pair<FeasibleInterval<Scalar>, RegimeIndicators>> regime_segments(
    const Vector<Scalar>& p_fixed, const ChannelGains<Scalar>& g, const GameParams<Scalar>& params) {
  detail::check_dims(p_fixed.size(), g, params);
  const Scalar p_max = params.p_max;
  const Index k = g.size();

  // Response of follower j to leader power x with the others frozen.
  Vector<Scalar> offset(k);
  for (Index j = 0; j < k; ++j)
    offset(j) = Scalar(1) / params.lambda_sue(j) - (params.noise + co_tier_interference(j, p_fixed, g)) / g.h_ss_direct(j);
  auto regimes_at = [&](Scalar x) {
    Vector<Scalar> tmp(k);
    for (Index j = 0; j < k; ++j) tmp(j) = offset(j) - g.h_sbs_from_mue(j) * x / g.h_ss_direct(j);
    return regime_indicators(tmp, p_max);
  };

  std::vector<Scalar> edges{Scalar(0), p_max};
  for (Index j = 0; j < k; ++j) {
    const Scalar slope = g.h_sbs_from_mue(j) / g.h_ss_direct(j);
    if (!(slope > Scalar(0))) continue;
    for (const Scalar e : {(offset(j) - p_max) / slope, offset(j) / slope})
      if (e > Scalar(0) && e < p_max) edges.push_back(e);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<std::pair<FeasibleInterval<Scalar>, RegimeIndicators>> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const Scalar mid = (edges[i] + edges[i + 1]) / Scalar(2);
    out.emplace_back(FeasibleInterval<Scalar>{edges[i], edges[i + 1]}, regimes_at(mid));
  }
  if (out.empty()) out.emplace_back(FeasibleInterval<Scalar>{Scalar(0), p_max}, regimes_at(Scalar(0)));
  return out;
}

/// Leader's optimal power over all of [0, P_T], with co-tier interference
/// frozen at the inner fixed point but regimes free: the closed-form rule is
/// applied on every regime segment and the best segment wins. The returned
/// solution describes the winning segment.
template <typename Scalar>
LeaderSolution<Scalar> global_leader_power(const InnerResult<Scalar>& inner, const ChannelGains<Scalar>& g,
                                           const GameParams<Scalar>& params) {
  detail::require(inner.converged, "leader step needs a converged inner iteration");
  std::optional<LeaderSolution<Scalar>> best;
  Scalar best_utility{0};
  for (const auto& [interval, regimes] : regime_segments(inner.p_fixed, g, params)) {
    LeaderSolution<Scalar> sol = optimal_leader_power_in_regime(inner.p_fixed, regimes, interval, g, params);
    if (sol.no_valid_candidate) continue;
    const Scalar u = leader_utility_ab(sol.p_opt, sol.coeff_a, sol.coeff_b, g.h_mm, params.lambda_mue);
    if (!best || u > best_utility || (u == best_utility && sol.p_opt < best->p_opt)) {
      best_utility = u;
      best = std::move(sol);
    }
  }
  if (!best) {
    LeaderSolution<Scalar> fallback = optimal_leader_power(inner, g, params);
    fallback.no_valid_candidate = true;
    return fallback;
  }
  return *best;
}

}  // namespace stackpc
