#pragma once

// Domain types and the rate/utility functions of the uplink power-control
// game between one macrocell user (the leader, index 0) and K small-cell
// users (the followers, indices 1..K in the model, 0..K-1 in code).
//
// Everything is templated on the scalar type so the same expressions can be
// evaluated in double, long double, or an extended-precision type.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stackpc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Thrown when arguments break a documented precondition (sizes, ranges,
/// strictly positive quantities).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

template <typename Scalar>
bool finite(const Scalar& x) {
  using std::isfinite;
  return isfinite(x);
}

// Sums the terms in ascending order. The result depends only on the multiset
// of terms, so relabeling players reproduces interference sums bit for bit.
template <typename Scalar>
Scalar ordered_sum(std::vector<Scalar>& terms) {
  bool all_finite = std::all_of(terms.begin(), terms.end(),
                                [](const Scalar& t) { return finite(t); });
  if (all_finite) std::sort(terms.begin(), terms.end());
  Scalar acc(0);
  for (const auto& t : terms) acc += t;
  return acc;
}

}  // namespace detail

/// Direct and cross channel gains (linear, dimensionless) among the macro
/// user, the K small-cell users, the macro base station and the K small
/// base stations.
template <typename Scalar>
struct ChannelGains {
  Scalar h_mm{1};                  ///< macro user -> macro BS
  Vector<Scalar> h_m_from_sue;     ///< SUE k -> macro BS
  Vector<Scalar> h_sbs_from_mue;   ///< macro user -> SBS k
  Vector<Scalar> h_ss_direct;      ///< SUE k -> SBS k
  Matrix<Scalar> h_ss_cross;       ///< (k, j): SUE j -> SBS k, zero diagonal

  Index size() const { return h_ss_direct.size(); }

  static ChannelGains zeros(Index k) {
    ChannelGains g;
    g.h_mm = Scalar(1);
    g.h_m_from_sue = Vector<Scalar>::Zero(k);
    g.h_sbs_from_mue = Vector<Scalar>::Zero(k);
    g.h_ss_direct = Vector<Scalar>::Ones(k);
    g.h_ss_cross = Matrix<Scalar>::Zero(k, k);
    return g;
  }

  void validate() const {
    const Index k = size();
    detail::require(h_m_from_sue.size() == k && h_sbs_from_mue.size() == k &&
                        h_ss_cross.rows() == k && h_ss_cross.cols() == k,
                    "channel gains: inconsistent number of small cells");
    detail::require(detail::finite(h_mm) && h_mm > Scalar(0),
                    "channel gains: direct gain h_mm must be positive and finite");
    for (Index i = 0; i < k; ++i) {
      detail::require(detail::finite(h_ss_direct(i)) && h_ss_direct(i) > Scalar(0),
                      "channel gains: direct gain h_ss_direct must be positive and finite");
      detail::require(detail::finite(h_m_from_sue(i)) && h_m_from_sue(i) >= Scalar(0) &&
                          detail::finite(h_sbs_from_mue(i)) && h_sbs_from_mue(i) >= Scalar(0),
                      "channel gains: cross-tier gains must be nonnegative and finite");
      for (Index j = 0; j < k; ++j) {
        if (i == j) continue;
        detail::require(detail::finite(h_ss_cross(i, j)) && h_ss_cross(i, j) >= Scalar(0),
                        "channel gains: co-tier gains must be nonnegative and finite");
      }
    }
  }
};

/// Prices, power cap, noise and solver tolerances. Powers in W, prices in 1/W.
template <typename Scalar>
struct GameParams {
  Index k_sue = 0;
  Scalar lambda_mue{1000};
  Vector<Scalar> lambda_sue;
  Scalar p_max{1e-3};
  Scalar noise{1e-13};
  Scalar tol_inner{1e-12};
  Scalar tol_outer{1e-12};
  int max_inner = 10000;
  int max_outer = 500;

  /// Same price for the leader and every follower.
  static GameParams uniform(Index k, Scalar lambda, Scalar p_max, Scalar noise) {
    GameParams p;
    p.k_sue = k;
    p.lambda_mue = lambda;
    p.lambda_sue = Vector<Scalar>::Constant(k, lambda);
    p.p_max = p_max;
    p.noise = noise;
    return p;
  }

  void validate() const {
    detail::require(k_sue >= 0 && lambda_sue.size() == k_sue,
                    "game params: lambda_sue length must equal k_sue");
    detail::require(detail::finite(p_max) && p_max > Scalar(0), "game params: p_max must be positive");
    detail::require(detail::finite(noise) && noise > Scalar(0), "game params: noise must be positive");
    detail::require(detail::finite(lambda_mue) && lambda_mue >= Scalar(0),
                    "game params: lambda_mue must be nonnegative");
    for (Index i = 0; i < k_sue; ++i)
      detail::require(detail::finite(lambda_sue(i)) && lambda_sue(i) > Scalar(0),
                      "game params: lambda_sue must be positive (unbounded best response at zero price)");
    detail::require(tol_inner > Scalar(0) && tol_outer > Scalar(0), "game params: tolerances must be positive");
    detail::require(max_inner > 0 && max_outer > 0, "game params: iteration caps must be positive");
  }
};

/// Leader power plus follower power vector.
template <typename Scalar>
struct PowerProfile {
  Scalar p_mue{0};
  Vector<Scalar> p_sue;

  PowerProfile() = default;
  PowerProfile(Scalar p0, Vector<Scalar> p) : p_mue(p0), p_sue(std::move(p)) {}

  /// Builds a profile and checks every entry lies in [0, p_max].
  static PowerProfile feasible(Scalar p0, Vector<Scalar> p, Scalar p_max) {
    PowerProfile out(p0, std::move(p));
    detail::require(out.is_feasible(p_max), "power profile: entries must lie in [0, p_max]");
    return out;
  }

  Index size() const { return p_sue.size(); }

  bool is_feasible(Scalar p_max) const {
    if (!(p_mue >= Scalar(0) && p_mue <= p_max)) return false;
    for (Index i = 0; i < p_sue.size(); ++i)
      if (!(p_sue(i) >= Scalar(0) && p_sue(i) <= p_max)) return false;
    return true;
  }

  bool operator==(const PowerProfile& o) const {
    return p_mue == o.p_mue && p_sue.size() == o.p_sue.size() && p_sue == o.p_sue;
  }
};

using ChannelGainsd = ChannelGains<double>;
using GameParamsd = GameParams<double>;
using PowerProfiled = PowerProfile<double>;

namespace detail {

template <typename Scalar>
void check_dims(Index profile_k, const ChannelGains<Scalar>& g, const GameParams<Scalar>& params) {
  require(profile_k == g.size() && g.size() == params.k_sue &&
              g.h_m_from_sue.size() == g.size() && g.h_sbs_from_mue.size() == g.size() &&
              g.h_ss_cross.rows() == g.size() && g.h_ss_cross.cols() == g.size() &&
              params.lambda_sue.size() == params.k_sue,
          "dimension mismatch between profile, gains and params");
}

}  // namespace detail

/// N0 + sum_k H0k Pk: noise plus co-channel interference seen by the macro BS.
template <typename Scalar>
Scalar mue_interference(const Vector<Scalar>& p_sue, const ChannelGains<Scalar>& g, Scalar noise) {
  std::vector<Scalar> terms;
  terms.reserve(static_cast<std::size_t>(p_sue.size()));
  for (Index j = 0; j < p_sue.size(); ++j) terms.push_back(g.h_m_from_sue(j) * p_sue(j));
  return noise + detail::ordered_sum(terms);
}

/// sum_{j != k} H_kj P_j: co-tier interference at SBS k.
template <typename Scalar>
Scalar co_tier_interference(Index k, const Vector<Scalar>& p_sue, const ChannelGains<Scalar>& g) {
  std::vector<Scalar> terms;
  terms.reserve(static_cast<std::size_t>(p_sue.size()));
  for (Index j = 0; j < p_sue.size(); ++j)
    if (j != k) terms.push_back(g.h_ss_cross(k, j) * p_sue(j));
  return detail::ordered_sum(terms);
}

/// N0 + H_k0 P0 + sum_{j != k} H_kj P_j: everything SBS k hears besides SUE k.
template <typename Scalar>
Scalar sue_interference(Index k, Scalar p_mue, const Vector<Scalar>& p_sue,
                        const ChannelGains<Scalar>& g, Scalar noise) {
  return noise + g.h_sbs_from_mue(k) * p_mue + co_tier_interference(k, p_sue, g);
}

/// Macro user rate in nats.
template <typename Scalar>
Scalar rate_mue(const PowerProfile<Scalar>& profile, const ChannelGains<Scalar>& g,
                const GameParams<Scalar>& params) {
  using std::log1p;
  detail::check_dims(profile.size(), g, params);
  return log1p(g.h_mm * profile.p_mue / mue_interference(profile.p_sue, g, params.noise));
}

/// Rate of small-cell user k in nats.
template <typename Scalar>
Scalar rate_sue(Index k, const PowerProfile<Scalar>& profile, const ChannelGains<Scalar>& g,
                const GameParams<Scalar>& params) {
  using std::log1p;
  detail::check_dims(profile.size(), g, params);
  detail::require(k >= 0 && k < g.size(), "small-cell user index out of range");
  const Scalar interference = sue_interference(k, profile.p_mue, profile.p_sue, g, params.noise);
  return log1p(g.h_ss_direct(k) * profile.p_sue(k) / interference);
}

template <typename Scalar>
Scalar utility_mue(const PowerProfile<Scalar>& profile, const ChannelGains<Scalar>& g,
                   const GameParams<Scalar>& params) {
  return rate_mue(profile, g, params) - params.lambda_mue * profile.p_mue;
}

template <typename Scalar>
Scalar utility_sue(Index k, const PowerProfile<Scalar>& profile, const ChannelGains<Scalar>& g,
                   const GameParams<Scalar>& params) {
  return rate_sue(k, profile, g, params) - params.lambda_sue(k) * profile.p_sue(k);
}

/// dU_k/dP_k = H_kk / (I_k + H_kk P_k) - lambda_k.
template <typename Scalar>
Scalar utility_sue_derivative(Index k, const PowerProfile<Scalar>& profile, const ChannelGains<Scalar>& g,
                              const GameParams<Scalar>& params) {
  detail::check_dims(profile.size(), g, params);
  detail::require(k >= 0 && k < g.size(), "small-cell user index out of range");
  const Scalar interference = sue_interference(k, profile.p_mue, profile.p_sue, g, params.noise);
  return g.h_ss_direct(k) / (interference + g.h_ss_direct(k) * profile.p_sue(k)) - params.lambda_sue(k);
}

}  // namespace stackpc
