#pragma once

// Seeded test instances and small helpers shared by the test binaries.

#include <cstdint>
#include <vector>

#include "stackpc/config.hpp"
#include "stackpc/core_model.hpp"
#include "stackpc/rng.hpp"
#include "stackpc/scenario.hpp"

namespace testkit {

using namespace stackpc;

struct Instance {
  ChannelGainsd g;
  GameParamsd params;
};

// Unit-scale game: P_T = 1 W, gains O(1), prices chosen so followers land
// in all three regimes. Co-tier rows sum to below `coupling`, which keeps
// the spectral radius of W under `coupling`.
inline Instance synthetic(std::uint64_t seed, Index k, double coupling = 0.6) {
  CounterRng rng(seed, StreamRole::test_instance, static_cast<std::uint64_t>(k));
  Instance in;
  in.g = ChannelGainsd::zeros(k);
  in.g.h_mm = rng.uniform(0.5, 2.0);
  for (Index i = 0; i < k; ++i) {
    in.g.h_m_from_sue(i) = rng.uniform(0.0, 0.5);
    in.g.h_sbs_from_mue(i) = rng.uniform(0.0, 0.5);
    in.g.h_ss_direct(i) = rng.uniform(0.5, 2.0);
  }
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      if (i != j) in.g.h_ss_cross(i, j) = rng.uniform() * coupling * in.g.h_ss_direct(i) / static_cast<double>(k - 1);
  in.params = GameParamsd::uniform(k, rng.uniform(0.3, 3.0), 1.0, rng.uniform(0.05, 0.3));
  for (Index i = 0; i < k; ++i) in.params.lambda_sue(i) = rng.uniform(0.3, 3.0);
  return in;
}

// A drop under the default experiment configuration.
inline Instance scenario_instance(std::uint64_t seed, Index k, const ExperimentConfig& config = {}) {
  const Scenario s = generate(seed, k, make_radii(config), make_policy(config));
  ExperimentConfig c = config;
  c.scenario.k = k;
  return {gains_from_scenario(s, config.pathloss), make_params(c)};
}

inline Eigen::VectorXd random_powers(CounterRng& rng, Index k, double p_max) {
  Eigen::VectorXd p(k);
  for (Index i = 0; i < k; ++i) p(i) = rng.uniform(0.0, p_max);
  return p;
}

// Relabels followers: new index i is old index perm[i].
inline Instance permuted(const Instance& in, const std::vector<Index>& perm) {
  const Index k = in.g.size();
  Instance out = in;
  for (Index i = 0; i < k; ++i) {
    out.g.h_m_from_sue(i) = in.g.h_m_from_sue(perm[i]);
    out.g.h_sbs_from_mue(i) = in.g.h_sbs_from_mue(perm[i]);
    out.g.h_ss_direct(i) = in.g.h_ss_direct(perm[i]);
    out.params.lambda_sue(i) = in.params.lambda_sue(perm[i]);
    for (Index j = 0; j < k; ++j) out.g.h_ss_cross(i, j) = in.g.h_ss_cross(perm[i], perm[j]);
  }
  return out;
}

inline std::vector<Index> random_permutation(CounterRng& rng, Index k) {
  std::vector<Index> perm(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) perm[i] = i;
  for (Index i = k - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace testkit
