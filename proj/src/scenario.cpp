#include "stackpc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stackpc/rng.hpp"

namespace stackpc {

namespace {

Eigen::Vector2d uniform_in_disc(CounterRng& rng, const Eigen::Vector2d& center, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  return center + Eigen::Vector2d(r * std::cos(theta), r * std::sin(theta));
}

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

void fnv_double(std::uint64_t& h, double x) { fnv_bytes(h, &x, sizeof x); }

// Link identifiers for shadowing streams: transmitter 0 is the MUE and
// 1..K the SUEs; receiver 0 is the MBS and 1..K the SBSs.
std::uint64_t link_id(Index tx, Index rx) {
  return (static_cast<std::uint64_t>(tx) << 32) | static_cast<std::uint64_t>(rx);
}

}  // namespace

std::uint64_t Scenario::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv_bytes(h, &seed, sizeof seed);
  fnv_double(h, macro_radius);
  fnv_double(h, small_radius);
  auto point = [&](const Eigen::Vector2d& p) {
    fnv_double(h, p.x());
    fnv_double(h, p.y());
  };
  point(mbs_pos);
  point(mue_pos);
  for (const auto& p : sbs_pos) point(p);
  for (const auto& p : sue_pos) point(p);
  return h;
}

bool Scenario::operator==(const Scenario& o) const {
  return seed == o.seed && macro_radius == o.macro_radius && small_radius == o.small_radius &&
         mbs_pos == o.mbs_pos && mue_pos == o.mue_pos && sbs_pos == o.sbs_pos && sue_pos == o.sue_pos &&
         separation_satisfied == o.separation_satisfied;
}

double PathLossModel::gain(double distance) const {
  const double d = std::max(distance, reference_distance);
  return reference_gain * std::pow(d / reference_distance, -exponent);
}

void PathLossModel::validate() const {
  detail::require(exponent > 0.0 && std::isfinite(exponent), "path loss: exponent must be positive");
  detail::require(reference_distance > 0.0 && std::isfinite(reference_distance),
                  "path loss: reference distance must be positive");
  detail::require(reference_gain > 0.0 && std::isfinite(reference_gain), "path loss: reference gain must be positive");
  detail::require(shadowing_sigma_db >= 0.0 && std::isfinite(shadowing_sigma_db),
                  "path loss: shadowing sigma must be nonnegative");
}

Scenario generate(std::uint64_t seed, Index k, const CellRadii& radii, const PlacementPolicy& policy) {
  detail::require(k >= 0, "scenario: number of small cells must be nonnegative");
  detail::require(radii.macro > 0.0 && radii.small > 0.0, "scenario: radii must be positive");

  Scenario s;
  s.seed = seed;
  s.macro_radius = radii.macro;
  s.small_radius = radii.small;
  s.mbs_pos = Eigen::Vector2d::Zero();

  const double separation = policy.separation_factor * radii.small;
  for (Index i = 0; i < k; ++i) {
    CounterRng rng(seed, StreamRole::sbs_placement, static_cast<std::uint64_t>(i));
    Eigen::Vector2d best = Eigen::Vector2d::Zero();
    double best_gap = -1.0;
    for (int attempt = 0; attempt < std::max(policy.max_tries, 1); ++attempt) {
      const Eigen::Vector2d candidate = uniform_in_disc(rng, s.mbs_pos, radii.macro);
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& placed : s.sbs_pos) gap = std::min(gap, (candidate - placed).norm());
      if (gap > best_gap) {
        best = candidate;
        best_gap = gap;
      }
      if (gap >= separation) break;
    }
    if (best_gap < separation) s.separation_satisfied = false;
    s.sbs_pos.push_back(best);
  }
  for (Index i = 0; i < k; ++i) {
    CounterRng rng(seed, StreamRole::sue_placement, static_cast<std::uint64_t>(i));
    s.sue_pos.push_back(uniform_in_disc(rng, s.sbs_pos[static_cast<std::size_t>(i)], radii.small));
  }
  CounterRng mue_rng(seed, StreamRole::mue_placement);
  s.mue_pos = uniform_in_disc(mue_rng, s.mbs_pos, radii.macro);
  return s;
}

ChannelGainsd gains_from_scenario(const Scenario& s, const PathLossModel& plm) {
  plm.validate();
  const Index k = s.size();
  detail::require(static_cast<Index>(s.sue_pos.size()) == k, "scenario: SUE and SBS counts differ");

  auto link = [&](const Eigen::Vector2d& tx, const Eigen::Vector2d& rx, Index tx_id, Index rx_id) {
    double g = plm.gain((tx - rx).norm());
    if (plm.shadowing_sigma_db > 0.0) {
      CounterRng rng(s.seed, StreamRole::shadowing, link_id(tx_id, rx_id));
      g *= db_to_linear(plm.shadowing_sigma_db * rng.normal());
    }
    return g;
  };

  ChannelGainsd g;
  g.h_mm = link(s.mue_pos, s.mbs_pos, 0, 0);
  g.h_m_from_sue.resize(k);
  g.h_sbs_from_mue.resize(k);
  g.h_ss_direct.resize(k);
  g.h_ss_cross = Eigen::MatrixXd::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    const auto& sue = s.sue_pos[static_cast<std::size_t>(i)];
    const auto& sbs = s.sbs_pos[static_cast<std::size_t>(i)];
    g.h_m_from_sue(i) = link(sue, s.mbs_pos, i + 1, 0);
    g.h_sbs_from_mue(i) = link(s.mue_pos, sbs, 0, i + 1);
    g.h_ss_direct(i) = link(sue, sbs, i + 1, i + 1);
    for (Index j = 0; j < k; ++j)
      if (j != i) g.h_ss_cross(i, j) = link(s.sue_pos[static_cast<std::size_t>(j)], sbs, j + 1, i + 1);
  }
  return g;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

double noise_power_watts(double density_dbm_per_hz, double bandwidth_hz) {
  detail::require(bandwidth_hz > 0.0, "noise: bandwidth must be positive");
  return dbm_to_watts(density_dbm_per_hz + linear_to_db(bandwidth_hz));
}

}  // namespace stackpc
