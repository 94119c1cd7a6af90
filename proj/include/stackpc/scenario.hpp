#pragma once

// Seeded two-tier geometry and path-loss channel gains.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "stackpc/core_model.hpp"

namespace stackpc {

struct CellRadii {
  double macro = 1000.0;  ///< m
  double small = 100.0;   ///< m
};

/// Small base stations are rejection-sampled to sit at least
/// separation_factor * small radius apart; after max_tries the most
/// separated candidate is kept.
struct PlacementPolicy {
  int max_tries = 10000;
  double separation_factor = 2.0;
};

struct Scenario {
  std::uint64_t seed = 0;
  double macro_radius = 1000.0;
  double small_radius = 100.0;
  Eigen::Vector2d mbs_pos = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> sbs_pos;
  std::vector<Eigen::Vector2d> sue_pos;
  Eigen::Vector2d mue_pos = Eigen::Vector2d::Zero();
  bool separation_satisfied = true;

  Index size() const { return static_cast<Index>(sbs_pos.size()); }
  /// FNV-1a over the seed, radii and node coordinates.
  std::uint64_t hash() const;
  bool operator==(const Scenario& o) const;
};

struct PathLossModel {
  double exponent = 4.0;
  double reference_distance = 1.0;  ///< m; shorter links are clamped to it
  double reference_gain = 1.0;
  double shadowing_sigma_db = 0.0;

  /// reference_gain * (max(d, d0) / d0)^-exponent
  double gain(double distance) const;
  void validate() const;
  bool operator==(const PathLossModel&) const = default;
};

/// MBS at the origin, SBSs uniform in the macro disc, each SUE uniform in
/// its small cell, MUE uniform in the macro disc. Deterministic in `seed`;
/// the first k nodes of a larger drop coincide with a smaller drop.
Scenario generate(std::uint64_t seed, Index k, const CellRadii& radii = {}, const PlacementPolicy& policy = {});

ChannelGainsd gains_from_scenario(const Scenario& s, const PathLossModel& plm);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double x);

/// Thermal noise over `bandwidth_hz` for a density in dBm/Hz, in W.
double noise_power_watts(double density_dbm_per_hz, double bandwidth_hz);

}  // namespace stackpc
