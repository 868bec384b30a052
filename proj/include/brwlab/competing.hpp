// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/stats.hpp"

namespace brw {

/// Two branching walks on the same group: the invasive one evolves freely,
/// the noninvasive one loses every node that shares a site with an invasive
/// node of the same generation.
struct CompetingParams {
  GroupSpec group;
  StepDistribution step_invasive;
  StepDistribution step_noninvasive;
  OffspringDistribution offspring_invasive;
  OffspringDistribution offspring_noninvasive;
  GroupElement start_invasive;     // pair mode: must differ from the origin
  uint32_t horizon = 0;
  Caps caps;
};

struct PairRun {
  FamilyTree invasive;      // never marked
  FamilyTree noninvasive;   // marks applied by the contact rule
  std::vector<uint8_t> root_cluster;        // of the noninvasive tree
  std::vector<uint64_t> noninv_alive_per_gen;
  bool capped = false;

  bool invasive_alive_at(uint32_t gen) const { return invasive.alive_at(gen); }
  bool noninvasive_alive_at(uint32_t gen) const {
    return gen < noninv_alive_per_gen.size() && noninv_alive_per_gen[gen] > 0;
  }
};

/// One replica of the pair process. The two trees read disjoint key streams
/// derived from replica_seed, so the invasive tree is bit-identical whether
/// or not the noninvasive process is co-simulated.
PairRun run_competing(const CompetingParams& params, uint64_t replica_seed,
                      const std::shared_ptr<SiteTable>& sites);

struct CoexistenceCell {
  uint32_t horizon = 0;
  uint64_t replicas = 0;
  uint64_t inv_alive = 0;
  uint64_t noninv_alive = 0;
  uint64_t joint = 0;
  double inv_alive_frac = 0.0;
  double noninv_alive_frac = 0.0;
  double joint_frac = 0.0;
  Interval joint_ci{};
};

struct CoexistenceResult {
  std::vector<CoexistenceCell> cells;  // one per requested horizon, ascending
  uint64_t replicas = 0;
  uint64_t capped_replicas = 0;
  /// Replicas whose noninvasive root is marked dead. Structurally zero in
  /// pair mode (the invasive start differs from the origin), reported so
  /// consumers need not special-case the mode.
  uint64_t noninv_root_dagger = 0;
};

/// Joint survival frequencies at several horizons from one co-simulation per
/// replica (contact marks are generation-local, so every prefix of a long
/// run is itself an exact shorter run).
CoexistenceResult estimate_coexistence(const CompetingParams& params,
                                       const std::vector<uint32_t>& horizons,
                                       uint64_t replicas, uint64_t master_seed,
                                       uint32_t workers = 1);

/// Attenuated-and-seeded variant: the noninvasive walk runs with offspring
/// attenuation gamma; every site of the ball B(origin, window_radius) whose
/// total visit multiplicity reaches N seeds one independent invasive copy;
/// a noninvasive node dies when any invasive copy ever visits its site.
struct AdaptedParams {
  CompetingParams base;   // start_invasive unused; copies start at seeded sites
  uint32_t N = 1;
  double gamma = 1.0;
  uint32_t window_radius = 0;
  uint64_t max_seeded_copies = 10000;
};

struct AdaptedRun {
  FamilyTree noninvasive;
  std::vector<uint32_t> seeded_sites;   // ascending site ids
  uint64_t dagger_nodes = 0;
  bool root_dagger = false;
  bool noninv_alive_at_horizon = false;  // root cluster reaches the horizon
  bool seed_cap_hit = false;
  bool capped = false;
};

AdaptedRun run_adapted(const AdaptedParams& params, uint64_t replica_seed,
                       const std::shared_ptr<SiteTable>& sites);

struct DaggerMarginal {
  double dagger_frac = 0.0;
  Interval ci{};
  uint64_t replicas = 0;
  bool low_sample = false;  // fewer than 100 replicas
};

/// Frequency of a dead root across adapted replicas (the per-site death
/// marginal read off at the origin).
DaggerMarginal estimate_dagger_marginal(const std::vector<AdaptedRun>& runs);

}  // namespace brw
