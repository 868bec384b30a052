// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>

#include "brwlab/family_tree.hpp"
#include "brwlab/group.hpp"
#include "brwlab/offspring.hpp"

namespace brw {

struct Caps {
  uint64_t max_nodes = uint64_t{1} << 22;
};

struct BrwParams {
  GroupSpec group;
  StepDistribution step;
  OffspringDistribution offspring;
  GroupElement start;
  uint32_t horizon = 0;
  Caps caps;
  /// Branching attenuation: with prob. 1 - gamma a multi-child node keeps
  /// only its first child. Realized through a per-node keyed uniform, so
  /// runs with gamma_1 < gamma_2 and equal tree keys are nested subtrees.
  std::optional<double> gamma;
};

/// Generation-synchronous branching run. All randomness is read from
/// counter-based streams addressed by per-node keys derived from tree_key,
/// so the result is a pure function of (params, tree_key) and coupled runs
/// (different N, gamma, or co-simulated processes) stay aligned node by
/// node. Positions are interned into `sites`; pass a shared table when two
/// processes must compare positions.
FamilyTree run_brw(const BrwParams& params, uint64_t tree_key,
                   const std::shared_ptr<SiteTable>& sites);

/// Front-only variant: no arena is kept; `visit` is called once per node as
/// (generation, site). Returns false when the particle budget was exhausted.
bool run_brw_front(const BrwParams& params, uint64_t tree_key, SiteTable& sites,
                   const std::function<void(uint32_t, uint32_t)>& visit);

enum class SurvivalRegime : uint8_t { strong, weak_or_extinct };

struct RegimeClassification {
  SurvivalRegime regime;
  bool critical;  // m * rho at 1 within 1e-12
  double m_rho;
};

/// Local (strong) survival happens exactly when m * rho > 1.
RegimeClassification classify_survival_regime(double m, double rho);

/// Number of nodes whose position equals `target`.
uint64_t visit_count(const FamilyTree& tree, const GroupElement& target);

struct BallOccupancy {
  uint64_t total = 0;                               // nodes within the ball
  std::unordered_map<uint32_t, uint64_t> by_site;   // site id -> visits
};

/// Occupancy of the ball B(center, radius) over the whole run.
BallOccupancy visits_in_ball(const FamilyTree& tree, const GroupElement& center,
                             uint32_t radius);

struct LastExit {
  uint64_t value = 0;   // first generation from which the ball is never touched
  bool censored = false;  // the final simulated generation still met the ball
};

/// R_n: one past the last generation with a node inside B(start, n). An
/// extinct-at-root tree gives 1. Censored when the run ended (horizon or
/// cap) while the ball was still occupied.
LastExit last_exit(const FamilyTree& tree, uint32_t radius);

}  // namespace brw
