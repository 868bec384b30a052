// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/stats.hpp"

namespace brw {

enum class TruncationMode : uint8_t {
  /// Full auxiliary run; in every (generation, site) cell all but N nodes
  /// are marked dead, and dead lineages keep breeding (their descendants
  /// stay in the cell counts). The process of interest is the root cluster.
  paper_exact,
  /// Dead particles breed nothing: cell counts include live lineages only.
  operational,
  /// After the run, every node standing on a site with more than N total
  /// visits (over all generations) is marked dead.
  site_resource,
};

std::string to_string(TruncationMode mode);

struct TruncationResult {
  uint32_t N = 0;
  TruncationMode mode = TruncationMode::paper_exact;
  uint32_t horizon = 0;
  uint64_t seed = 0;
  uint64_t root_cluster_size = 0;
  bool root_alive = false;
  bool alive_at_horizon = false;
  std::vector<uint64_t> alive_per_gen;
  bool capped = false;
};

struct TruncatedRun {
  FamilyTree tree;  // marks reflect the truncation
  TruncationResult result;
};

/// Per-node selection priority; a cell keeps its N smallest. Independent
/// uniform priorities make the kept subset a uniform N-subset, identical
/// permutations are shared by every N evaluated on the same tree.
uint64_t node_priority(const FamilyTree& tree, uint32_t idx);

/// Mark vector (kAlive / kDagger) of the truncated process evaluated on an
/// already built auxiliary tree.
std::vector<uint8_t> truncation_marks(const FamilyTree& aux, uint32_t N, TruncationMode mode);

/// Root-cluster membership of the marked tree: alive nodes connected to an
/// alive root through alive ancestors. Single forward pass (parents precede
/// children in the arena).
std::vector<uint8_t> root_cluster_flags(const FamilyTree& tree,
                                        const std::vector<uint8_t>& marks);

TruncationResult summarize_truncation(const FamilyTree& aux, const std::vector<uint8_t>& marks,
                                      uint32_t N, TruncationMode mode);

/// Builds the auxiliary tree from (params, tree_key) and applies the
/// truncation. horizon must be >= 1.
TruncatedRun run_truncated(const BrwParams& params, uint32_t N, TruncationMode mode,
                           uint64_t tree_key, const std::shared_ptr<SiteTable>& sites);

struct DominanceReport {
  bool containment_ok = false;  // paper-exact root cluster inside operational alive set
  bool strict = false;          // operational keeps at least one extra node
  uint32_t first_violation = 0xffffffffu;
};

/// Compares a paper_exact and an operational run built from the same
/// auxiliary randomness. Throws std::invalid_argument when the runs are not
/// coupled (different seed or tree shape).
DominanceReport dominance_check(const TruncatedRun& paper, const TruncatedRun& operational);

struct SweepCell {
  uint32_t N = 0;
  uint64_t replicas = 0;
  uint64_t alive = 0;
  double alive_fraction = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_cluster_size = 0.0;
  uint64_t capped_replicas = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // ordered by N ascending
  TruncationMode mode = TruncationMode::paper_exact;
  uint32_t horizon = 0;
  uint64_t replicas = 0;
  double m_rho = 0.0;
  double plain_alive_fraction = 0.0;      // auxiliary (untruncated) process
  Interval plain_ci{};
  uint64_t coupling_violations = 0;       // monotone survivor-set failures (expected 0)
  /// Critical-N bracket: largest N whose upper CI stays below epsilon, and
  /// smallest N whose lower CI clears it.
  std::optional<uint32_t> n_c_bracket_low;
  std::optional<uint32_t> n_c_estimate;
  double epsilon = 0.01;
};

/// Survival sweep over N with common random numbers: one auxiliary tree per
/// replica, every N evaluated on it, survivor sets nested by construction.
/// Replicas are keyed by (master_seed, replica) and may run on any number
/// of workers without changing the result.
SweepResult survival_sweep(const BrwParams& params, const std::vector<uint32_t>& n_values,
                           TruncationMode mode, uint64_t replicas, uint64_t master_seed,
                           double epsilon = 0.01, uint32_t workers = 1);

}  // namespace brw
