// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "brwlab/group.hpp"

namespace brw {

inline constexpr uint8_t kAlive = 0;   // bullet mark
inline constexpr uint8_t kDagger = 1;  // dagger mark

/// Append-only arena of a generation-synchronous branching run. Nodes are
/// stored in generation order (every parent precedes its children), which
/// lets root-cluster extraction run as a single forward pass without child
/// lists. Positions are interned site ids into a shared SiteTable.
struct FamilyTree {
  static constexpr uint32_t kNoParent = 0xffffffffu;

  struct Node {
    uint32_t parent;
    uint32_t site;
    uint8_t step;  // generator letter, or kIdentityStep for a lazy move
    uint8_t mark;
  };

  std::vector<Node> nodes;
  std::vector<uint64_t> keys;      // per-node draw keys (path-determined)
  std::vector<uint32_t> gen_end;   // gen_end[g] = one past the last node of generation g
  std::shared_ptr<SiteTable> sites;
  GroupElement start;
  uint32_t horizon = 0;
  bool capped = false;             // node cap hit; run truncated at a generation boundary
  uint64_t tree_key = 0;

  uint32_t generations() const { return static_cast<uint32_t>(gen_end.size()); }
  uint32_t last_generation() const { return generations() - 1; }
  bool alive_at(uint32_t gen) const { return gen < generations() && gen_size(gen) > 0; }

  uint32_t gen_begin(uint32_t g) const { return g == 0 ? 0 : gen_end[g - 1]; }
  uint32_t gen_size(uint32_t g) const { return gen_end[g] - gen_begin(g); }

  uint32_t generation_of(uint32_t idx) const;
  const GroupElement& position(uint32_t idx) const { return sites->element(nodes[idx].site); }

  /// Recomputes node positions from the root along step labels for roughly
  /// every 128th node; throws std::logic_error on mismatch.
  void spot_check_positions() const;
};

/// Per-generation view: node indices grouped by occupied site.
struct GenerationFront {
  uint32_t generation = 0;
  std::unordered_map<uint32_t, std::vector<uint32_t>> by_site;
  size_t particle_count = 0;
};

GenerationFront generation_front(const FamilyTree& tree, uint32_t gen);

/// Children of `parent` (contiguous in the next generation by construction).
std::vector<uint32_t> children_of(const FamilyTree& tree, uint32_t parent);

}  // namespace brw
