// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/family_tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace brw {

uint32_t FamilyTree::generation_of(uint32_t idx) const {
  const auto it = std::upper_bound(gen_end.begin(), gen_end.end(), idx);
  return static_cast<uint32_t>(it - gen_end.begin());
}

void FamilyTree::spot_check_positions() const {
  const GroupSpec& g = sites->spec();
  for (uint32_t i = 0; i < nodes.size(); i += 128) {
    GroupElement expect = start;
    // Walk up to the root collecting steps, then replay them downward.
    std::vector<uint8_t> steps;
    for (uint32_t v = i; nodes[v].parent != kNoParent; v = nodes[v].parent)
      steps.push_back(nodes[v].step);
    for (auto it = steps.rbegin(); it != steps.rend(); ++it)
      expect = g.apply_letter(expect, *it);
    if (!(expect == position(i)))
      throw std::logic_error("family tree: stored position disagrees with step labels");
  }
}

GenerationFront generation_front(const FamilyTree& tree, uint32_t gen) {
  GenerationFront front;
  front.generation = gen;
  if (gen >= tree.generations()) return front;
  for (uint32_t i = tree.gen_begin(gen); i < tree.gen_end[gen]; ++i) {
    front.by_site[tree.nodes[i].site].push_back(i);
    ++front.particle_count;
  }
  return front;
}

std::vector<uint32_t> children_of(const FamilyTree& tree, uint32_t parent) {
  std::vector<uint32_t> out;
  const uint32_t g = tree.generation_of(parent);
  if (g + 1 >= tree.generations()) return out;
  for (uint32_t i = tree.gen_begin(g + 1); i < tree.gen_end[g + 1]; ++i) {
    if (tree.nodes[i].parent == parent) out.push_back(i);
    else if (!out.empty()) break;  // children are contiguous
  }
  return out;
}

}  // namespace brw
