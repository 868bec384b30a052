// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/brw.hpp"

#include <cmath>
#include <stdexcept>

namespace brw {
namespace {

uint32_t draw_offspring(const BrwParams& params, uint64_t node_key) {
  KeyStream s = key_stream(node_key, rng_tag::offspring);
  uint32_t k = params.offspring.sample(s);
  if (params.gamma && k >= 2) {
    KeyStream t = key_stream(node_key, rng_tag::thin);
    if (t.next_unit() > *params.gamma) k = 1;  // keep the first child only
  }
  return k;
}

uint8_t draw_step(const BrwParams& params, uint64_t child_node_key) {
  KeyStream s = key_stream(child_node_key, rng_tag::step);
  return params.step.sample(s);
}

}  // namespace

FamilyTree run_brw(const BrwParams& params, uint64_t tree_key,
                   const std::shared_ptr<SiteTable>& sites) {
  if (params.step.generator_count() != params.group.generator_count())
    throw std::invalid_argument("run_brw: step law does not match the group");
  params.group.check_element(params.start);
  if (params.gamma && (!(*params.gamma > 0.0) || *params.gamma > 1.0))
    throw std::invalid_argument("run_brw: gamma must be in (0, 1]");

  FamilyTree tree;
  tree.sites = sites;
  tree.start = params.start;
  tree.horizon = params.horizon;
  tree.tree_key = tree_key;
  tree.nodes.push_back({FamilyTree::kNoParent, sites->intern(params.start), kIdentityStep, kAlive});
  tree.keys.push_back(tree_key);
  tree.gen_end.push_back(1);

  for (uint32_t g = 0; g < params.horizon; ++g) {
    const uint32_t begin = tree.gen_begin(g);
    const uint32_t end = tree.gen_end[g];
    if (begin == end) break;  // extinct
    bool over_cap = false;
    for (uint32_t i = begin; i < end && !over_cap; ++i) {
      const uint64_t node_key = tree.keys[i];
      const uint32_t k = draw_offspring(params, node_key);
      for (uint32_t slot = 0; slot < k; ++slot) {
        if (tree.nodes.size() >= params.caps.max_nodes) {
          over_cap = true;
          break;
        }
        const uint64_t ck = child_key(node_key, slot);
        const uint8_t step = draw_step(params, ck);
        tree.nodes.push_back({i, sites->step(tree.nodes[i].site, step), step, kAlive});
        tree.keys.push_back(ck);
      }
    }
    if (over_cap) {
      // Drop the partially built generation; the run stays consistent up to
      // a generation boundary and the truncation is reported explicitly.
      tree.nodes.resize(end);
      tree.keys.resize(end);
      tree.capped = true;
      break;
    }
    if (tree.nodes.size() == end) break;  // extinct
    tree.gen_end.push_back(static_cast<uint32_t>(tree.nodes.size()));
  }
  tree.spot_check_positions();
  return tree;
}

bool run_brw_front(const BrwParams& params, uint64_t tree_key, SiteTable& sites,
                   const std::function<void(uint32_t, uint32_t)>& visit) {
  params.group.check_element(params.start);
  struct P {
    uint64_t key;
    uint32_t site;
  };
  std::vector<P> front{{tree_key, sites.intern(params.start)}}, next;
  uint64_t budget = params.caps.max_nodes;
  visit(0, front[0].site);
  --budget;
  for (uint32_t g = 0; g < params.horizon && !front.empty(); ++g) {
    next.clear();
    for (const P& p : front) {
      const uint32_t k = draw_offspring(params, p.key);
      for (uint32_t slot = 0; slot < k; ++slot) {
        if (budget == 0) return false;
        const uint64_t ck = child_key(p.key, slot);
        const uint8_t step = draw_step(params, ck);
        const uint32_t site = sites.step(p.site, step);
        visit(g + 1, site);
        --budget;
        next.push_back({ck, site});
      }
    }
    front.swap(next);
  }
  return true;
}

RegimeClassification classify_survival_regime(double m, double rho) {
  if (!(m > 0.0)) throw std::invalid_argument("classify_survival_regime: m must be positive");
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("classify_survival_regime: rho must be in (0, 1]");
  const double prod = m * rho;
  RegimeClassification c{};
  c.m_rho = prod;
  c.critical = std::abs(prod - 1.0) <= 1e-12;
  c.regime = (prod > 1.0 && !c.critical) ? SurvivalRegime::strong : SurvivalRegime::weak_or_extinct;
  return c;
}

uint64_t visit_count(const FamilyTree& tree, const GroupElement& target) {
  const auto site = tree.sites->find(target);
  if (!site) return 0;
  uint64_t count = 0;
  for (const auto& n : tree.nodes)
    if (n.site == *site) ++count;
  return count;
}

BallOccupancy visits_in_ball(const FamilyTree& tree, const GroupElement& center,
                             uint32_t radius) {
  const GroupSpec& g = tree.sites->spec();
  g.check_element(center);
  // Classify each distinct site once; sites are few relative to nodes.
  std::unordered_map<uint32_t, bool> inside;
  BallOccupancy occ;
  for (const auto& n : tree.nodes) {
    auto it = inside.find(n.site);
    if (it == inside.end()) {
      const bool in = g.word_distance(center, tree.sites->element(n.site)) <= radius;
      it = inside.emplace(n.site, in).first;
    }
    if (it->second) {
      ++occ.total;
      ++occ.by_site[n.site];
    }
  }
  return occ;
}

LastExit last_exit(const FamilyTree& tree, uint32_t radius) {
  const GroupSpec& g = tree.sites->spec();
  std::unordered_map<uint32_t, bool> inside;
  LastExit r;
  uint32_t last_gen_touching = 0;
  bool touched = false;
  for (uint32_t i = 0; i < tree.nodes.size(); ++i) {
    const uint32_t site = tree.nodes[i].site;
    auto it = inside.find(site);
    if (it == inside.end()) {
      const bool in = g.word_distance(tree.start, tree.sites->element(site)) <= radius;
      it = inside.emplace(site, in).first;
    }
    if (it->second) {
      last_gen_touching = tree.generation_of(i);
      touched = true;
    }
  }
  r.value = touched ? static_cast<uint64_t>(last_gen_touching) + 1 : 0;
  // Censored if the run was still inside the ball when simulation stopped
  // for an external reason (horizon or cap) rather than extinction.
  const bool ran_full = tree.capped || tree.last_generation() == tree.horizon;
  r.censored = ran_full && touched && last_gen_touching == tree.last_generation();
  return r;
}

}  // namespace brw
