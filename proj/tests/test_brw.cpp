// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/family_tree.hpp"
#include "brwlab/group.hpp"
#include "brwlab/offspring.hpp"
#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/walk_dp.hpp"

using namespace brw;

namespace {

BrwParams f2_params(std::vector<double> probs, uint32_t horizon) {
  GroupSpec g = GroupSpec::free_group(2);
  BrwParams p{g,
              StepDistribution::uniform_lazy(g, 0.2),
              OffspringDistribution::from_probs(std::move(probs)),
              g.identity(),
              horizon,
              Caps{},
              std::nullopt};
  return p;
}

}  // namespace

TEST_CASE("arena layout: parents precede children and positions follow steps") {
  BrwParams p = f2_params({0.2, 0.3, 0.5}, 14);
  auto sites = std::make_shared<SiteTable>(p.group);
  FamilyTree tree = run_brw(p, 42, sites);

  REQUIRE(!tree.nodes.empty());
  CHECK(tree.nodes[0].parent == FamilyTree::kNoParent);
  CHECK(tree.position(0) == p.group.identity());
  for (uint32_t i = 1; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    REQUIRE(n.parent < i);
    CHECK(tree.generation_of(i) == tree.generation_of(n.parent) + 1);
    // the full version of the sampled spot check
    CHECK(tree.position(i) == p.group.apply_letter(tree.position(n.parent), n.step));
  }
  CHECK_NOTHROW(tree.spot_check_positions());
  CHECK(tree.gen_end.back() == tree.nodes.size());
  CHECK(tree.keys.size() == tree.nodes.size());
}

TEST_CASE("same key reruns are bit-identical, different keys diverge") {
  BrwParams p = f2_params({0.2, 0.3, 0.5}, 12);
  auto s1 = std::make_shared<SiteTable>(p.group);
  auto s2 = std::make_shared<SiteTable>(p.group);
  FamilyTree a = run_brw(p, 1234, s1);
  FamilyTree b = run_brw(p, 1234, s2);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (uint32_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].parent == b.nodes[i].parent);
    CHECK(a.nodes[i].step == b.nodes[i].step);
    CHECK(a.keys[i] == b.keys[i]);
    CHECK(a.position(i) == b.position(i));
  }
  FamilyTree c = run_brw(p, 1235, s1);
  const bool same_shape = c.nodes.size() == a.nodes.size() && c.gen_end == a.gen_end;
  CHECK_FALSE(same_shape);
}

TEST_CASE("single-offspring law produces one lineage") {
  BrwParams p = f2_params({0.0, 1.0}, 10);
  auto sites = std::make_shared<SiteTable>(p.group);
  FamilyTree tree = run_brw(p, 7, sites);
  CHECK(tree.nodes.size() == 11);
  for (uint32_t g = 0; g <= 10; ++g) CHECK(tree.gen_size(g) == 1);
  CHECK(tree.alive_at(10));
}

TEST_CASE("population mean tracks the offspring mean power") {
  BrwParams p = f2_params({0.2, 0.3, 0.5}, 8);
  auto sites = std::make_shared<SiteTable>(p.group);
  const uint64_t reps = 2000;
  MeanAcc acc;
  for (uint64_t r = 0; r < reps; ++r) {
    FamilyTree tree = run_brw(p, mix64(r ^ 0xabcdef), sites);
    acc.add(tree.alive_at(8) ? static_cast<double>(tree.gen_size(8)) : 0.0);
  }
  const double m = 1.3;
  const double expected = std::pow(m, 8);
  // Var Z_n = sigma^2 m^(n-1) (m^n - 1)/(m - 1) with sigma^2 = 0.61
  const double var = 0.61 * std::pow(m, 7) * (std::pow(m, 8) - 1.0) / (m - 1.0);
  const double se = std::sqrt(var / static_cast<double>(reps));
  CHECK(std::abs(acc.mean() - expected) < 4.0 * se);
}

TEST_CASE("extinction heavy laws die and stay dead") {
  BrwParams p = f2_params({0.9, 0.1}, 40);
  auto sites = std::make_shared<SiteTable>(p.group);
  int alive = 0;
  for (uint64_t r = 0; r < 200; ++r) {
    FamilyTree tree = run_brw(p, mix64(r), sites);
    if (tree.alive_at(40)) ++alive;
    // no generation after the first empty one
    bool dead = false;
    for (uint32_t g = 0; g < tree.generations(); ++g) {
      if (dead) CHECK(tree.gen_size(g) == 0);
      if (tree.gen_size(g) == 0) dead = true;
    }
  }
  CHECK(alive == 0);  // survival of mean-0.1 offspring for 40 generations
}

TEST_CASE("node cap truncates at a generation boundary") {
  BrwParams p = f2_params({0.0, 0.0, 1.0}, 30);  // deterministic doubling
  p.caps.max_nodes = 100;
  auto sites = std::make_shared<SiteTable>(p.group);
  FamilyTree tree = run_brw(p, 3, sites);
  CHECK(tree.capped);
  CHECK(tree.generations() < 31);
  CHECK(tree.gen_end.back() == tree.nodes.size());
  // every stored generation is complete: 2^g nodes each
  for (uint32_t g = 0; g < tree.generations(); ++g)
    CHECK(tree.gen_size(g) == (uint32_t{1} << g));
}

TEST_CASE("branching attenuation couples as nested subtrees") {
  BrwParams plain = f2_params({0.1, 0.3, 0.6}, 12);
  BrwParams lo = plain, hi = plain;
  lo.gamma = 0.3;
  hi.gamma = 0.8;
  auto sites = std::make_shared<SiteTable>(plain.group);
  for (uint64_t key : {11ull, 22ull, 33ull, 44ull}) {
    FamilyTree t_plain = run_brw(plain, key, sites);
    FamilyTree t_lo = run_brw(lo, key, sites);
    FamilyTree t_hi = run_brw(hi, key, sites);
    std::set<uint64_t> k_plain(t_plain.keys.begin(), t_plain.keys.end());
    std::set<uint64_t> k_lo(t_lo.keys.begin(), t_lo.keys.end());
    std::set<uint64_t> k_hi(t_hi.keys.begin(), t_hi.keys.end());
    CHECK(std::includes(k_hi.begin(), k_hi.end(), k_lo.begin(), k_lo.end()));
    CHECK(std::includes(k_plain.begin(), k_plain.end(), k_hi.begin(), k_hi.end()));
    // gamma = 1 is exactly the plain process
    BrwParams one = plain;
    one.gamma = 1.0;
    FamilyTree t_one = run_brw(one, key, sites);
    CHECK(t_one.keys == t_plain.keys);
    CHECK(t_one.gen_end == t_plain.gen_end);
  }
}

TEST_CASE("generation fronts group nodes by site") {
  BrwParams p = f2_params({0.1, 0.4, 0.5}, 10);
  auto sites = std::make_shared<SiteTable>(p.group);
  FamilyTree tree = run_brw(p, 99, sites);
  for (uint32_t g = 0; g < tree.generations(); ++g) {
    GenerationFront front = generation_front(tree, g);
    CHECK(front.generation == g);
    CHECK(front.particle_count == tree.gen_size(g));
    size_t seen = 0;
    for (const auto& [site, idxs] : front.by_site) {
      for (uint32_t idx : idxs) {
        CHECK(tree.nodes[idx].site == site);
        CHECK(tree.generation_of(idx) == g);
      }
      seen += idxs.size();
    }
    CHECK(seen == front.particle_count);
  }
}

TEST_CASE("children lists are contiguous and complete") {
  BrwParams p = f2_params({0.2, 0.3, 0.5}, 10);
  auto sites = std::make_shared<SiteTable>(p.group);
  FamilyTree tree = run_brw(p, 5150, sites);
  std::map<uint32_t, std::vector<uint32_t>> by_parent;
  for (uint32_t i = 1; i < tree.nodes.size(); ++i)
    by_parent[tree.nodes[i].parent].push_back(i);
  for (uint32_t i = 0; i < tree.nodes.size(); ++i) {
    auto kids = children_of(tree, i);
    auto it = by_parent.find(i);
    if (it == by_parent.end()) {
      CHECK(kids.empty());
    } else {
      CHECK(kids == it->second);
    }
  }
}

TEST_CASE("front-only run visits the same particles as the arena") {
  BrwParams p = f2_params({0.2, 0.3, 0.5}, 10);
  auto arena_sites = std::make_shared<SiteTable>(p.group);
  FamilyTree tree = run_brw(p, 314, arena_sites);
  std::map<uint32_t, std::map<std::string, int>> arena_count, front_count;
  for (uint32_t i = 0; i < tree.nodes.size(); ++i)
    arena_count[tree.generation_of(i)][p.group.to_string(tree.position(i))]++;
  SiteTable front_sites(p.group);
  bool ok = run_brw_front(p, 314, front_sites, [&](uint32_t gen, uint32_t site) {
    front_count[gen][p.group.to_string(front_sites.element(site))]++;
  });
  CHECK(ok);
  CHECK(arena_count == front_count);
}

TEST_CASE("front-only run reports budget exhaustion") {
  BrwParams p = f2_params({0.0, 0.0, 1.0}, 30);
  p.caps.max_nodes = 50;
  SiteTable sites(p.group);
  uint64_t visited = 0;
  bool ok = run_brw_front(p, 3, sites, [&](uint32_t, uint32_t) { ++visited; });
  CHECK_FALSE(ok);
  CHECK(visited <= 2 * 50);
}

TEST_CASE("survival regime classification") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  const double rho = spectral_radius_closed(g, q);
  RegimeClassification weak = classify_survival_regime(1.05, rho);
  CHECK(weak.regime == SurvivalRegime::weak_or_extinct);
  CHECK(weak.m_rho == doctest::Approx(0.9374613391789284).epsilon(1e-12));
  CHECK_FALSE(weak.critical);
  RegimeClassification strong = classify_survival_regime(1.2, rho);
  CHECK(strong.regime == SurvivalRegime::strong);
  RegimeClassification crit = classify_survival_regime(1.0 / rho, rho);
  CHECK(crit.critical);
}

TEST_CASE("occupation statistics agree with brute force") {
  BrwParams p = f2_params({0.1, 0.4, 0.5}, 12);
  auto sites = std::make_shared<SiteTable>(p.group);
  for (uint64_t key : {100ull, 200ull, 300ull}) {
    FamilyTree tree = run_brw(p, key, sites);

    // visit_count at a nontrivial target
    GroupElement target = p.group.generator(0);
    uint64_t direct = 0;
    for (uint32_t i = 0; i < tree.nodes.size(); ++i)
      if (tree.position(i) == target) ++direct;
    CHECK(visit_count(tree, target) == direct);

    // ball occupancy around the origin
    for (uint32_t radius : {0u, 1u, 3u}) {
      BallOccupancy occ = visits_in_ball(tree, p.group.identity(), radius);
      uint64_t total = 0;
      for (uint32_t i = 0; i < tree.nodes.size(); ++i)
        if (p.group.word_length(tree.position(i)) <= radius) ++total;
      CHECK(occ.total == total);
      uint64_t by_site_sum = 0;
      for (const auto& [site, cnt] : occ.by_site) {
        CHECK(p.group.word_length(sites->element(site)) <= radius);
        by_site_sum += cnt;
      }
      CHECK(by_site_sum == total);
    }

    // last exit from the radius-2 ball
    LastExit le = last_exit(tree, 2);
    uint32_t last_gen_in_ball = 0;
    bool ever = false;
    for (uint32_t i = 0; i < tree.nodes.size(); ++i) {
      if (p.group.word_length(tree.position(i)) <= 2) {
        last_gen_in_ball = tree.generation_of(i);
        ever = true;
      }
    }
    REQUIRE(ever);  // the root sits in the ball
    CHECK(le.value == uint64_t{last_gen_in_ball} + 1);
    // Censoring needs an external stop: extinction settles the question.
    const bool ran_full = tree.capped || tree.last_generation() == p.horizon;
    CHECK(le.censored == (ran_full && last_gen_in_ball == tree.last_generation()));
  }
}
