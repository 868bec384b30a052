// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "brwlab/competing.hpp"
#include "brwlab/rng.hpp"

using namespace brw;

namespace {

CompetingParams f2_pair(std::vector<double> probs, uint32_t horizon, uint32_t start_dist) {
  GroupSpec g = GroupSpec::free_group(2);
  GroupElement start = g.identity();
  for (uint32_t i = 0; i < start_dist; ++i) start = g.apply_letter(start, i % 2 == 0 ? 0 : 2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  OffspringDistribution mu = OffspringDistribution::from_probs(std::move(probs));
  return CompetingParams{g, q, q, mu, mu, start, horizon, Caps{}};
}

// Element-level view of a run's seeded sites, comparable across site tables.
std::set<std::string> seeded_elements(const AdaptedRun& run, const SiteTable& sites) {
  std::set<std::string> out;
  for (uint32_t s : run.seeded_sites) out.insert(sites.spec().to_string(sites.element(s)));
  return out;
}

}  // namespace

TEST_CASE("contact marks match a brute-force recheck of the kill rule") {
  CompetingParams p = f2_pair({0.2, 0.3, 0.5}, 12, 2);
  for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    auto sites = std::make_shared<SiteTable>(p.group);
    PairRun run = run_competing(p, seed, sites);
    for (uint32_t g = 0; g < run.noninvasive.generations(); ++g) {
      std::unordered_set<uint32_t> killers;
      if (g < run.invasive.generations()) {
        for (uint32_t i = run.invasive.gen_begin(g); i < run.invasive.gen_end[g]; ++i)
          killers.insert(run.invasive.nodes[i].site);
      }
      for (uint32_t i = run.noninvasive.gen_begin(g); i < run.noninvasive.gen_end[g]; ++i) {
        const bool contact = killers.count(run.noninvasive.nodes[i].site) > 0;
        CHECK((run.noninvasive.nodes[i].mark == kDagger) == contact);
      }
    }
  }
}

TEST_CASE("the invasive tree ignores the noninvasive process") {
  CompetingParams p = f2_pair({0.2, 0.3, 0.5}, 10, 3);
  auto shared = std::make_shared<SiteTable>(p.group);
  PairRun run = run_competing(p, 99, shared);

  BrwParams solo{p.group, p.step_invasive, p.offspring_invasive, p.start_invasive,
                 p.horizon, p.caps, std::nullopt};
  auto fresh = std::make_shared<SiteTable>(p.group);
  FamilyTree alone = run_brw(solo, derive_key(99, rng_tag::invasive), fresh);

  REQUIRE(run.invasive.nodes.size() == alone.nodes.size());
  CHECK(run.invasive.gen_end == alone.gen_end);
  CHECK(run.invasive.keys == alone.keys);
  for (uint32_t i = 0; i < alone.nodes.size(); ++i) {
    CHECK(run.invasive.nodes[i].parent == alone.nodes[i].parent);
    CHECK(run.invasive.nodes[i].step == alone.nodes[i].step);
    CHECK(run.invasive.position(i) == alone.position(i));
  }
}

TEST_CASE("adjacent single lineages collide with probability two twenty-fifths") {
  // One child each per generation, invasive started on a neighbouring site.
  // In generation one the walkers share a site iff both held (0.2 * 0.2) or
  // the invasive walker stepped onto the origin while the noninvasive one
  // stepped onto its start (0.2 * 0.2): together 0.08.
  CompetingParams p = f2_pair({0.0, 1.0}, 1, 1);
  uint64_t collisions = 0;
  const uint64_t reps = 6000;
  for (uint64_t r = 0; r < reps; ++r) {
    auto sites = std::make_shared<SiteTable>(p.group);
    PairRun run = run_competing(p, mix64(r ^ 0xc0ffee), sites);
    REQUIRE(run.noninvasive.nodes.size() == 2);
    if (run.noninvasive.nodes[1].mark == kDagger) ++collisions;
    // the roots start apart, so generation zero never collides
    CHECK(run.noninvasive.nodes[0].mark == kAlive);
  }
  const double frac = static_cast<double>(collisions) / static_cast<double>(reps);
  const double se = std::sqrt(0.08 * 0.92 / static_cast<double>(reps));
  CHECK(std::abs(frac - 0.08) < 4 * se);
}

TEST_CASE("coexistence cells are consistent and prefix-stable") {
  CompetingParams p = f2_pair({0.2, 0.55, 0.25}, 0, 2);
  CoexistenceResult both = estimate_coexistence(p, {8, 16}, 500, 31415, 2);
  REQUIRE(both.cells.size() == 2);
  CHECK(both.cells[0].horizon == 8);
  CHECK(both.cells[1].horizon == 16);
  for (const auto& cell : both.cells) {
    CHECK(cell.joint <= cell.inv_alive);
    CHECK(cell.joint <= cell.noninv_alive);
    CHECK(cell.joint_frac >= cell.joint_ci.low);
    CHECK(cell.joint_frac <= cell.joint_ci.high);
  }
  // survival only shrinks with the horizon
  CHECK(both.cells[1].joint <= both.cells[0].joint);
  CHECK(both.cells[1].inv_alive <= both.cells[0].inv_alive);

  // a run stopped at the shorter horizon reproduces the same counts
  CoexistenceResult early = estimate_coexistence(p, {8}, 500, 31415, 1);
  CHECK(early.cells[0].inv_alive == both.cells[0].inv_alive);
  CHECK(early.cells[0].noninv_alive == both.cells[0].noninv_alive);
  CHECK(early.cells[0].joint == both.cells[0].joint);

  // pair mode can never mark the noninvasive root
  CHECK(both.noninv_root_dagger == 0);

  // scheduling independence
  CoexistenceResult serial = estimate_coexistence(p, {8, 16}, 500, 31415, 1);
  for (size_t j = 0; j < 2; ++j) {
    CHECK(serial.cells[j].inv_alive == both.cells[j].inv_alive);
    CHECK(serial.cells[j].noninv_alive == both.cells[j].noninv_alive);
    CHECK(serial.cells[j].joint == both.cells[j].joint);
  }
}

TEST_CASE("pair mode rejects a shared starting site") {
  CompetingParams p = f2_pair({0.2, 0.3, 0.5}, 5, 1);
  p.start_invasive = p.group.identity();
  auto sites = std::make_shared<SiteTable>(p.group);
  CHECK_THROWS_AS((void)run_competing(p, 1, sites), std::invalid_argument);
  p.start_invasive = p.group.generator(0);
  p.horizon = 0;
  CHECK_THROWS_AS((void)run_competing(p, 1, sites), std::invalid_argument);
}

TEST_CASE("an always-hit window with one required visit kills the root") {
  AdaptedParams ap{f2_pair({0.2, 0.55, 0.25}, 10, 1), 1, 1.0, 0, 1000};
  for (uint64_t seed : {5ull, 6ull, 7ull}) {
    auto sites = std::make_shared<SiteTable>(ap.base.group);
    AdaptedRun run = run_adapted(ap, seed, sites);
    // the root itself gives the origin multiplicity one, so the origin is
    // always seeded and its copy starts right on it
    REQUIRE(run.seeded_sites.size() >= 1);
    CHECK(run.root_dagger);
    CHECK_FALSE(run.noninv_alive_at_horizon);
    CHECK(run.dagger_nodes >= 1);
  }
}

TEST_CASE("an unreachable multiplicity threshold seeds nothing") {
  AdaptedParams ap{f2_pair({0.2, 0.55, 0.25}, 10, 1), 1000000, 1.0, 3, 1000};
  auto sites = std::make_shared<SiteTable>(ap.base.group);
  AdaptedRun run = run_adapted(ap, 11, sites);
  CHECK(run.seeded_sites.empty());
  CHECK(run.dagger_nodes == 0);
  CHECK_FALSE(run.root_dagger);
  // with no killers the horizon question reduces to plain survival
  CHECK(run.noninv_alive_at_horizon == run.noninvasive.alive_at(10));
}

TEST_CASE("raising the multiplicity threshold only removes killers") {
  AdaptedParams lo{f2_pair({0.1, 0.3, 0.6}, 12, 1), 1, 0.7, 2, 100000};
  AdaptedParams hi = lo;
  hi.N = 3;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    auto s_lo = std::make_shared<SiteTable>(lo.base.group);
    auto s_hi = std::make_shared<SiteTable>(hi.base.group);
    AdaptedRun run_lo = run_adapted(lo, seed, s_lo);
    AdaptedRun run_hi = run_adapted(hi, seed, s_hi);
    // identical attenuated trees, nested seed sets, nested marks
    REQUIRE(run_lo.noninvasive.keys == run_hi.noninvasive.keys);
    auto elems_lo = seeded_elements(run_lo, *s_lo);
    auto elems_hi = seeded_elements(run_hi, *s_hi);
    CHECK(std::includes(elems_lo.begin(), elems_lo.end(), elems_hi.begin(), elems_hi.end()));
    for (uint32_t i = 0; i < run_hi.noninvasive.nodes.size(); ++i) {
      if (run_hi.noninvasive.nodes[i].mark == kDagger)
        CHECK(run_lo.noninvasive.nodes[i].mark == kDagger);
    }
    CHECK(run_hi.dagger_nodes <= run_lo.dagger_nodes);
    if (run_hi.root_dagger) CHECK(run_lo.root_dagger);
  }
}

TEST_CASE("stronger branching only adds killers") {
  AdaptedParams thin{f2_pair({0.1, 0.3, 0.6}, 12, 1), 2, 0.4, 2, 100000};
  AdaptedParams thick = thin;
  thick.gamma = 0.9;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    auto s_thin = std::make_shared<SiteTable>(thin.base.group);
    auto s_thick = std::make_shared<SiteTable>(thick.base.group);
    AdaptedRun run_thin = run_adapted(thin, seed, s_thin);
    AdaptedRun run_thick = run_adapted(thick, seed, s_thick);
    auto elems_thin = seeded_elements(run_thin, *s_thin);
    auto elems_thick = seeded_elements(run_thick, *s_thick);
    CHECK(std::includes(elems_thick.begin(), elems_thick.end(), elems_thin.begin(),
                        elems_thin.end()));
    if (run_thin.root_dagger) CHECK(run_thick.root_dagger);
  }
}

TEST_CASE("the seeded-copy budget is enforced and flagged") {
  AdaptedParams ap{f2_pair({0.1, 0.2, 0.7}, 10, 1), 1, 1.0, 2, 2};
  auto sites = std::make_shared<SiteTable>(ap.base.group);
  AdaptedRun run = run_adapted(ap, 3, sites);
  CHECK(run.seed_cap_hit);
  CHECK(run.seeded_sites.size() == 2);
}

TEST_CASE("dagger marginal summarizes the root marks") {
  AdaptedParams ap{f2_pair({0.2, 0.55, 0.25}, 8, 1), 2, 0.8, 1, 1000};
  std::vector<AdaptedRun> runs;
  uint64_t expect = 0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    auto sites = std::make_shared<SiteTable>(ap.base.group);
    runs.push_back(run_adapted(ap, seed, sites));
    expect += runs.back().root_dagger ? 1 : 0;
  }
  DaggerMarginal m = estimate_dagger_marginal(runs);
  CHECK(m.replicas == 50);
  CHECK(m.low_sample);
  CHECK(m.dagger_frac == doctest::Approx(static_cast<double>(expect) / 50.0));
  CHECK(m.ci.low <= m.dagger_frac);
  CHECK(m.ci.high >= m.dagger_frac);
  CHECK_THROWS_AS((void)estimate_dagger_marginal({}), std::invalid_argument);
}

TEST_CASE("adapted parameter validation") {
  AdaptedParams ap{f2_pair({0.2, 0.55, 0.25}, 8, 1), 1, 1.0, 1, 1000};
  auto sites = std::make_shared<SiteTable>(ap.base.group);
  ap.N = 0;
  CHECK_THROWS_AS((void)run_adapted(ap, 1, sites), std::invalid_argument);
  ap.N = 1;
  ap.gamma = 0.0;
  CHECK_THROWS_AS((void)run_adapted(ap, 1, sites), std::invalid_argument);
  ap.gamma = 1.5;
  CHECK_THROWS_AS((void)run_adapted(ap, 1, sites), std::invalid_argument);
}
