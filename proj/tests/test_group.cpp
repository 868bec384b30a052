// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "brwlab/group.hpp"
#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"

using namespace brw;

namespace {

GroupElement random_element(const GroupSpec& g, uint32_t steps, Rng& rng) {
  GroupElement x = g.identity();
  for (uint32_t i = 0; i < steps; ++i)
    x = g.apply_letter(x, static_cast<uint8_t>(rng.uniform_below(g.generator_count())));
  return x;
}

// Breadth-first enumeration of balls, the slow independent counterpart of
// the closed-form sphere sizes.
std::vector<uint64_t> bfs_sphere_counts(const GroupSpec& g, uint32_t r_max) {
  std::unordered_set<GroupElement, GroupElementHash> seen;
  std::vector<GroupElement> frontier{g.identity()};
  seen.insert(g.identity());
  std::vector<uint64_t> counts{1};
  for (uint32_t r = 1; r <= r_max; ++r) {
    std::vector<GroupElement> next;
    for (const auto& x : frontier) {
      for (uint8_t l = 0; l < g.generator_count(); ++l) {
        GroupElement y = g.apply_letter(x, l);
        if (seen.insert(y).second) next.push_back(y);
      }
    }
    counts.push_back(next.size());
    frontier = std::move(next);
  }
  return counts;
}

}  // namespace

TEST_CASE("free group words reduce eagerly") {
  GroupSpec g = GroupSpec::free_group(2);
  GroupElement a = g.generator(0);
  CHECK(g.apply_letter(a, g.inverse_letter(0)) == g.identity());
  // a b b^-1 a = a a
  GroupElement x = g.apply_letter(a, 2);
  x = g.apply_letter(x, 3);
  x = g.apply_letter(x, 0);
  CHECK(x.letters == std::vector<uint8_t>{0, 0});
  CHECK(g.word_length(x) == 2);
  CHECK_NOTHROW(g.check_element(x));
}

TEST_CASE("c2 product generators are involutions") {
  GroupSpec g = GroupSpec::free_product_c2(3);
  for (uint8_t l = 0; l < 3; ++l) {
    CHECK(g.inverse_letter(l) == l);
    CHECK(g.apply_letter(g.generator(l), l) == g.identity());
  }
  // alternating letters never reduce
  GroupElement x = g.identity();
  for (uint32_t i = 0; i < 9; ++i) x = g.apply_letter(x, static_cast<uint8_t>(i % 2));
  CHECK(g.word_length(x) == 9);
}

TEST_CASE("lattice composition is coordinate addition") {
  GroupSpec g = GroupSpec::integer_lattice(3);
  GroupElement x = g.identity();
  x = g.apply_letter(x, 0);  // +e_0
  x = g.apply_letter(x, 0);
  x = g.apply_letter(x, 3);  // -e_1
  CHECK(x.coords == std::vector<int32_t>{2, -1, 0});
  CHECK(g.word_length(x) == 3);
  CHECK(g.compose(x, g.inverse(x)) == g.identity());
}

TEST_CASE("sphere sizes match breadth-first enumeration") {
  SUBCASE("rank-2 free group up to radius 8") {
    GroupSpec g = GroupSpec::free_group(2);
    auto counts = bfs_sphere_counts(g, 8);
    CHECK(counts[8] == 8748);  // 4 * 3^7
    for (uint32_t r = 0; r <= 8; ++r)
      CHECK(static_cast<double>(counts[r]) == doctest::Approx(g.sphere_size(r)));
  }
  SUBCASE("three-factor c2 product up to radius 12") {
    GroupSpec g = GroupSpec::free_product_c2(3);
    auto counts = bfs_sphere_counts(g, 12);
    CHECK(counts[12] == 6144);  // 3 * 2^11
    for (uint32_t r = 0; r <= 12; ++r)
      CHECK(static_cast<double>(counts[r]) == doctest::Approx(g.sphere_size(r)));
  }
  SUBCASE("lattice spheres have no closed form here") {
    GroupSpec g = GroupSpec::integer_lattice(2);
    CHECK_THROWS_AS((void)g.sphere_size(3), std::invalid_argument);
  }
}

TEST_CASE("word metric satisfies the metric axioms") {
  Rng rng(2026);
  auto check_axioms = [&](const GroupSpec& g) {
    for (int i = 0; i < 200; ++i) {
      GroupElement x = random_element(g, rng.uniform_below(12), rng);
      GroupElement y = random_element(g, rng.uniform_below(12), rng);
      GroupElement z = random_element(g, rng.uniform_below(12), rng);
      const uint64_t dxy = g.word_distance(x, y);
      CHECK(dxy == g.word_distance(y, x));
      CHECK((dxy == 0) == (x == y));
      CHECK(dxy <= g.word_distance(x, z) + g.word_distance(z, y));
      // left invariance
      CHECK(dxy == g.word_distance(g.compose(z, x), g.compose(z, y)));
      // consistency with reduced word length
      CHECK(dxy == g.word_length(g.compose(g.inverse(x), y)));
    }
  };
  check_axioms(GroupSpec::free_group(2));
  check_axioms(GroupSpec::free_product_c2(4));
  check_axioms(GroupSpec::integer_lattice(2));
}

TEST_CASE("group operations satisfy group laws on random elements") {
  Rng rng(7);
  for (const GroupSpec& g : {GroupSpec::free_group(3), GroupSpec::free_product_c2(3),
                             GroupSpec::integer_lattice(1)}) {
    for (int i = 0; i < 100; ++i) {
      GroupElement x = random_element(g, rng.uniform_below(10), rng);
      GroupElement y = random_element(g, rng.uniform_below(10), rng);
      GroupElement z = random_element(g, rng.uniform_below(10), rng);
      CHECK(g.compose(g.compose(x, y), z) == g.compose(x, g.compose(y, z)));
      CHECK(g.compose(x, g.identity()) == x);
      CHECK(g.compose(x, g.inverse(x)) == g.identity());
      CHECK(g.inverse(g.compose(x, y)) == g.compose(g.inverse(y), g.inverse(x)));
    }
  }
}

TEST_CASE("growth rates") {
  CHECK(GroupSpec::free_group(2).growth_rate() == doctest::Approx(std::log(3.0)));
  CHECK(GroupSpec::free_product_c2(3).growth_rate() == doctest::Approx(std::log(2.0)));
  CHECK(GroupSpec::free_product_c2(4).growth_rate() == doctest::Approx(std::log(3.0)));
  CHECK(GroupSpec::integer_lattice(4).growth_rate() == 0.0);
}

TEST_CASE("check_element rejects malformed elements") {
  GroupSpec f2 = GroupSpec::free_group(2);
  GroupElement bad;
  bad.letters = {0, 1};  // a a^-1: unreduced
  CHECK_THROWS_AS(f2.check_element(bad), std::invalid_argument);
  bad.letters = {9};  // letter out of range
  CHECK_THROWS_AS(f2.check_element(bad), std::invalid_argument);

  GroupSpec c23 = GroupSpec::free_product_c2(3);
  bad.letters = {1, 1};  // involutive square: unreduced
  CHECK_THROWS_AS(c23.check_element(bad), std::invalid_argument);

  GroupSpec z2 = GroupSpec::integer_lattice(2);
  bad = GroupElement{};
  bad.coords = {1};  // wrong dimension
  CHECK_THROWS_AS(z2.check_element(bad), std::invalid_argument);
}

TEST_CASE("constructor parameter floors") {
  CHECK_THROWS_AS(GroupSpec::integer_lattice(0), std::invalid_argument);
  CHECK_THROWS_AS(GroupSpec::free_group(1), std::invalid_argument);
  CHECK_THROWS_AS(GroupSpec::free_product_c2(2), std::invalid_argument);
}

TEST_CASE("uniform lazy step law") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  CHECK(q.laziness() == doctest::Approx(0.2));
  CHECK(q.isotropic());
  double total = q.laziness();
  for (uint8_t l = 0; l < 4; ++l) {
    CHECK(q.weight(l) == doctest::Approx(0.2));
    total += q.weight(l);
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("explicit step weights are validated and symmetrized") {
  GroupSpec g = GroupSpec::free_group(2);
  // a and a^-1 must carry equal weight
  CHECK_THROWS_AS(StepDistribution::from_weights(g, {0.3, 0.1, 0.2, 0.2}, 0.2),
                  std::invalid_argument);
  // weights must sum to 1 - laziness
  CHECK_THROWS_AS(StepDistribution::from_weights(g, {0.2, 0.2, 0.2, 0.2}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::from_weights(g, {0.4, 0.4}, 0.2), std::invalid_argument);
  StepDistribution q = StepDistribution::from_weights(g, {0.3, 0.3, 0.1, 0.1}, 0.2);
  CHECK_FALSE(q.isotropic());
  CHECK(q.weight(0) == doctest::Approx(0.3));
  // laziness must be strictly positive (periodicity guard) and below 1
  CHECK_THROWS_AS(StepDistribution::uniform_lazy(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(StepDistribution::uniform_lazy(g, 1.0), std::invalid_argument);
}

TEST_CASE("step sampling matches the law") {
  GroupSpec g = GroupSpec::free_product_c2(3);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.25);
  Rng rng(99);
  const uint64_t n = 200000;
  std::vector<uint64_t> counts(4, 0);  // 3 letters + lazy
  for (uint64_t i = 0; i < n; ++i) {
    uint8_t s = q.sample(rng);
    counts[s == kIdentityStep ? 3 : s]++;
  }
  ChiSquareTest t = chi_square_gof(counts, {0.25, 0.25, 0.25, 0.25});
  CHECK(t.p_value > 1e-3);
}

TEST_CASE("site table interns canonical elements once") {
  GroupSpec g = GroupSpec::free_group(2);
  SiteTable sites(g);
  uint32_t origin = sites.intern(g.identity());
  CHECK(origin == 0);
  uint32_t a = sites.step(origin, 0);
  uint32_t back = sites.step(a, 1);
  CHECK(back == origin);
  CHECK(sites.step(origin, kIdentityStep) == origin);
  CHECK(sites.intern(g.generator(0)) == a);
  CHECK(sites.size() == 2);
  CHECK(sites.find(g.generator(0)).value() == a);
  CHECK_FALSE(sites.find(g.generator(2)).has_value());
  CHECK(sites.element(a) == g.generator(0));
}
