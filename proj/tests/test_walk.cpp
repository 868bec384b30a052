// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "brwlab/group.hpp"
#include "brwlab/walk_dp.hpp"

using namespace brw;

namespace {

// Hand-rolled value: two-step return of the lazy uniform walk,
// lazy-lazy plus step-and-return, a^2 + sum_s q(s) q(s^-1).
double two_step_return(double a, uint32_t gens) {
  const double w = (1.0 - a) / gens;
  return a * a + gens * w * w;
}

}  // namespace

TEST_CASE("short-horizon returns match hand computation on the rank-2 free group") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  ReturnSeries rs = return_probability_series(g, q, 4);
  CHECK(rs.per_site_exact);
  CHECK(rs.identity[0] == doctest::Approx(1.0));
  CHECK(rs.identity[1] == doctest::Approx(0.2));  // lazy hold
  CHECK(rs.identity[2] == doctest::Approx(two_step_return(0.2, 4)));
  CHECK(rs.identity[2] == doctest::Approx(0.2));
}

TEST_CASE("distance masses are probability vectors") {
  for (const GroupSpec& g : {GroupSpec::free_group(2), GroupSpec::free_product_c2(3)}) {
    StepDistribution q = StepDistribution::uniform_lazy(g, 0.3);
    ReturnSeries rs = return_probability_series(g, q, 200);
    for (uint32_t n = 0; n <= 200; ++n) {
      double total = 0.0;
      for (double m : rs.mass[n]) {
        CHECK(m >= 0.0);
        total += m;
      }
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("lattice return series matches the binomial walk") {
  GroupSpec g = GroupSpec::integer_lattice(1);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.5);
  ReturnSeries rs = return_probability_series(g, q, 6);
  // one step: hold with 1/2
  CHECK(rs.identity[1] == doctest::Approx(0.5));
  // two steps: hold-hold + left-right + right-left = 0.25 + 2 * (0.25 * 0.25)
  CHECK(rs.identity[2] == doctest::Approx(0.25 + 2 * 0.0625));
  CHECK_FALSE(rs.per_site_exact);
}

TEST_CASE("single-target series agrees with the distance classes") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  const uint32_t n_max = 40;
  ReturnSeries rs = return_probability_series(g, q, n_max);

  GroupElement target = g.identity();  // distance 0
  auto p0 = point_return_series(g, q, target, n_max);
  for (uint32_t n = 0; n <= n_max; ++n) CHECK(p0[n] == doctest::Approx(rs.identity[n]));

  target = g.apply_letter(g.apply_letter(g.identity(), 0), 2);  // distance 2
  auto p2 = point_return_series(g, q, target, n_max);
  CHECK(p2[0] == 0.0);
  CHECK(p2[1] == 0.0);
  CHECK(p2[2] == doctest::Approx(0.2 * 0.2));  // the unique two-step path
  for (uint32_t n = 2; n <= n_max; ++n)
    CHECK(p2[n] == doctest::Approx(rs.per_site(n, 2, g)).epsilon(1e-9));
}

TEST_CASE("monte carlo estimate brackets the exact returns") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  ReturnSeries rs = return_probability_series(g, q, 8);
  auto mc = mc_return_estimate(g, q, 8, 200000, 13);
  for (uint32_t n = 0; n <= 8; ++n) {
    const double se = std::sqrt(rs.identity[n] * (1 - rs.identity[n]) / 200000.0);
    CHECK(std::abs(mc[n] - rs.identity[n]) <= 5 * se + 1e-9);
  }
}

TEST_CASE("anisotropic laws are rejected by the exact tree recursion") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::from_weights(g, {0.3, 0.3, 0.1, 0.1}, 0.2);
  CHECK_THROWS_AS(return_probability_series(g, q, 10), std::invalid_argument);
  // the Monte Carlo fallback accepts them
  CHECK_NOTHROW(mc_return_estimate(g, q, 4, 1000, 1));
}

TEST_CASE("closed-form spectral radii") {
  GroupSpec f2 = GroupSpec::free_group(2);
  GroupSpec c23 = GroupSpec::free_product_c2(3);
  StepDistribution lazy_f2 = StepDistribution::uniform_lazy(f2, 0.2);
  StepDistribution lazy_c23 = StepDistribution::uniform_lazy(c23, 0.2);

  CHECK(has_closed_form_rho(f2, lazy_f2));
  CHECK(spectral_radius_closed(f2, lazy_f2) == doctest::Approx(0.8928203230275509).epsilon(1e-12));
  // 0.2 + 0.8 * sqrt(3)/2
  CHECK(spectral_radius_closed(f2, lazy_f2) ==
        doctest::Approx(0.2 + 0.8 * std::sqrt(3.0) / 2.0).epsilon(1e-12));
  CHECK(spectral_radius_closed(c23, lazy_c23) ==
        doctest::Approx(0.2 + 0.8 * 2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-12));
  GroupSpec z3 = GroupSpec::integer_lattice(3);
  CHECK(spectral_radius_closed(z3, StepDistribution::uniform_lazy(z3, 0.1)) == 1.0);

  StepDistribution skew = StepDistribution::from_weights(f2, {0.3, 0.3, 0.1, 0.1}, 0.2);
  CHECK_FALSE(has_closed_form_rho(f2, skew));
}

TEST_CASE("series estimator approaches the closed form") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  SpectralEstimate est = spectral_radius_series(g, q, 200);
  const double truth = spectral_radius_closed(g, q);
  CHECK(std::abs(est.value - truth) < 5e-3);
  CHECK(est.converged);
  CHECK(est.bracket_low <= est.value);
  CHECK(est.value <= est.bracket_high);

  // the dispatcher prefers the closed form when one exists
  SpectralEstimate direct = spectral_radius(g, q);
  CHECK(direct.closed_form);
  CHECK(direct.value == doctest::Approx(truth).epsilon(1e-15));
}

TEST_CASE("returns never exceed the spectral radius power") {
  for (const GroupSpec& g : {GroupSpec::free_group(2), GroupSpec::free_product_c2(3)}) {
    StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
    const double rho = spectral_radius_closed(g, q);
    ReturnSeries rs = return_probability_series(g, q, 50);
    double bound = 1.0;
    for (uint32_t n = 0; n <= 50; ++n) {
      CHECK(rs.identity[n] <= bound * (1.0 + 1e-9));
      bound *= rho;
    }
  }
}

TEST_CASE("weighted green sums respect the distance bound") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  const double m = 1.05;
  const double rho = spectral_radius_closed(g, q);
  REQUIRE(m * rho < 1.0);

  GroupElement y = g.identity();
  for (uint32_t d = 0; d <= 6; ++d) {
    GreenResult gr = green_partial_sum(g, q, g.identity(), y, m, 300);
    CHECK(gr.distance == d);
    CHECK(gr.tail_certified);
    CHECK_FALSE(gr.divergent);
    CHECK(gr.m == doctest::Approx(m));
    CHECK(gr.rho == doctest::Approx(rho));
    CHECK(gr.partial + gr.tail_bound <= gr.envelope_bound * (1.0 + 1e-9));
    CHECK(gr.within_envelope);
    y = g.apply_letter(y, d % 2 == 0 ? 0 : 2);  // extend the reduced word
  }
}

TEST_CASE("green sum at distance two stays under fourteen point one") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  GroupElement y = g.apply_letter(g.apply_letter(g.identity(), 0), 2);
  GreenResult gr = green_partial_sum(g, q, g.identity(), y, 1.05, 300);
  const double mrho = 1.05 * spectral_radius_closed(g, q);
  CHECK(gr.envelope_bound == doctest::Approx(mrho * mrho / (1.0 - mrho)).epsilon(1e-12));
  CHECK(gr.envelope_bound < 14.1);
  CHECK(gr.envelope_bound > 14.0);
}

TEST_CASE("supercritical weights make the green sum divergent") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  GreenResult gr = green_partial_sum(g, q, g.identity(), g.generator(0), 1.2, 50);
  CHECK(gr.divergent);
  CHECK_FALSE(gr.tail_certified);
  CHECK(gr.partial > 0.0);
}

TEST_CASE("short horizons below the distance give a pure tail bound") {
  GroupSpec g = GroupSpec::free_group(2);
  StepDistribution q = StepDistribution::uniform_lazy(g, 0.2);
  GroupElement y = g.identity();
  for (int i = 0; i < 8; ++i) y = g.apply_letter(y, i % 2 == 0 ? 0 : 2);
  GreenResult gr = green_partial_sum(g, q, g.identity(), y, 1.05, 4);
  CHECK(gr.partial == 0.0);
  CHECK(gr.within_envelope);
}

TEST_CASE("lattice sphere counts follow the cross-polytope formula") {
  auto s1 = lattice_sphere_sizes(1, 5);
  CHECK(s1 == std::vector<double>{1, 2, 2, 2, 2, 2});
  auto s2 = lattice_sphere_sizes(2, 4);
  CHECK(s2 == std::vector<double>{1, 4, 8, 12, 16});
  auto s3 = lattice_sphere_sizes(3, 2);
  CHECK(s3[0] == 1);
  CHECK(s3[1] == 6);
  CHECK(s3[2] == 18);  // 2d^2 + ... brute count: 18 points at L1 distance 2 in Z^3
}
