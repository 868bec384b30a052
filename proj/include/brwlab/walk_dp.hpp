// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "brwlab/group.hpp"

namespace brw {

/// Exact n-step distribution of the walk, organised by distance class
/// r = d(e, x). Row n holds P(d(e, X_n) = r) for r = 0..n; the walk is
/// vertex-transitive, so the start point is immaterial.
///
/// Tree-like groups additionally expose the common per-site value
/// p^(n)(e, x) = mass / sphere_size(r), exact for isotropic step laws.
struct ReturnSeries {
  GroupKind kind;
  uint32_t n_max = 0;
  std::vector<std::vector<double>> mass;  // mass[n][r], r <= n
  std::vector<double> identity;           // p^(n)(e, e)
  bool per_site_exact = false;            // tree-like radial recursion used

  double per_site(uint32_t n, uint32_t r, const GroupSpec& g) const;
};

/// Exact distance-class recursion for the tree-like groups (isotropic q
/// required), exact box convolution for the lattice. Throws
/// std::invalid_argument for anisotropic step laws on tree-like groups and
/// for lattice boxes beyond the memory budget.
ReturnSeries return_probability_series(const GroupSpec& g, const StepDistribution& q,
                                       uint32_t n_max);

/// p^(n)(e, target) for n = 0..n_max at a single target element.
std::vector<double> point_return_series(const GroupSpec& g, const StepDistribution& q,
                                        const GroupElement& target, uint32_t n_max);

/// Monte Carlo fallback for anisotropic laws on tree-like groups: estimates
/// p^(n)(e,e) by simulating `walks` independent paths.
std::vector<double> mc_return_estimate(const GroupSpec& g, const StepDistribution& q,
                                       uint32_t n_max, uint64_t walks, uint64_t seed);

struct SpectralEstimate {
  double value = 0.0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  bool converged = false;
  bool closed_form = false;
};

/// True when a closed form is available: any symmetric lattice walk (rho=1),
/// or an isotropic lazy walk on a tree-like group,
/// rho = a + (1-a) * rho_srw with rho_srw = sqrt(2k-1)/k resp. 2 sqrt(d-1)/d.
bool has_closed_form_rho(const GroupSpec& g, const StepDistribution& q);
double spectral_radius_closed(const GroupSpec& g, const StepDistribution& q);

/// Numerical estimate from the even return probabilities:
/// root sequence (p^(2n)(e,e))^(1/2n) refined by ratio extrapolation and one
/// Aitken delta-squared pass. Bracket spans the last few refined values.
SpectralEstimate spectral_radius_series(const GroupSpec& g, const StepDistribution& q,
                                        uint32_t n_max);

/// Closed form when available, series estimate otherwise.
SpectralEstimate spectral_radius(const GroupSpec& g, const StepDistribution& q,
                                 uint32_t n_max_fallback = 400);

struct GreenResult {
  double partial = 0.0;      // sum_{n <= n_max} p^(n)(x,y) m^n
  double tail_bound = 0.0;   // sum_{n > n_max} (m rho)^n, valid for m rho < 1
  bool tail_certified = false;
  bool divergent = false;    // m rho >= 1: partial sum only
  double envelope_bound = 0.0;  // (m rho)^d(x,y) / (1 - rho m)
  bool within_envelope = false;
  uint64_t distance = 0;
  double m = 0.0;
  double rho = 0.0;
};

/// Partial weighted Green sum G(x, y | m) with certified tail bound. The
/// walk is nearest-neighbour with laziness, so p^(n)(x,y) = 0 for
/// n < d(x,y); n_max below the distance yields a zero partial sum plus the
/// tail bound.
GreenResult green_partial_sum(const GroupSpec& g, const StepDistribution& q,
                              const GroupElement& x, const GroupElement& y, double m,
                              uint32_t n_max);

/// Number of lattice points of Z^dim at L1 distance exactly r, for
/// r = 0..r_max.
std::vector<double> lattice_sphere_sizes(uint32_t dim, uint32_t r_max);

}  // namespace brw
