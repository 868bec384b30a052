// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/walk_dp.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace brw {
namespace {

// Memory budget for lattice box convolutions: two slices of this many cells.
constexpr uint64_t kMaxBoxCells = uint64_t{1} << 27;

// Distance-class recursion for the tree-like groups. From distance r > 0
// exactly one generator shortens the word, the other |S| - 1 extend it; from
// the identity every generator extends. Row n is the exact law of d(e, X_n).
std::vector<std::vector<double>> tree_distance_masses(const StepDistribution& q,
                                                      uint32_t n_max) {
  if (!q.isotropic())
    throw std::invalid_argument(
        "return series: anisotropic step laws on tree-like groups are unsupported "
        "(use mc_return_estimate)");
  const double a = q.laziness();
  const double w = (1.0 - a) / q.generator_count();
  const double fwd = (q.generator_count() - 1) * w;
  std::vector<std::vector<double>> mass;
  mass.reserve(n_max + 1);
  mass.push_back({1.0});
  for (uint32_t n = 1; n <= n_max; ++n) {
    const auto& prev = mass.back();
    std::vector<double> cur(n + 1, 0.0);
    for (uint32_t r = 0; r < prev.size(); ++r) {
      const double p = prev[r];
      if (p == 0.0) continue;
      cur[r] += a * p;
      if (r == 0) {
        cur[1] += (1.0 - a) * p;
      } else {
        cur[r - 1] += w * p;
        cur[r + 1] += fwd * p;
      }
    }
    mass.push_back(std::move(cur));
  }
  return mass;
}

struct LatticeBox {
  uint32_t dim;
  uint32_t radius;
  std::vector<uint64_t> stride;
  uint64_t cells;

  explicit LatticeBox(uint32_t d, uint32_t r) : dim(d), radius(r), stride(d) {
    const uint64_t side = 2 * static_cast<uint64_t>(r) + 1;
    uint64_t c = 1;
    for (uint32_t i = 0; i < d; ++i) {
      stride[i] = c;
      c *= side;
    }
    cells = c;
    if (cells > kMaxBoxCells)
      throw std::invalid_argument("return series: lattice box exceeds the memory budget");
  }
  uint64_t origin() const {
    uint64_t o = 0;
    for (uint32_t i = 0; i < dim; ++i) o += stride[i] * radius;
    return o;
  }
};

// One lattice convolution step p_{n+1}(x) = a p_n(x) + sum_s q(s) p_n(x - s),
// restricted to the box (mass never escapes it for n <= radius).
void lattice_step(const LatticeBox& box, const StepDistribution& q,
                  const std::vector<double>& src, std::vector<double>& dst) {
  const uint64_t side = 2 * static_cast<uint64_t>(box.radius) + 1;
  const double a = q.laziness();
  for (uint64_t idx = 0; idx < box.cells; ++idx) {
    double acc = a * src[idx];
    for (uint32_t axis = 0; axis < box.dim; ++axis) {
      const uint64_t coord = (idx / box.stride[axis]) % side;
      const double wp = q.weight(static_cast<uint8_t>(2 * axis));      // +e_axis
      const double wm = q.weight(static_cast<uint8_t>(2 * axis + 1));  // -e_axis
      if (coord > 0) acc += wp * src[idx - box.stride[axis]];
      if (coord + 1 < side) acc += wm * src[idx + box.stride[axis]];
    }
    dst[idx] = acc;
  }
}

uint64_t l1_norm_of_index(const LatticeBox& box, uint64_t idx) {
  const uint64_t side = 2 * static_cast<uint64_t>(box.radius) + 1;
  uint64_t d = 0;
  for (uint32_t axis = 0; axis < box.dim; ++axis) {
    const int64_t coord =
        static_cast<int64_t>((idx / box.stride[axis]) % side) - static_cast<int64_t>(box.radius);
    d += static_cast<uint64_t>(std::llabs(coord));
  }
  return d;
}

}  // namespace

double ReturnSeries::per_site(uint32_t n, uint32_t r, const GroupSpec& g) const {
  if (!per_site_exact)
    throw std::invalid_argument("per_site: only exact for tree-like radial series");
  if (n >= mass.size() || r >= mass[n].size()) return 0.0;
  const double sphere = g.sphere_size(r);
  return mass[n][r] / sphere;
}

ReturnSeries return_probability_series(const GroupSpec& g, const StepDistribution& q,
                                       uint32_t n_max) {
  ReturnSeries s;
  s.kind = g.kind();
  s.n_max = n_max;
  if (g.tree_like()) {
    s.mass = tree_distance_masses(q, n_max);
    s.identity.resize(n_max + 1);
    for (uint32_t n = 0; n <= n_max; ++n) s.identity[n] = s.mass[n][0];
    s.per_site_exact = true;
    return s;
  }
  LatticeBox box(g.param(), n_max);
  std::vector<double> cur(box.cells, 0.0), next(box.cells, 0.0);
  cur[box.origin()] = 1.0;
  // Precompute the L1 norm of every cell once; reused for each row.
  std::vector<uint32_t> norm(box.cells);
  for (uint64_t idx = 0; idx < box.cells; ++idx)
    norm[idx] = static_cast<uint32_t>(l1_norm_of_index(box, idx));
  s.mass.reserve(n_max + 1);
  s.identity.resize(n_max + 1);
  for (uint32_t n = 0;; ++n) {
    std::vector<double> row(n + 1, 0.0);
    for (uint64_t idx = 0; idx < box.cells; ++idx) {
      if (cur[idx] != 0.0 && norm[idx] <= n) row[norm[idx]] += cur[idx];
    }
    s.mass.push_back(std::move(row));
    s.identity[n] = cur[box.origin()];
    if (n == n_max) break;
    lattice_step(box, q, cur, next);
    std::swap(cur, next);
  }
  return s;
}

std::vector<double> point_return_series(const GroupSpec& g, const StepDistribution& q,
                                        const GroupElement& target, uint32_t n_max) {
  g.check_element(target);
  if (g.tree_like()) {
    const ReturnSeries s = return_probability_series(g, q, n_max);
    const uint64_t r = g.word_length(target);
    std::vector<double> out(n_max + 1, 0.0);
    for (uint32_t n = 0; n <= n_max; ++n) {
      if (r < s.mass[n].size()) out[n] = s.per_site(n, static_cast<uint32_t>(r), g);
    }
    return out;
  }
  LatticeBox box(g.param(), n_max);
  uint64_t tgt = 0;
  const uint64_t side = 2 * static_cast<uint64_t>(box.radius) + 1;
  for (uint32_t axis = 0; axis < box.dim; ++axis) {
    const int64_t shifted = static_cast<int64_t>(target.coords[axis]) + box.radius;
    if (shifted < 0 || shifted >= static_cast<int64_t>(side))
      throw std::invalid_argument("point_return_series: target outside the n_max box");
    tgt += static_cast<uint64_t>(shifted) * box.stride[axis];
  }
  std::vector<double> cur(box.cells, 0.0), next(box.cells, 0.0);
  cur[box.origin()] = 1.0;
  std::vector<double> out(n_max + 1, 0.0);
  out[0] = cur[tgt];
  for (uint32_t n = 1; n <= n_max; ++n) {
    lattice_step(box, q, cur, next);
    std::swap(cur, next);
    out[n] = cur[tgt];
  }
  return out;
}

std::vector<double> mc_return_estimate(const GroupSpec& g, const StepDistribution& q,
                                       uint32_t n_max, uint64_t walks, uint64_t seed) {
  if (walks == 0) throw std::invalid_argument("mc_return_estimate: zero walks");
  std::vector<uint64_t> returns(n_max + 1, 0);
  returns[0] = walks;
  const GroupElement e = g.identity();
  for (uint64_t w = 0; w < walks; ++w) {
    Rng rng(mix64(seed ^ (w * 0x9e3779b97f4a7c15ULL + 1)));
    GroupElement pos = e;
    for (uint32_t n = 1; n <= n_max; ++n) {
      pos = g.apply_letter(pos, q.sample(rng));
      if (pos == e) ++returns[n];
    }
  }
  std::vector<double> out(n_max + 1);
  for (uint32_t n = 0; n <= n_max; ++n)
    out[n] = static_cast<double>(returns[n]) / static_cast<double>(walks);
  return out;
}

bool has_closed_form_rho(const GroupSpec& g, const StepDistribution& q) {
  return !g.tree_like() || q.isotropic();
}

double spectral_radius_closed(const GroupSpec& g, const StepDistribution& q) {
  if (!g.tree_like()) return 1.0;  // symmetric walk on an amenable group
  if (!q.isotropic())
    throw std::invalid_argument("spectral_radius_closed: no closed form for anisotropic laws");
  const double a = q.laziness();
  double rho_srw = 0.0;
  if (g.kind() == GroupKind::free_group) {
    const double k = g.param();
    rho_srw = std::sqrt(2.0 * k - 1.0) / k;
  } else {
    const double d = g.param();
    rho_srw = 2.0 * std::sqrt(d - 1.0) / d;
  }
  return a + (1.0 - a) * rho_srw;
}

namespace {

// Refinement pipeline for the root sequence (p^(2n))^(1/2n). The
// consecutive-ratio sequence sqrt(p^(2n+2)/p^(2n)) removes the constant and
// carries a c/n error term; one Richardson step cancels it and one Aitken
// delta-squared pass mops up the remainder.
std::vector<double> refine_root_sequence(const std::vector<double>& even_returns) {
  std::vector<double> ratio;
  for (size_t j = 1; j + 1 < even_returns.size(); ++j) {
    if (even_returns[j] <= 0.0 || even_returns[j + 1] <= 0.0) break;
    ratio.push_back(std::sqrt(even_returns[j + 1] / even_returns[j]));
  }
  std::vector<double> rich;
  for (size_t j = 0; j + 1 < ratio.size(); ++j) {
    const double n = static_cast<double>(j + 1);
    rich.push_back((n + 1.0) * ratio[j + 1] - n * ratio[j]);
  }
  std::vector<double> aitken;
  for (size_t j = 0; j + 2 < rich.size(); ++j) {
    const double d2 = rich[j + 2] - 2.0 * rich[j + 1] + rich[j];
    if (std::abs(d2) < 1e-15) {
      aitken.push_back(rich[j + 2]);
    } else {
      const double d1 = rich[j + 1] - rich[j];
      aitken.push_back(rich[j] - d1 * d1 / d2);
    }
  }
  return aitken.empty() ? (rich.empty() ? ratio : rich) : aitken;
}

}  // namespace

SpectralEstimate spectral_radius_series(const GroupSpec& g, const StepDistribution& q,
                                        uint32_t n_max) {
  if (n_max < 8) throw std::invalid_argument("spectral_radius_series: n_max too small");
  const ReturnSeries series = return_probability_series(g, q, n_max);
  std::vector<double> even;
  for (uint32_t n = 0; n <= n_max; n += 2) even.push_back(series.identity[n]);
  const std::vector<double> refined = refine_root_sequence(even);
  if (refined.size() < 4)
    throw std::invalid_argument("spectral_radius_series: series too short to extrapolate");
  SpectralEstimate est;
  est.value = refined.back();
  const size_t window = std::min<size_t>(5, refined.size());
  est.bracket_low = est.bracket_high = refined[refined.size() - window];
  for (size_t j = refined.size() - window; j < refined.size(); ++j) {
    est.bracket_low = std::min(est.bracket_low, refined[j]);
    est.bracket_high = std::max(est.bracket_high, refined[j]);
  }
  est.converged = (est.bracket_high - est.bracket_low) < 1e-3;
  return est;
}

SpectralEstimate spectral_radius(const GroupSpec& g, const StepDistribution& q,
                                 uint32_t n_max_fallback) {
  if (has_closed_form_rho(g, q)) {
    const double rho = spectral_radius_closed(g, q);
    return SpectralEstimate{rho, rho, rho, true, true};
  }
  return spectral_radius_series(g, q, n_max_fallback);
}

GreenResult green_partial_sum(const GroupSpec& g, const StepDistribution& q,
                              const GroupElement& x, const GroupElement& y, double m,
                              uint32_t n_max) {
  if (!(m > 0.0)) throw std::invalid_argument("green_partial_sum: m must be positive");
  const GroupElement z = g.compose(g.inverse(x), y);
  GreenResult r;
  r.distance = g.word_length(z);
  r.m = m;
  r.rho = spectral_radius(g, q).value;
  const std::vector<double> p = point_return_series(g, q, z, n_max);
  double mn = 1.0;
  for (uint32_t n = 0; n <= n_max; ++n) {
    r.partial += p[n] * mn;
    mn *= m;
  }
  const double mrho = m * r.rho;
  if (mrho < 1.0) {
    // p^(n) vanishes below the distance, so the tail starts no earlier than
    // max(n_max + 1, d).
    const uint64_t start = std::max<uint64_t>(n_max + 1, r.distance);
    r.tail_bound = std::pow(mrho, static_cast<double>(start)) / (1.0 - mrho);
    r.tail_certified = true;
    r.envelope_bound = std::pow(mrho, static_cast<double>(r.distance)) / (1.0 - mrho);
    r.within_envelope = r.partial + r.tail_bound <= r.envelope_bound * (1.0 + 1e-12);
  } else {
    r.divergent = true;
  }
  return r;
}

std::vector<double> lattice_sphere_sizes(uint32_t dim, uint32_t r_max) {
  // N_d(r) = sum_j N_{d-1}(r - |j|), built one axis at a time.
  std::vector<double> counts(r_max + 1, 0.0);
  counts[0] = 1.0;
  for (uint32_t axis = 0; axis < dim; ++axis) {
    std::vector<double> next(r_max + 1, 0.0);
    for (uint32_t r = 0; r <= r_max; ++r) {
      if (counts[r] == 0.0) continue;
      next[r] += counts[r];  // j = 0
      for (uint32_t j = 1; r + j <= r_max; ++j) next[r + j] += 2.0 * counts[r];
    }
    counts = std::move(next);
  }
  return counts;
}

}  // namespace brw
