// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

namespace brw {

Interval wilson_interval(uint64_t successes, uint64_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return Interval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

void MeanAcc::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double MeanAcc::variance() const {
  if (n_ < 2) return 0.0;
  return m2_ / static_cast<double>(n_ - 1);
}

double MeanAcc::se() const {
  if (n_ < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n_));
}

ChiSquareTest chi_square_gof(const std::vector<uint64_t>& counts,
                             const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.empty())
    throw std::invalid_argument("chi_square_gof: counts/probs size mismatch");
  uint64_t total = 0;
  for (uint64_t c : counts) total += c;
  if (total == 0) throw std::invalid_argument("chi_square_gof: no observations");
  ChiSquareTest t;
  for (size_t i = 0; i < counts.size(); ++i) {
    const double expected = probs[i] * static_cast<double>(total);
    if (expected <= 0.0) {
      if (counts[i] != 0)
        throw std::invalid_argument("chi_square_gof: observation in zero-probability cell");
      continue;
    }
    const double d = static_cast<double>(counts[i]) - expected;
    t.statistic += d * d / expected;
    ++t.dof;
  }
  if (t.dof < 2) throw std::invalid_argument("chi_square_gof: needs >= 2 nonempty cells");
  --t.dof;
  t.p_value = chi_square_pvalue(t.statistic, t.dof);
  return t;
}

double chi_square_pvalue(double stat, uint32_t dof) {
  if (dof == 0) throw std::invalid_argument("chi_square_pvalue: zero dof");
  if (stat <= 0.0) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace brw
