// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace brw {

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double width() const { return high - low; }
};

/// Wilson score interval for a binomial proportion (z = 1.96 ~ 95%).
Interval wilson_interval(uint64_t successes, uint64_t trials, double z = 1.96);

/// Streaming mean / variance accumulator (Welford).
class MeanAcc {
 public:
  void add(double x);
  uint64_t n() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance, n-1 denominator
  double se() const;        // standard error of the mean
 private:
  uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct ChiSquareTest {
  double statistic = 0.0;
  uint32_t dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness-of-fit against fixed cell probabilities.
ChiSquareTest chi_square_gof(const std::vector<uint64_t>& counts,
                             const std::vector<double>& probs);

/// Upper tail P(X >= stat) for a chi-squared variable with `dof` degrees.
double chi_square_pvalue(double stat, uint32_t dof);

}  // namespace brw
