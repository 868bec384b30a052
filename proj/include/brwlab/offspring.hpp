// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brwlab/rng.hpp"

namespace brw {

/// Finite-support offspring law mu_0, ..., mu_K with O(1) alias sampling.
///
/// Two construction paths: `from_probs` checks only that the numbers form a
/// distribution (enough for plain tree sampling and percolation work), while
/// `validate` additionally enforces the branching-process contract the walk
/// engines rely on: mu_1 > 0.
class OffspringDistribution {
 public:
  static OffspringDistribution from_probs(std::vector<double> probs);
  static OffspringDistribution validate(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  double mean() const { return mean_; }
  bool supercritical() const { return mean_ > 1.0; }
  bool mu1_positive() const { return probs_.size() > 1 && probs_[1] > 0.0; }
  uint32_t max_children() const { return static_cast<uint32_t>(probs_.size()) - 1; }

  /// Probability generating function F(s) = sum mu_k s^k.
  double pgf(double s) const;

  template <class G>
  uint32_t sample(G& rng) const {
    const uint32_t n = static_cast<uint32_t>(probs_.size());
    if (n == 1) return 0;
    const uint64_t r = rng.next_u64();
    const uint32_t i = static_cast<uint32_t>((static_cast<unsigned __int128>(r) * n) >> 64);
    const double u = static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53;
    return u < accept_[i] ? i : alias_[i];
  }

 private:
  OffspringDistribution() = default;
  void build_alias();
  std::vector<double> probs_;
  std::vector<double> accept_;
  std::vector<uint32_t> alias_;
  double mean_ = 0.0;
};

/// Degree law of the root under the size-biased (unimodular) rooting:
/// P(root degree = k+1) proportional to mu_k / (k+1).
struct UgwRootLaw {
  std::vector<double> degree_probs;  // degree_probs[d] = P(root degree = d)
  uint32_t min_degree = 0;

  template <class G>
  uint32_t sample_degree(G& rng) const {
    double u = rng.next_unit();
    for (size_t d = 0; d + 1 < degree_probs.size(); ++d) {
      if (u < degree_probs[d]) return static_cast<uint32_t>(d);
      u -= degree_probs[d];
    }
    return static_cast<uint32_t>(degree_probs.size() - 1);
  }
};

UgwRootLaw ugw_root_law(const OffspringDistribution& mu);

/// Branching attenuation: with probability 1 - gamma a multi-child node
/// keeps only its first child. Leaves mu_0 untouched, moves mass from
/// {k >= 2} onto 1.
OffspringDistribution gamma_truncate(const OffspringDistribution& mu, double gamma);

/// Mean of the attenuated law, (1 - mu_0) + gamma * sum_{k>=2} (k-1) mu_k.
double gamma_mean(const OffspringDistribution& mu, double gamma);

enum class GammaCriticalStatus : uint8_t {
  ok,            // critical value in (0, 1]
  no_extinction, // mu_0 = 0: attenuation never reaches criticality from above 1
  no_branching,  // no mass on {k >= 2}: gamma has no effect
  out_of_range,  // formula value exceeds 1 (base process already subcritical)
};

struct GammaCritical {
  std::optional<double> value;
  GammaCriticalStatus status = GammaCriticalStatus::ok;
  std::string note;
};

/// Attenuation level at which the mean crosses 1: mu_0 / sum_{k>=2}(k-1)mu_k.
GammaCritical gamma_critical(const OffspringDistribution& mu);

}  // namespace brw
