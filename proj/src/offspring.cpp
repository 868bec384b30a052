// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/offspring.hpp"

#include <cmath>
#include <stdexcept>

namespace brw {

OffspringDistribution OffspringDistribution::from_probs(std::vector<double> probs) {
  while (!probs.empty() && probs.back() == 0.0) probs.pop_back();
  if (probs.empty()) throw std::invalid_argument("offspring: empty support");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("offspring: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("offspring: probabilities must sum to 1 within 1e-12");
  OffspringDistribution mu;
  mu.probs_ = std::move(probs);
  for (double& p : mu.probs_) p /= total;
  for (size_t k = 0; k < mu.probs_.size(); ++k) mu.mean_ += static_cast<double>(k) * mu.probs_[k];
  mu.build_alias();
  return mu;
}

OffspringDistribution OffspringDistribution::validate(std::vector<double> probs) {
  OffspringDistribution mu = from_probs(std::move(probs));
  if (!mu.mu1_positive())
    throw std::invalid_argument("offspring: mu_1 must be positive for the walk engines");
  return mu;
}

double OffspringDistribution::pgf(double s) const {
  double acc = 0.0;
  for (size_t k = probs_.size(); k-- > 0;) acc = acc * s + probs_[k];
  return acc;
}

void OffspringDistribution::build_alias() {
  const uint32_t n = static_cast<uint32_t>(probs_.size());
  accept_.assign(n, 1.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<uint32_t> small, large;
  for (uint32_t i = 0; i < n; ++i) {
    scaled[i] = probs_[i] * n;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const uint32_t s = small.back();
    small.pop_back();
    const uint32_t l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (uint32_t i : large) accept_[i] = 1.0;
  for (uint32_t i : small) accept_[i] = 1.0;
}

UgwRootLaw ugw_root_law(const OffspringDistribution& mu) {
  const auto& p = mu.probs();
  UgwRootLaw law;
  law.degree_probs.assign(p.size() + 1, 0.0);
  double total = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    const double w = p[k] / static_cast<double>(k + 1);
    law.degree_probs[k + 1] = w;
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("ugw_root_law: degenerate offspring law");
  for (double& w : law.degree_probs) w /= total;
  for (size_t d = 0; d < law.degree_probs.size(); ++d) {
    if (law.degree_probs[d] > 0.0) {
      law.min_degree = static_cast<uint32_t>(d);
      break;
    }
  }
  return law;
}

OffspringDistribution gamma_truncate(const OffspringDistribution& mu, double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("gamma_truncate: gamma must be in (0, 1]");
  const auto& p = mu.probs();
  std::vector<double> out(p.size(), 0.0);
  out[0] = p.empty() ? 0.0 : p[0];
  double moved = 0.0;
  for (size_t k = 2; k < p.size(); ++k) {
    out[k] = gamma * p[k];
    moved += (1.0 - gamma) * p[k];
  }
  if (p.size() > 1) out[1] = p[1] + moved;
  else out.push_back(moved);  // support {0} stays {0}; moved == 0 here
  return OffspringDistribution::from_probs(std::move(out));
}

double gamma_mean(const OffspringDistribution& mu, double gamma) {
  const auto& p = mu.probs();
  double branch = 0.0;
  for (size_t k = 2; k < p.size(); ++k) branch += static_cast<double>(k - 1) * p[k];
  const double mu0 = p.empty() ? 0.0 : p[0];
  return (1.0 - mu0) + gamma * branch;
}

GammaCritical gamma_critical(const OffspringDistribution& mu) {
  const auto& p = mu.probs();
  double branch = 0.0;
  for (size_t k = 2; k < p.size(); ++k) branch += static_cast<double>(k - 1) * p[k];
  const double mu0 = p.empty() ? 0.0 : p[0];
  GammaCritical result;
  if (branch <= 0.0) {
    result.status = GammaCriticalStatus::no_branching;
    result.note = "no mass on {k >= 2}; attenuation leaves the mean fixed";
    return result;
  }
  if (mu0 <= 0.0) {
    result.status = GammaCriticalStatus::no_extinction;
    result.note = "mu_0 = 0 keeps the attenuated mean above 1 for every gamma > 0";
    return result;
  }
  const double g = mu0 / branch;
  result.value = g;
  if (g > 1.0) {
    result.status = GammaCriticalStatus::out_of_range;
    result.note = "formula value exceeds 1; the base process is already subcritical";
  }
  return result;
}

}  // namespace brw
