// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/group.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace brw {

GroupSpec GroupSpec::integer_lattice(uint32_t dim) {
  if (dim < 1) throw std::invalid_argument("integer_lattice: dim must be >= 1");
  return GroupSpec(GroupKind::integer_lattice, dim);
}

GroupSpec GroupSpec::free_group(uint32_t rank) {
  if (rank < 2) throw std::invalid_argument("free_group: rank must be >= 2");
  if (2 * rank >= kIdentityStep) throw std::invalid_argument("free_group: rank too large");
  return GroupSpec(GroupKind::free_group, rank);
}

GroupSpec GroupSpec::free_product_c2(uint32_t factors) {
  if (factors < 3) throw std::invalid_argument("free_product_c2: needs >= 3 factors");
  if (factors >= kIdentityStep) throw std::invalid_argument("free_product_c2: too many factors");
  return GroupSpec(GroupKind::free_product_c2, factors);
}

uint32_t GroupSpec::generator_count() const {
  switch (kind_) {
    case GroupKind::integer_lattice: return 2 * param_;
    case GroupKind::free_group: return 2 * param_;
    case GroupKind::free_product_c2: return param_;
  }
  return 0;
}

uint8_t GroupSpec::inverse_letter(uint8_t letter) const {
  if (letter == kIdentityStep) return kIdentityStep;
  if (letter >= generator_count()) throw std::invalid_argument("inverse_letter: out of range");
  if (kind_ == GroupKind::free_product_c2) return letter;  // involutions
  return letter ^ 1;  // generators come in (g, g^-1) pairs
}

GroupElement GroupSpec::identity() const {
  GroupElement e;
  if (kind_ == GroupKind::integer_lattice) e.coords.assign(param_, 0);
  return e;
}

GroupElement GroupSpec::generator(uint8_t letter) const {
  return apply_letter(identity(), letter);
}

GroupElement GroupSpec::apply_letter(const GroupElement& x, uint8_t letter) const {
  GroupElement r = x;
  if (letter == kIdentityStep) return r;
  if (letter >= generator_count()) throw std::invalid_argument("apply_letter: out of range");
  switch (kind_) {
    case GroupKind::integer_lattice: {
      const uint32_t axis = letter / 2;
      r.coords[axis] += (letter % 2 == 0) ? 1 : -1;
      break;
    }
    case GroupKind::free_group:
      if (!r.letters.empty() && r.letters.back() == (letter ^ 1)) {
        r.letters.pop_back();
      } else {
        r.letters.push_back(letter);
      }
      break;
    case GroupKind::free_product_c2:
      if (!r.letters.empty() && r.letters.back() == letter) {
        r.letters.pop_back();
      } else {
        r.letters.push_back(letter);
      }
      break;
  }
  return r;
}

GroupElement GroupSpec::compose(const GroupElement& x, const GroupElement& y) const {
  check_element(x);
  check_element(y);
  if (kind_ == GroupKind::integer_lattice) {
    GroupElement r = x;
    for (uint32_t i = 0; i < param_; ++i) r.coords[i] += y.coords[i];
    return r;
  }
  GroupElement r = x;
  for (uint8_t l : y.letters) r = apply_letter(r, l);
  return r;
}

GroupElement GroupSpec::inverse(const GroupElement& x) const {
  check_element(x);
  GroupElement r;
  if (kind_ == GroupKind::integer_lattice) {
    r.coords.resize(param_);
    for (uint32_t i = 0; i < param_; ++i) r.coords[i] = -x.coords[i];
    return r;
  }
  r.letters.reserve(x.letters.size());
  for (auto it = x.letters.rbegin(); it != x.letters.rend(); ++it)
    r.letters.push_back(inverse_letter(*it));
  return r;
}

uint64_t GroupSpec::word_distance(const GroupElement& x, const GroupElement& y) const {
  check_element(x);
  check_element(y);
  if (kind_ == GroupKind::integer_lattice) {
    uint64_t d = 0;
    for (uint32_t i = 0; i < param_; ++i)
      d += static_cast<uint64_t>(std::abs(static_cast<int64_t>(y.coords[i]) - x.coords[i]));
    return d;
  }
  // Reduced words label a tree; d(x,y) = |x| + |y| - 2 * common prefix.
  size_t p = 0;
  const size_t n = std::min(x.letters.size(), y.letters.size());
  while (p < n && x.letters[p] == y.letters[p]) ++p;
  return (x.letters.size() - p) + (y.letters.size() - p);
}

double GroupSpec::growth_rate() const {
  switch (kind_) {
    case GroupKind::integer_lattice: return 0.0;
    case GroupKind::free_group: return std::log(2.0 * param_ - 1.0);
    case GroupKind::free_product_c2: return std::log(param_ - 1.0);
  }
  return 0.0;
}

double GroupSpec::sphere_size(uint64_t r) const {
  if (!tree_like())
    throw std::invalid_argument("sphere_size: closed form only for the tree-like groups");
  if (r == 0) return 1.0;
  const double s = generator_count();
  const double b = (kind_ == GroupKind::free_group) ? 2.0 * param_ - 1.0 : param_ - 1.0;
  return s * std::pow(b, static_cast<double>(r - 1));
}

void GroupSpec::check_element(const GroupElement& e) const {
  if (kind_ == GroupKind::integer_lattice) {
    if (!e.letters.empty() || e.coords.size() != param_)
      throw std::invalid_argument("element does not belong to this lattice");
    return;
  }
  if (!e.coords.empty()) throw std::invalid_argument("element does not belong to this group");
  for (size_t i = 0; i < e.letters.size(); ++i) {
    if (e.letters[i] >= generator_count())
      throw std::invalid_argument("element letter out of range for this group");
    if (i > 0) {
      const bool cancels = (kind_ == GroupKind::free_group)
                               ? e.letters[i] == (e.letters[i - 1] ^ 1)
                               : e.letters[i] == e.letters[i - 1];
      if (cancels) throw std::invalid_argument("element word is not reduced");
    }
  }
}

std::string GroupSpec::to_string(const GroupElement& e) const {
  std::ostringstream os;
  if (kind_ == GroupKind::integer_lattice) {
    os << "(";
    for (size_t i = 0; i < e.coords.size(); ++i) os << (i ? "," : "") << e.coords[i];
    os << ")";
    return os.str();
  }
  if (e.letters.empty()) return "e";
  for (uint8_t l : e.letters) {
    if (kind_ == GroupKind::free_group) {
      os << static_cast<char>('a' + l / 2);
      if (l % 2) os << "'";
    } else {
      os << "s" << static_cast<int>(l);
    }
  }
  return os.str();
}

std::string GroupSpec::name() const {
  std::ostringstream os;
  switch (kind_) {
    case GroupKind::integer_lattice: os << "Z^" << param_; break;
    case GroupKind::free_group: os << "F_" << param_; break;
    case GroupKind::free_product_c2: os << "C2*" << param_; break;
  }
  return os.str();
}

StepDistribution StepDistribution::uniform_lazy(const GroupSpec& g, double laziness) {
  return from_weights(
      g, std::vector<double>(g.generator_count(), (1.0 - laziness) / g.generator_count()),
      laziness);
}

StepDistribution StepDistribution::from_weights(const GroupSpec& g, std::vector<double> weights,
                                                double laziness) {
  if (weights.size() != g.generator_count())
    throw std::invalid_argument("step weights: one weight per generator required");
  if (!(laziness > 0.0) || laziness >= 1.0)
    throw std::invalid_argument("step weights: holding probability must be in (0,1)");
  double total = laziness;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("step weights: every generator needs mass > 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("step weights: must sum to 1 within 1e-12");
  // Enforce exact symmetry, then renormalize away the drift.
  for (uint8_t l = 0; l < weights.size(); ++l) {
    const uint8_t inv = g.inverse_letter(l);
    if (std::abs(weights[l] - weights[inv]) > 1e-12)
      throw std::invalid_argument("step weights: q(s) must equal q(s^-1)");
    if (inv > l) {
      const double avg = 0.5 * (weights[l] + weights[inv]);
      weights[l] = weights[inv] = avg;
    }
  }
  total = laziness;
  for (double w : weights) total += w;
  StepDistribution q;
  q.laziness_ = laziness / total;
  q.weights_ = std::move(weights);
  for (double& w : q.weights_) w /= total;
  double lo = q.weights_[0], hi = q.weights_[0];
  for (double w : q.weights_) {
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  q.isotropic_ = (hi - lo) <= 1e-12;
  if (q.isotropic_) {
    const double avg = (1.0 - q.laziness_) / q.weights_.size();
    for (double& w : q.weights_) w = avg;
  }
  return q;
}

uint32_t SiteTable::intern(const GroupElement& e) {
  auto it = index_.find(e);
  if (it != index_.end()) return it->second;
  const uint32_t id = static_cast<uint32_t>(elems_.size());
  elems_.push_back(e);
  index_.emplace(e, id);
  return id;
}

std::optional<uint32_t> SiteTable::find(const GroupElement& e) const {
  auto it = index_.find(e);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

uint32_t SiteTable::step(uint32_t site, uint8_t letter) {
  if (letter == kIdentityStep) return site;
  return intern(spec_.apply_letter(elems_[site], letter));
}

}  // namespace brw
