// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "brwlab/rng.hpp"

namespace brw {

enum class GroupKind : uint8_t {
  integer_lattice,   // Z^d, generators +/- e_i, L1 word metric
  free_group,        // F_k, generators a_i and inverses, reduced words
  free_product_c2,   // C2 * ... * C2 (d factors), involutive generators
};

/// A group element in canonical form: integer coordinates for the lattice,
/// a reduced letter sequence for the word groups. Exactly one of the two
/// containers is in use, selected by the owning GroupSpec's kind.
struct GroupElement {
  std::vector<int32_t> coords;
  std::vector<uint8_t> letters;
  bool operator==(const GroupElement&) const = default;
};

struct GroupElementHash {
  size_t operator()(const GroupElement& e) const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (int32_t c : e.coords) h = (h ^ static_cast<uint32_t>(c)) * 0x100000001b3ULL;
    h = (h ^ 0xff) * 0x100000001b3ULL;
    for (uint8_t l : e.letters) h = (h ^ l) * 0x100000001b3ULL;
    return static_cast<size_t>(h);
  }
};

/// Sentinel step label for a lazy (identity) move.
inline constexpr uint8_t kIdentityStep = 0xff;

/// Finitely generated group together with its fixed symmetric generating
/// set. Elements are kept in canonical (reduced) form by every operation.
class GroupSpec {
 public:
  static GroupSpec integer_lattice(uint32_t dim);     // dim >= 1
  static GroupSpec free_group(uint32_t rank);         // rank >= 2
  static GroupSpec free_product_c2(uint32_t factors); // factors >= 3

  GroupKind kind() const { return kind_; }
  uint32_t param() const { return param_; }

  /// Number of generators in S (lattice: 2*dim, free: 2*rank, C2 product: d).
  uint32_t generator_count() const;
  uint8_t inverse_letter(uint8_t letter) const;
  bool tree_like() const { return kind_ != GroupKind::integer_lattice; }

  GroupElement identity() const;
  GroupElement generator(uint8_t letter) const;

  /// Right-multiplication by one generator (or the identity sentinel),
  /// with eager reduction.
  GroupElement apply_letter(const GroupElement& x, uint8_t letter) const;

  GroupElement compose(const GroupElement& x, const GroupElement& y) const;
  GroupElement inverse(const GroupElement& x) const;

  /// Word metric with respect to S: L1 distance on the lattice, reduced
  /// word length of x^-1 y on the tree-like groups.
  uint64_t word_distance(const GroupElement& x, const GroupElement& y) const;
  uint64_t word_length(const GroupElement& x) const { return word_distance(identity(), x); }

  /// Exponential growth rate lim log|B_n|/n of the ball volumes.
  double growth_rate() const;

  /// |{x : d(e,x) = r}| for the tree-like groups (closed form).
  double sphere_size(uint64_t r) const;

  /// Throws std::invalid_argument if e is not a valid canonical element of
  /// this group (dimension mismatch, letter out of range, unreduced word).
  void check_element(const GroupElement& e) const;

  std::string to_string(const GroupElement& e) const;
  std::string name() const;

  bool operator==(const GroupSpec&) const = default;

 private:
  GroupSpec(GroupKind kind, uint32_t param) : kind_(kind), param_(param) {}
  GroupKind kind_;
  uint32_t param_;
};

/// Step distribution of the walk: positive weight on every generator,
/// strictly positive holding probability, and q(s) = q(s^-1).
class StepDistribution {
 public:
  /// Uniform weight (1 - laziness)/|S| on each generator.
  static StepDistribution uniform_lazy(const GroupSpec& g, double laziness);
  /// Explicit per-generator weights; must sum to 1 - laziness within 1e-12
  /// and be symmetric within 1e-12. Weights are symmetrized exactly and
  /// renormalized before use.
  static StepDistribution from_weights(const GroupSpec& g, std::vector<double> weights,
                                       double laziness);

  double laziness() const { return laziness_; }
  double weight(uint8_t letter) const { return weights_[letter]; }
  uint32_t generator_count() const { return static_cast<uint32_t>(weights_.size()); }
  /// All generator weights equal (required by the exact radial recursions).
  bool isotropic() const { return isotropic_; }

  /// Samples a step label: a generator index, or kIdentityStep for a lazy
  /// move. Works with Rng and KeyStream alike.
  template <class G>
  uint8_t sample(G& rng) const {
    double u = rng.next_unit();
    if (u < laziness_) return kIdentityStep;
    u -= laziness_;
    const size_t n = weights_.size();
    for (size_t i = 0; i + 1 < n; ++i) {
      if (u < weights_[i]) return static_cast<uint8_t>(i);
      u -= weights_[i];
    }
    return static_cast<uint8_t>(n - 1);
  }

 private:
  StepDistribution() = default;
  std::vector<double> weights_;
  double laziness_ = 0.0;
  bool isotropic_ = false;
};

/// Append-only interning table mapping canonical group elements to dense
/// 32-bit site ids. Processes that must compare positions (for instance two
/// walks killing each other on contact) share one table.
class SiteTable {
 public:
  explicit SiteTable(const GroupSpec& spec) : spec_(spec) {}

  uint32_t intern(const GroupElement& e);
  std::optional<uint32_t> find(const GroupElement& e) const;
  const GroupElement& element(uint32_t id) const { return elems_[id]; }
  size_t size() const { return elems_.size(); }
  const GroupSpec& spec() const { return spec_; }

  /// Site reached from `site` by one step with the given label.
  uint32_t step(uint32_t site, uint8_t letter);

 private:
  GroupSpec spec_;
  std::vector<GroupElement> elems_;
  std::unordered_map<GroupElement, uint32_t, GroupElementHash> index_;
};

}  // namespace brw
