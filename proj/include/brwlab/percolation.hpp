// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "brwlab/family_tree.hpp"
#include "brwlab/group.hpp"
#include "brwlab/offspring.hpp"
#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"

namespace brw {

using Rational = boost::multiprecision::cpp_rational;

/// Rooted tree with explicit child lists, open/dead vertex marks, and
/// optional edge labels. Used for the sampling-side experiments, where
/// neighbourhood queries matter more than arena compactness.
struct MarkedTree {
  static constexpr uint32_t kNoParent = 0xffffffffu;
  struct Node {
    uint32_t parent = kNoParent;
    std::vector<uint32_t> children;
    uint32_t depth = 0;
    uint8_t mark = kAlive;
    uint8_t edge_label = kIdentityStep;  // label of the edge to the parent
  };
  std::vector<Node> nodes;
  uint32_t max_depth = 0;
  bool depth_censored = false;  // vertices at max_depth have unsampled children

  uint32_t degree(uint32_t v) const {
    return static_cast<uint32_t>(nodes[v].children.size()) +
           (nodes[v].parent == kNoParent ? 0 : 1);
  }
};

/// Galton-Watson tree truncated at `depth` (root breeds like everyone).
MarkedTree sample_gw(const OffspringDistribution& mu, uint32_t depth, Rng& rng);

/// Size-biased rooting: root child count per ugw_root_law, every other
/// vertex breeds per mu.
MarkedTree sample_ugw(const OffspringDistribution& mu, uint32_t depth, Rng& rng);

/// As sample_ugw, with i.i.d. edge labels drawn from the step law.
MarkedTree sample_ugw_labeled(const OffspringDistribution& mu, const StepDistribution& q,
                              uint32_t depth, Rng& rng);

struct RootCluster {
  MarkedTree tree;   // re-indexed; empty when the root is dead
  bool root_open = false;
};

/// Connected open component of the root, marks and labels preserved.
RootCluster induced_root_cluster(const MarkedTree& tree);

/// Bounded-radius pair functional for mass-transport checks. `eval` must
/// depend only on the radius-`radius` neighbourhood of its two vertices.
struct PairFunctional {
  std::string name;
  uint32_t radius = 1;
  std::function<double(const MarkedTree&, uint32_t, uint32_t)> eval;
};

PairFunctional f_adjacent();                       // 1{x ~ u}
PairFunctional f_adjacent_deg(uint32_t deg);       // 1{x ~ u, deg(x) = deg}
PairFunctional f_adjacent_deg_u(uint32_t deg);     // 1{x ~ u, deg(u) = deg}
PairFunctional f_dist2_deg(uint32_t deg_u, uint32_t deg_x);
const std::vector<PairFunctional>& shipped_pair_functionals();

enum class RootSampler : uint8_t {
  unimodular,  // sample_ugw
  plain_gw,    // deliberately non-unimodular negative control
};

struct MassTransportCheck {
  double lhs = 0.0;       // mean of sum_x f(T, root, x)
  double rhs = 0.0;       // mean of sum_x f(T, x, root)
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double diff = 0.0;
  double diff_se = 0.0;   // paired standard error of lhs_i - rhs_i
  double z = 0.0;         // diff in units of diff_se (0 when diff_se = 0)
  uint64_t samples = 0;
};

/// Monte Carlo two-sided evaluation of the transport identity
/// E sum_x f(G, o, x) = E sum_x f(G, x, o). `depth` must exceed the
/// functional's radius so truncation is exact.
MassTransportCheck mass_transport_check(const OffspringDistribution& mu,
                                        const PairFunctional& f, uint64_t samples,
                                        uint32_t depth, uint64_t seed,
                                        RootSampler sampler = RootSampler::unimodular);

/// Site configuration on the radius-`depth` ball of the degree-`degree`
/// regular tree. open[v] follows breadth-first indexing (root first).
struct PsiConfig {
  uint32_t degree = 3;
  uint32_t depth = 0;
  std::vector<uint8_t> open;
  Rational K = 1;
};

/// Ball adjacency helper shared by psi_masses and the tests.
struct BallWindow {
  uint32_t degree = 0;
  uint32_t depth = 0;
  std::vector<uint32_t> parent;              // kNoParent for the root
  std::vector<std::vector<uint32_t>> children;
  std::vector<uint32_t> vertex_depth;
  size_t size() const { return parent.size(); }
};

BallWindow ball_window(uint32_t degree, uint32_t depth);

struct PsiFlow {
  uint32_t from = 0;
  uint32_t to = 0;
  Rational amount;  // recorded once per ordered pair; reverse flow is -amount
};

struct PsiResult {
  std::vector<Rational> psi;
  std::vector<PsiFlow> flows;
  std::vector<int32_t> cluster_of;       // -1 for dead vertices
  std::vector<uint8_t> cluster_spanning; // per cluster id
  Rational total;
  bool conserved = false;  // total == vertex count, exact
};

/// Is every dead vertex strictly inside the window (outermost layer fully
/// open)? psi_masses requires this, so that each dead vertex sees its whole
/// neighbourhood and every finite cluster has an in-window boundary.
bool window_closed(const PsiConfig& cfg);

/// Mass redistribution: open vertices in heavy or spanning clusters keep 1;
/// open vertices in a light finite cluster (|C|/|boundary C| < K) donate
/// their unit mass in equal shares to the cluster's dead boundary; a dead
/// vertex holds 1 plus everything donated to it. Exact rational arithmetic.
PsiResult psi_masses(const PsiConfig& cfg);

struct IsoResult {
  double ratio = 0.0;             // min |boundary S| / |S| over explored sets
  std::vector<uint32_t> witness;  // a minimizing set (vertex indices)
  bool exhaustive = false;
  uint64_t subsets_explored = 0;
  /// Ball-shaped upper bounds (size, ratio) for sizes beyond the search cap.
  std::vector<std::pair<uint64_t, double>> ball_ratios;
};

/// Anchored isoperimetric search: minimizes boundary-to-size ratio over
/// connected root-containing subsets of at most max_subset vertices.
/// Exhaustive within `budget` enumerated subsets, ball heuristic with
/// exhaustive=false beyond. Sets never include censored-depth vertices,
/// whose neighbourhoods are incomplete.
IsoResult anchored_iso(const MarkedTree& tree, uint32_t max_subset,
                       uint64_t budget = 20'000'000);

struct ThinningOracle {
  double p = 0.0;
  double q_star = 1.0;      // extinction probability of the thinned process
  double survival = 0.0;    // 1 - q_star, conditional on an open root
  uint64_t iterations = 0;
  bool subcritical = false; // p * mean <= 1: q_star = 1 analytically
};

/// Extinction probability of the Bernoulli(p)-thinned branching process:
/// smallest fixed point of s -> F(1 - p + p s), found by monotone fixed
/// point iteration from 0 (to 1e-15), with the subcritical case settled
/// analytically.
ThinningOracle thinning_oracle(const OffspringDistribution& mu, double p);

/// P(the open root cluster reaches depth L | root open); decreasing in L
/// with limit 1 - q_star.
double depth_survival(const OffspringDistribution& mu, double p, uint32_t depth);

/// Independent vertex marks: open with probability p (root included).
MarkedTree bernoulli_site_percolation(const MarkedTree& tree, double p, Rng& rng);

/// Mark-only fast path: samples Bernoulli(p) marks on `tree` in place of a
/// full copy and reports the deepest level reached by the open root
/// cluster, or -1 when the root is dead. Distributionally identical to
/// running bernoulli_site_percolation followed by a cluster scan.
int64_t percolation_depth_reached(const MarkedTree& tree, double p, Rng& rng);

}  // namespace brw
