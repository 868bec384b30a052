// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace brw {
namespace {

MarkedTree sample_tree(const OffspringDistribution& mu, const StepDistribution* q,
                       uint32_t depth, Rng& rng, bool unimodular_root) {
  MarkedTree t;
  t.max_depth = depth;
  t.nodes.push_back({});
  std::optional<UgwRootLaw> root_law;
  if (unimodular_root) root_law = ugw_root_law(mu);
  uint32_t begin = 0, end = 1;
  for (uint32_t d = 0; d < depth; ++d) {
    for (uint32_t v = begin; v < end; ++v) {
      const uint32_t k = (v == 0 && root_law) ? root_law->sample_degree(rng) : mu.sample(rng);
      for (uint32_t c = 0; c < k; ++c) {
        MarkedTree::Node child;
        child.parent = v;
        child.depth = d + 1;
        if (q) child.edge_label = q->sample(rng);
        t.nodes[v].children.push_back(static_cast<uint32_t>(t.nodes.size()));
        t.nodes.push_back(std::move(child));
      }
    }
    begin = end;
    end = static_cast<uint32_t>(t.nodes.size());
    if (begin == end) break;  // extinct before the depth cap
  }
  t.depth_censored = begin != end;  // the last sampled layer sits at max_depth
  return t;
}

}  // namespace

MarkedTree sample_gw(const OffspringDistribution& mu, uint32_t depth, Rng& rng) {
  return sample_tree(mu, nullptr, depth, rng, false);
}

MarkedTree sample_ugw(const OffspringDistribution& mu, uint32_t depth, Rng& rng) {
  return sample_tree(mu, nullptr, depth, rng, true);
}

MarkedTree sample_ugw_labeled(const OffspringDistribution& mu, const StepDistribution& q,
                              uint32_t depth, Rng& rng) {
  return sample_tree(mu, &q, depth, rng, true);
}

RootCluster induced_root_cluster(const MarkedTree& tree) {
  RootCluster out;
  if (tree.nodes.empty() || tree.nodes[0].mark != kAlive) return out;
  out.root_open = true;
  out.tree.max_depth = tree.max_depth;
  out.tree.depth_censored = tree.depth_censored;
  std::vector<uint32_t> new_id(tree.nodes.size(), MarkedTree::kNoParent);
  std::vector<uint32_t> stack{0};
  new_id[0] = 0;
  out.tree.nodes.push_back({MarkedTree::kNoParent, {}, 0, tree.nodes[0].mark,
                            tree.nodes[0].edge_label});
  // BFS in index order keeps the re-indexed arena breadth-first as well.
  for (size_t head = 0; head < stack.size(); ++head) {
    const uint32_t v = stack[head];
    for (uint32_t c : tree.nodes[v].children) {
      if (tree.nodes[c].mark != kAlive) continue;
      new_id[c] = static_cast<uint32_t>(out.tree.nodes.size());
      out.tree.nodes.push_back({new_id[v], {}, tree.nodes[c].depth, tree.nodes[c].mark,
                                tree.nodes[c].edge_label});
      out.tree.nodes[new_id[v]].children.push_back(new_id[c]);
      stack.push_back(c);
    }
  }
  return out;
}

PairFunctional f_adjacent() {
  return {"adjacent", 1, [](const MarkedTree& t, uint32_t u, uint32_t x) {
            return (t.nodes[x].parent == u || t.nodes[u].parent == x) ? 1.0 : 0.0;
          }};
}

PairFunctional f_adjacent_deg(uint32_t deg) {
  return {"adjacent_deg" + std::to_string(deg), 1,
          [deg](const MarkedTree& t, uint32_t u, uint32_t x) {
            const bool adj = t.nodes[x].parent == u || t.nodes[u].parent == x;
            return (adj && t.degree(x) == deg) ? 1.0 : 0.0;
          }};
}

PairFunctional f_adjacent_deg_u(uint32_t deg) {
  return {"adjacent_deg_u" + std::to_string(deg), 1,
          [deg](const MarkedTree& t, uint32_t u, uint32_t x) {
            const bool adj = t.nodes[x].parent == u || t.nodes[u].parent == x;
            return (adj && t.degree(u) == deg) ? 1.0 : 0.0;
          }};
}

PairFunctional f_dist2_deg(uint32_t deg_u, uint32_t deg_x) {
  return {"dist2_deg" + std::to_string(deg_u) + "_" + std::to_string(deg_x), 2,
          [deg_u, deg_x](const MarkedTree& t, uint32_t u, uint32_t x) {
            // distance two in a tree: sibling, grandchild, or grandparent
            auto up = [&t](uint32_t v) { return t.nodes[v].parent; };
            bool dist2 = false;
            if (u != x) {
              if (up(u) != MarkedTree::kNoParent && up(u) == up(x)) dist2 = true;
              if (up(x) != MarkedTree::kNoParent && up(up(x)) == u) dist2 = true;
              if (up(u) != MarkedTree::kNoParent && up(up(u)) == x) dist2 = true;
            }
            return (dist2 && t.degree(u) == deg_u && t.degree(x) == deg_x) ? 1.0 : 0.0;
          }};
}

const std::vector<PairFunctional>& shipped_pair_functionals() {
  static const std::vector<PairFunctional> fns = {
      f_adjacent(), f_adjacent_deg(2), f_adjacent_deg(3), f_adjacent_deg_u(3),
      // Asymmetric in (u, x), so the two transport sums differ pathwise and
      // agree only in expectation.
      f_dist2_deg(2, 3)};
  return fns;
}

MassTransportCheck mass_transport_check(const OffspringDistribution& mu,
                                        const PairFunctional& f, uint64_t samples,
                                        uint32_t depth, uint64_t seed, RootSampler sampler) {
  if (samples == 0) throw std::invalid_argument("mass_transport_check: zero samples");
  if (depth < f.radius + 1)
    throw std::invalid_argument(
        "mass_transport_check: functional radius exceeds the sampled depth");
  Rng rng(mix64(seed ^ 0x6d74700a0a0a0a0aULL));
  MeanAcc lhs, rhs, diff;
  for (uint64_t i = 0; i < samples; ++i) {
    const MarkedTree t = (sampler == RootSampler::unimodular) ? sample_ugw(mu, depth, rng)
                                                              : sample_gw(mu, depth, rng);
    double l = 0.0, r = 0.0;
    // Only vertices within f.radius of the root can contribute; vertex
    // degrees are exact down to depth - 1 >= f.radius.
    for (uint32_t x = 0; x < t.nodes.size(); ++x) {
      if (t.nodes[x].depth > f.radius) break;  // breadth-first order
      l += f.eval(t, 0, x);
      r += f.eval(t, x, 0);
    }
    lhs.add(l);
    rhs.add(r);
    diff.add(l - r);
  }
  MassTransportCheck c;
  c.samples = samples;
  c.lhs = lhs.mean();
  c.rhs = rhs.mean();
  c.lhs_se = lhs.se();
  c.rhs_se = rhs.se();
  c.diff = diff.mean();
  c.diff_se = diff.se();
  c.z = c.diff_se > 0.0 ? c.diff / c.diff_se : 0.0;
  return c;
}

BallWindow ball_window(uint32_t degree, uint32_t depth) {
  if (degree < 3) throw std::invalid_argument("ball_window: degree must be >= 3");
  BallWindow w;
  w.degree = degree;
  w.depth = depth;
  w.parent.push_back(MarkedTree::kNoParent);
  w.children.push_back({});
  w.vertex_depth.push_back(0);
  uint32_t begin = 0, end = 1;
  for (uint32_t d = 0; d < depth; ++d) {
    for (uint32_t v = begin; v < end; ++v) {
      const uint32_t kids = (v == 0) ? degree : degree - 1;
      for (uint32_t c = 0; c < kids; ++c) {
        const uint32_t id = static_cast<uint32_t>(w.parent.size());
        w.parent.push_back(v);
        w.children.push_back({});
        w.vertex_depth.push_back(d + 1);
        w.children[v].push_back(id);
      }
    }
    begin = end;
    end = static_cast<uint32_t>(w.parent.size());
  }
  return w;
}

bool window_closed(const PsiConfig& cfg) {
  const BallWindow w = ball_window(cfg.degree, cfg.depth);
  if (cfg.open.size() != w.size())
    throw std::invalid_argument("window_closed: configuration size mismatch");
  for (size_t v = 0; v < w.size(); ++v)
    if (w.vertex_depth[v] == cfg.depth && !cfg.open[v]) return false;
  return true;
}

PsiResult psi_masses(const PsiConfig& cfg) {
  if (!(cfg.K > 0)) throw std::invalid_argument("psi_masses: K must be positive");
  const BallWindow w = ball_window(cfg.degree, cfg.depth);
  if (cfg.open.size() != w.size())
    throw std::invalid_argument("psi_masses: configuration size mismatch");
  if (!window_closed(cfg))
    throw std::invalid_argument("psi_masses: window not closed (dead vertex on the rim)");

  const size_t n = w.size();
  PsiResult res;
  res.cluster_of.assign(n, -1);
  // Open clusters by flood fill; any member on the outermost layer makes the
  // cluster spanning (its continuation outside the window is unknown, so it
  // is treated as infinite).
  std::vector<std::vector<uint32_t>> clusters;
  for (uint32_t v = 0; v < n; ++v) {
    if (!cfg.open[v] || res.cluster_of[v] != -1) continue;
    const int32_t id = static_cast<int32_t>(clusters.size());
    clusters.push_back({});
    std::vector<uint32_t> stack{v};
    res.cluster_of[v] = id;
    while (!stack.empty()) {
      const uint32_t u = stack.back();
      stack.pop_back();
      clusters[id].push_back(u);
      auto visit = [&](uint32_t nb) {
        if (cfg.open[nb] && res.cluster_of[nb] == -1) {
          res.cluster_of[nb] = id;
          stack.push_back(nb);
        }
      };
      if (w.parent[u] != MarkedTree::kNoParent) visit(w.parent[u]);
      for (uint32_t c : w.children[u]) visit(c);
    }
  }
  res.cluster_spanning.assign(clusters.size(), 0);
  for (size_t id = 0; id < clusters.size(); ++id)
    for (uint32_t v : clusters[id])
      if (w.vertex_depth[v] == cfg.depth) res.cluster_spanning[id] = 1;

  // Dead boundary of each finite cluster (all in-window: members avoid the
  // rim, so their neighbours exist in the window and are dead by openness
  // maximality).
  std::vector<std::vector<uint32_t>> boundary(clusters.size());
  for (size_t id = 0; id < clusters.size(); ++id) {
    if (res.cluster_spanning[id]) continue;
    std::vector<uint8_t> seen(n, 0);
    for (uint32_t v : clusters[id]) {
      auto touch = [&](uint32_t nb) {
        if (!cfg.open[nb] && !seen[nb]) {
          seen[nb] = 1;
          boundary[id].push_back(nb);
        }
      };
      if (w.parent[v] != MarkedTree::kNoParent) touch(w.parent[v]);
      for (uint32_t c : w.children[v]) touch(c);
    }
  }

  auto light = [&](size_t id) {
    if (res.cluster_spanning[id]) return false;
    // ratio |C| / |boundary| < K, exact comparison
    return Rational(clusters[id].size()) < cfg.K * Rational(boundary[id].size());
  };

  res.psi.assign(n, Rational(1));
  for (size_t id = 0; id < clusters.size(); ++id) {
    if (!light(id)) continue;
    const Rational share = Rational(1) / Rational(boundary[id].size());
    for (uint32_t v : clusters[id]) {
      res.psi[v] = 0;
      for (uint32_t b : boundary[id]) {
        res.psi[b] += share;
        res.flows.push_back({v, b, share});
      }
    }
  }
  res.total = 0;
  for (const Rational& x : res.psi) res.total += x;
  res.conserved = res.total == Rational(n);
  return res;
}

namespace {

struct IsoSearch {
  const MarkedTree* tree = nullptr;
  uint32_t max_subset = 0;
  uint64_t budget = 0;
  uint64_t explored = 0;
  bool aborted = false;
  double best_ratio = 0.0;
  std::vector<uint32_t> best_set{};
  std::vector<uint32_t> current{};
  uint32_t boundary = 0;

  bool eligible(uint32_t v) const {
    return !tree->depth_censored || tree->nodes[v].depth < tree->max_depth;
  }

  // Extends the connected set by candidates from `frontier[from..]`; each
  // subset of eligible vertices containing the root is visited exactly once.
  void grow(std::vector<uint32_t>& frontier, size_t from) {
    if (aborted) return;
    const double ratio =
        static_cast<double>(boundary) / static_cast<double>(current.size());
    if (best_set.empty() || ratio < best_ratio) {
      best_ratio = ratio;
      best_set = current;
    }
    if (current.size() == max_subset) return;
    for (size_t i = from; i < frontier.size(); ++i) {
      if (++explored > budget) {
        aborted = true;
        return;
      }
      const uint32_t v = frontier[i];
      // Adding v: it leaves the boundary, all its children enter it; only
      // the eligible children become growth candidates.
      uint32_t added = 0;
      const size_t old_size = frontier.size();
      for (uint32_t c : tree->nodes[v].children) {
        ++added;
        if (eligible(c)) frontier.push_back(c);
      }
      current.push_back(v);
      boundary += added;
      boundary -= 1;
      grow(frontier, i + 1);
      boundary += 1;
      boundary -= added;
      current.pop_back();
      frontier.resize(old_size);
      if (aborted) return;
    }
  }
};

}  // namespace

IsoResult anchored_iso(const MarkedTree& tree, uint32_t max_subset, uint64_t budget) {
  if (tree.nodes.empty()) throw std::invalid_argument("anchored_iso: empty tree");
  if (max_subset == 0) throw std::invalid_argument("anchored_iso: max_subset must be >= 1");
  IsoResult out;
  IsoSearch search{&tree, max_subset, budget};
  if (!search.eligible(0))
    throw std::invalid_argument("anchored_iso: root neighbourhood incomplete");
  search.current.push_back(0);
  search.boundary = static_cast<uint32_t>(tree.nodes[0].children.size());
  std::vector<uint32_t> frontier;
  for (uint32_t c : tree.nodes[0].children)
    if (search.eligible(c)) frontier.push_back(c);
  search.grow(frontier, 0);
  out.exhaustive = !search.aborted;
  out.subsets_explored = search.explored + 1;
  out.ratio = search.best_ratio;
  out.witness = search.best_set;

  // Ball-shaped upper bounds for sizes past the exhaustive cap.
  std::vector<uint32_t> layer{0};
  uint64_t size = 1;
  uint64_t boundary = tree.nodes[0].children.size();
  uint32_t depth = 0;
  while (!layer.empty()) {
    ++depth;
    std::vector<uint32_t> next;
    for (uint32_t v : layer)
      for (uint32_t c : tree.nodes[v].children)
        if (search.eligible(c)) next.push_back(c);
    if (next.empty()) break;
    uint64_t next_children = 0;
    for (uint32_t v : next) next_children += tree.nodes[v].children.size();
    size += next.size();
    boundary = next_children;
    if (size > max_subset)
      out.ball_ratios.push_back(
          {size, static_cast<double>(boundary) / static_cast<double>(size)});
    layer = std::move(next);
  }
  if (!out.exhaustive) {
    for (const auto& [s, r] : out.ball_ratios) out.ratio = std::min(out.ratio, r);
  }
  return out;
}

ThinningOracle thinning_oracle(const OffspringDistribution& mu, double p) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("thinning_oracle: p must be in (0, 1]");
  ThinningOracle o;
  o.p = p;
  if (p * mu.mean() <= 1.0) {
    o.subcritical = true;
    o.q_star = 1.0;
    o.survival = 0.0;
    return o;
  }
  double s = 0.0;
  for (uint64_t it = 0; it < 1'000'000; ++it) {
    const double next = mu.pgf(1.0 - p + p * s);
    o.iterations = it + 1;
    if (std::abs(next - s) < 1e-15) {
      s = next;
      break;
    }
    s = next;
  }
  o.q_star = s;
  o.survival = 1.0 - s;
  return o;
}

double depth_survival(const OffspringDistribution& mu, double p, uint32_t depth) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("depth_survival: p must be in (0, 1]");
  double v = 1.0;  // depth 0: an open root reaches depth 0
  for (uint32_t l = 0; l < depth; ++l) v = 1.0 - mu.pgf(1.0 - p * v);
  return v;
}

MarkedTree bernoulli_site_percolation(const MarkedTree& tree, double p, Rng& rng) {
  if (!(p >= 0.0) || p > 1.0)
    throw std::invalid_argument("bernoulli_site_percolation: p must be in [0, 1]");
  MarkedTree out = tree;
  for (auto& n : out.nodes) n.mark = rng.next_unit() < p ? kAlive : kDagger;
  return out;
}

int64_t percolation_depth_reached(const MarkedTree& tree, double p, Rng& rng) {
  if (tree.nodes.empty()) return -1;
  std::vector<uint8_t> reach(tree.nodes.size(), 0);
  int64_t deepest = -1;
  for (uint32_t v = 0; v < tree.nodes.size(); ++v) {
    const bool open = rng.next_unit() < p;
    if (!open) continue;
    const uint32_t parent = tree.nodes[v].parent;
    if (parent == MarkedTree::kNoParent) {
      reach[v] = 1;
    } else if (reach[parent]) {
      reach[v] = 1;
    }
    if (reach[v]) deepest = std::max<int64_t>(deepest, tree.nodes[v].depth);
  }
  return deepest;
}

}  // namespace brw
