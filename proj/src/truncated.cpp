// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/truncated.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "brwlab/walk_dp.hpp"

namespace brw {
namespace {

// Keeps the N smallest-priority members of one cell alive, marks the rest.
void select_cell(const FamilyTree& aux, std::vector<uint32_t>& cell, uint32_t N,
                 std::vector<uint8_t>& marks) {
  if (cell.size() <= N) return;
  std::partial_sort(cell.begin(), cell.begin() + N, cell.end(),
                    [&aux](uint32_t a, uint32_t b) {
                      const uint64_t pa = node_priority(aux, a);
                      const uint64_t pb = node_priority(aux, b);
                      return pa != pb ? pa < pb : a < b;
                    });
  for (size_t j = N; j < cell.size(); ++j) marks[cell[j]] = kDagger;
}

std::vector<uint8_t> marks_paper_exact(const FamilyTree& aux, uint32_t N) {
  std::vector<uint8_t> marks(aux.nodes.size(), kAlive);
  std::unordered_map<uint32_t, std::vector<uint32_t>> cells;
  for (uint32_t g = 0; g < aux.generations(); ++g) {
    cells.clear();
    for (uint32_t i = aux.gen_begin(g); i < aux.gen_end[g]; ++i)
      cells[aux.nodes[i].site].push_back(i);
    for (auto& [site, cell] : cells) select_cell(aux, cell, N, marks);
  }
  return marks;
}

// Candidates are children of live nodes only; never-born descendants of a
// dead lineage are marked as well (they are not alive), but they do not
// enter the cell counts.
std::vector<uint8_t> marks_operational(const FamilyTree& aux, uint32_t N) {
  std::vector<uint8_t> marks(aux.nodes.size(), kDagger);
  marks[0] = kAlive;  // the root's cell holds one particle and N >= 1
  std::unordered_map<uint32_t, std::vector<uint32_t>> cells;
  for (uint32_t g = 1; g < aux.generations(); ++g) {
    cells.clear();
    for (uint32_t i = aux.gen_begin(g); i < aux.gen_end[g]; ++i) {
      if (marks[aux.nodes[i].parent] == kAlive) cells[aux.nodes[i].site].push_back(i);
    }
    for (auto& [site, cell] : cells) {
      for (uint32_t idx : cell) marks[idx] = kAlive;
      select_cell(aux, cell, N, marks);
    }
  }
  return marks;
}

std::vector<uint8_t> marks_site_resource(const FamilyTree& aux, uint32_t N) {
  std::unordered_map<uint32_t, uint64_t> visits;
  for (const auto& n : aux.nodes) ++visits[n.site];
  std::vector<uint8_t> marks(aux.nodes.size(), kAlive);
  for (uint32_t i = 0; i < aux.nodes.size(); ++i)
    if (visits[aux.nodes[i].site] > N) marks[i] = kDagger;
  return marks;
}

}  // namespace

std::string to_string(TruncationMode mode) {
  switch (mode) {
    case TruncationMode::paper_exact: return "paper_exact";
    case TruncationMode::operational: return "operational";
    case TruncationMode::site_resource: return "site_resource";
  }
  return "?";
}

uint64_t node_priority(const FamilyTree& tree, uint32_t idx) {
  KeyStream s = key_stream(tree.keys[idx], rng_tag::priority);
  return s.next_u64();
}

std::vector<uint8_t> truncation_marks(const FamilyTree& aux, uint32_t N, TruncationMode mode) {
  if (N == 0) throw std::invalid_argument("truncation_marks: N must be >= 1");
  switch (mode) {
    case TruncationMode::paper_exact: return marks_paper_exact(aux, N);
    case TruncationMode::operational: return marks_operational(aux, N);
    case TruncationMode::site_resource: return marks_site_resource(aux, N);
  }
  throw std::invalid_argument("truncation_marks: unknown mode");
}

std::vector<uint8_t> root_cluster_flags(const FamilyTree& tree,
                                        const std::vector<uint8_t>& marks) {
  std::vector<uint8_t> in(tree.nodes.size(), 0);
  if (tree.nodes.empty() || marks[0] != kAlive) return in;
  in[0] = 1;
  for (uint32_t i = 1; i < tree.nodes.size(); ++i)
    in[i] = (marks[i] == kAlive && in[tree.nodes[i].parent]) ? 1 : 0;
  return in;
}

TruncationResult summarize_truncation(const FamilyTree& aux, const std::vector<uint8_t>& marks,
                                      uint32_t N, TruncationMode mode) {
  TruncationResult r;
  r.N = N;
  r.mode = mode;
  r.horizon = aux.horizon;
  r.seed = aux.tree_key;
  r.capped = aux.capped;
  const std::vector<uint8_t> in = root_cluster_flags(aux, marks);
  r.root_alive = !in.empty() && in[0];
  r.alive_per_gen.assign(aux.generations(), 0);
  for (uint32_t i = 0; i < aux.nodes.size(); ++i) {
    if (in[i]) {
      ++r.root_cluster_size;
      ++r.alive_per_gen[aux.generation_of(i)];
    }
  }
  r.alive_at_horizon =
      aux.horizon < r.alive_per_gen.size() && r.alive_per_gen[aux.horizon] > 0;
  return r;
}

TruncatedRun run_truncated(const BrwParams& params, uint32_t N, TruncationMode mode,
                           uint64_t tree_key, const std::shared_ptr<SiteTable>& sites) {
  if (params.horizon == 0) throw std::invalid_argument("run_truncated: horizon must be >= 1");
  if (N == 0) throw std::invalid_argument("run_truncated: N must be >= 1");
  TruncatedRun run{run_brw(params, tree_key, sites), {}};
  const std::vector<uint8_t> marks = truncation_marks(run.tree, N, mode);
  run.result = summarize_truncation(run.tree, marks, N, mode);
  for (uint32_t i = 0; i < run.tree.nodes.size(); ++i) run.tree.nodes[i].mark = marks[i];
  return run;
}

DominanceReport dominance_check(const TruncatedRun& paper, const TruncatedRun& operational) {
  if (paper.result.mode != TruncationMode::paper_exact ||
      operational.result.mode != TruncationMode::operational)
    throw std::invalid_argument("dominance_check: expects a paper_exact and an operational run");
  if (paper.result.seed != operational.result.seed ||
      paper.tree.nodes.size() != operational.tree.nodes.size() ||
      paper.result.N != operational.result.N)
    throw std::invalid_argument("dominance_check: runs are not coupled");
  std::vector<uint8_t> paper_marks(paper.tree.nodes.size());
  for (uint32_t i = 0; i < paper.tree.nodes.size(); ++i)
    paper_marks[i] = paper.tree.nodes[i].mark;
  const std::vector<uint8_t> in_paper = root_cluster_flags(paper.tree, paper_marks);
  DominanceReport rep;
  rep.containment_ok = true;
  for (uint32_t i = 0; i < paper.tree.nodes.size(); ++i) {
    const bool op_alive = operational.tree.nodes[i].mark == kAlive;
    if (in_paper[i] && !op_alive) {
      rep.containment_ok = false;
      rep.first_violation = std::min(rep.first_violation, i);
    }
    if (op_alive && !in_paper[i]) rep.strict = true;
  }
  return rep;
}

namespace {

void parallel_replicas(uint64_t n, uint32_t workers, const std::function<void(uint64_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (uint64_t r = 0; r < n; ++r) fn(r);
    return;
  }
  std::atomic<uint64_t> cursor{0};
  std::vector<std::thread> pool;
  const uint32_t count = std::min<uint64_t>(workers, n);
  pool.reserve(count);
  for (uint32_t t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const uint64_t r = cursor.fetch_add(1);
        if (r >= n) return;
        fn(r);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SweepResult survival_sweep(const BrwParams& params, const std::vector<uint32_t>& n_values,
                           TruncationMode mode, uint64_t replicas, uint64_t master_seed,
                           double epsilon, uint32_t workers) {
  if (replicas == 0) throw std::invalid_argument("survival_sweep: zero replicas");
  if (n_values.empty()) throw std::invalid_argument("survival_sweep: empty N grid");
  std::vector<uint32_t> ns = n_values;
  std::sort(ns.begin(), ns.end());
  if (ns.front() == 0) throw std::invalid_argument("survival_sweep: N must be >= 1");

  const size_t width = ns.size();
  // Per-replica slots keep aggregation independent of worker scheduling.
  std::vector<uint8_t> alive(replicas * width, 0);
  std::vector<uint64_t> cluster(replicas * width, 0);
  std::vector<uint8_t> plain_alive(replicas, 0);
  std::vector<uint8_t> capped(replicas, 0);
  std::vector<uint8_t> violation(replicas, 0);

  parallel_replicas(replicas, workers, [&](uint64_t r) {
    auto sites = std::make_shared<SiteTable>(params.group);
    const uint64_t key = replica_key(master_seed, 0, r);
    const FamilyTree aux = run_brw(params, key, sites);
    plain_alive[r] = aux.alive_at(params.horizon) ? 1 : 0;
    capped[r] = aux.capped ? 1 : 0;
    std::vector<uint8_t> prev_marks;
    for (size_t j = 0; j < width; ++j) {
      const std::vector<uint8_t> marks = truncation_marks(aux, ns[j], mode);
      const TruncationResult res = summarize_truncation(aux, marks, ns[j], mode);
      alive[r * width + j] = res.alive_at_horizon ? 1 : 0;
      cluster[r * width + j] = res.root_cluster_size;
      if (j > 0) {
        // Common random numbers make survivor sets nested in N.
        for (uint32_t i = 0; i < marks.size(); ++i) {
          if (prev_marks[i] == kAlive && marks[i] != kAlive) {
            violation[r] = 1;
            break;
          }
        }
      }
      prev_marks = marks;
    }
  });

  SweepResult out;
  out.mode = mode;
  out.horizon = params.horizon;
  out.replicas = replicas;
  out.epsilon = epsilon;
  const double rho = spectral_radius(params.group, params.step).value;
  out.m_rho = params.offspring.mean() * rho;
  uint64_t plain = 0, capped_total = 0;
  for (uint64_t r = 0; r < replicas; ++r) {
    plain += plain_alive[r];
    capped_total += capped[r];
    out.coupling_violations += violation[r];
  }
  out.plain_alive_fraction = static_cast<double>(plain) / static_cast<double>(replicas);
  out.plain_ci = wilson_interval(plain, replicas);
  for (size_t j = 0; j < width; ++j) {
    SweepCell cell;
    cell.N = ns[j];
    cell.replicas = replicas;
    cell.capped_replicas = capped_total;
    uint64_t cluster_sum = 0;
    for (uint64_t r = 0; r < replicas; ++r) {
      cell.alive += alive[r * width + j];
      cluster_sum += cluster[r * width + j];
    }
    cell.alive_fraction = static_cast<double>(cell.alive) / static_cast<double>(replicas);
    const Interval ci = wilson_interval(cell.alive, replicas);
    cell.ci_low = ci.low;
    cell.ci_high = ci.high;
    cell.mean_cluster_size = static_cast<double>(cluster_sum) / static_cast<double>(replicas);
    out.cells.push_back(cell);
  }
  for (const SweepCell& cell : out.cells) {
    if (cell.ci_high < epsilon) out.n_c_bracket_low = cell.N;
    if (!out.n_c_estimate && cell.ci_low > epsilon) out.n_c_estimate = cell.N;
  }
  return out;
}

}  // namespace brw
