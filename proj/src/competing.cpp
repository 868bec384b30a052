// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/competing.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "brwlab/truncated.hpp"

namespace brw {
namespace {

BrwParams invasive_params(const CompetingParams& p) {
  return BrwParams{p.group, p.step_invasive, p.offspring_invasive, p.start_invasive,
                   p.horizon, p.caps, std::nullopt};
}

BrwParams noninvasive_params(const CompetingParams& p) {
  return BrwParams{p.group, p.step_noninvasive, p.offspring_noninvasive, p.group.identity(),
                   p.horizon, p.caps, std::nullopt};
}

// A noninvasive node is dead iff some invasive node of the same generation
// occupies its site. Applied generation by generation after both trees are
// built; re-verified by brute force on a sampled generation.
void apply_contact_marks(const FamilyTree& invasive, FamilyTree& noninvasive) {
  std::unordered_set<uint32_t> killer_sites;
  const uint32_t gens = noninvasive.generations();
  for (uint32_t g = 0; g < gens; ++g) {
    killer_sites.clear();
    if (g < invasive.generations()) {
      for (uint32_t i = invasive.gen_begin(g); i < invasive.gen_end[g]; ++i)
        killer_sites.insert(invasive.nodes[i].site);
    }
    for (uint32_t i = noninvasive.gen_begin(g); i < noninvasive.gen_end[g]; ++i) {
      noninvasive.nodes[i].mark =
          killer_sites.count(noninvasive.nodes[i].site) ? kDagger : kAlive;
    }
  }
  // Locality self-check on ~1% of generations.
  for (uint32_t g = 0; g < gens; g += 101) {
    for (uint32_t i = noninvasive.gen_begin(g); i < noninvasive.gen_end[g]; ++i) {
      bool contact = false;
      if (g < invasive.generations()) {
        for (uint32_t j = invasive.gen_begin(g); j < invasive.gen_end[g] && !contact; ++j)
          contact = invasive.nodes[j].site == noninvasive.nodes[i].site;
      }
      if (contact != (noninvasive.nodes[i].mark == kDagger))
        throw std::logic_error("competing: contact marks disagree with the kill rule");
    }
  }
}

}  // namespace

PairRun run_competing(const CompetingParams& params, uint64_t replica_seed,
                      const std::shared_ptr<SiteTable>& sites) {
  if (params.horizon == 0) throw std::invalid_argument("run_competing: horizon must be >= 1");
  params.group.check_element(params.start_invasive);
  if (params.start_invasive == params.group.identity())
    throw std::invalid_argument("run_competing: processes must start on distinct sites");

  PairRun run;
  run.invasive = run_brw(invasive_params(params), derive_key(replica_seed, rng_tag::invasive),
                         sites);
  run.noninvasive = run_brw(noninvasive_params(params),
                            derive_key(replica_seed, rng_tag::noninvasive), sites);
  run.capped = run.invasive.capped || run.noninvasive.capped;
  apply_contact_marks(run.invasive, run.noninvasive);

  std::vector<uint8_t> marks(run.noninvasive.nodes.size());
  for (uint32_t i = 0; i < marks.size(); ++i) marks[i] = run.noninvasive.nodes[i].mark;
  run.root_cluster = root_cluster_flags(run.noninvasive, marks);
  run.noninv_alive_per_gen.assign(run.noninvasive.generations(), 0);
  for (uint32_t i = 0; i < run.root_cluster.size(); ++i)
    if (run.root_cluster[i]) ++run.noninv_alive_per_gen[run.noninvasive.generation_of(i)];
  return run;
}

CoexistenceResult estimate_coexistence(const CompetingParams& params,
                                       const std::vector<uint32_t>& horizons,
                                       uint64_t replicas, uint64_t master_seed,
                                       uint32_t workers) {
  if (replicas == 0) throw std::invalid_argument("estimate_coexistence: zero replicas");
  if (horizons.empty()) throw std::invalid_argument("estimate_coexistence: no horizons");
  std::vector<uint32_t> ts = horizons;
  std::sort(ts.begin(), ts.end());
  CompetingParams p = params;
  p.horizon = ts.back();

  const size_t width = ts.size();
  std::vector<uint8_t> inv(replicas * width, 0), non(replicas * width, 0);
  std::vector<uint8_t> capped(replicas, 0), rootd(replicas, 0);

  std::atomic<uint64_t> cursor{0};
  auto work = [&] {
    for (;;) {
      const uint64_t r = cursor.fetch_add(1);
      if (r >= replicas) return;
      auto sites = std::make_shared<SiteTable>(p.group);
      const PairRun run = run_competing(p, replica_key(master_seed, 0, r), sites);
      capped[r] = run.capped ? 1 : 0;
      rootd[r] = run.noninvasive.nodes[0].mark == kDagger ? 1 : 0;
      for (size_t j = 0; j < width; ++j) {
        inv[r * width + j] = run.invasive_alive_at(ts[j]) ? 1 : 0;
        non[r * width + j] = run.noninvasive_alive_at(ts[j]) ? 1 : 0;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (uint32_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  CoexistenceResult out;
  out.replicas = replicas;
  for (uint64_t r = 0; r < replicas; ++r) {
    out.capped_replicas += capped[r];
    out.noninv_root_dagger += rootd[r];
  }
  for (size_t j = 0; j < width; ++j) {
    CoexistenceCell cell;
    cell.horizon = ts[j];
    cell.replicas = replicas;
    for (uint64_t r = 0; r < replicas; ++r) {
      const bool i_alive = inv[r * width + j];
      const bool n_alive = non[r * width + j];
      cell.inv_alive += i_alive;
      cell.noninv_alive += n_alive;
      cell.joint += i_alive && n_alive;
    }
    const double n = static_cast<double>(replicas);
    cell.inv_alive_frac = static_cast<double>(cell.inv_alive) / n;
    cell.noninv_alive_frac = static_cast<double>(cell.noninv_alive) / n;
    cell.joint_frac = static_cast<double>(cell.joint) / n;
    cell.joint_ci = wilson_interval(cell.joint, replicas);
    out.cells.push_back(cell);
  }
  return out;
}

AdaptedRun run_adapted(const AdaptedParams& params, uint64_t replica_seed,
                       const std::shared_ptr<SiteTable>& sites) {
  const CompetingParams& base = params.base;
  if (base.horizon == 0) throw std::invalid_argument("run_adapted: horizon must be >= 1");
  if (params.N == 0) throw std::invalid_argument("run_adapted: N must be >= 1");
  if (!(params.gamma > 0.0) || params.gamma > 1.0)
    throw std::invalid_argument("run_adapted: gamma must be in (0, 1]");

  AdaptedRun run;
  BrwParams non = noninvasive_params(base);
  non.gamma = params.gamma;
  run.noninvasive = run_brw(non, derive_key(replica_seed, rng_tag::noninvasive), sites);
  run.capped = run.noninvasive.capped;

  // Visit multiplicities of the attenuated run; seeds are the window sites
  // whose multiplicity reaches N.
  std::unordered_map<uint32_t, uint64_t> mult;
  for (const auto& node : run.noninvasive.nodes) ++mult[node.site];
  const GroupSpec& g = base.group;
  const GroupElement origin = g.identity();
  for (const auto& [site, count] : mult) {
    if (count < params.N) continue;
    if (g.word_distance(origin, sites->element(site)) > params.window_radius) continue;
    run.seeded_sites.push_back(site);
  }
  std::sort(run.seeded_sites.begin(), run.seeded_sites.end());
  if (run.seeded_sites.size() > params.max_seeded_copies) {
    run.seed_cap_hit = true;
    run.seeded_sites.resize(params.max_seeded_copies);
  }

  // Sites ever visited by any invasive copy are deadly for the noninvasive
  // walk at every time.
  std::unordered_set<uint32_t> deadly;
  const uint64_t copies_key = derive_key(replica_seed, rng_tag::seeded_copy);
  for (uint32_t seed_site : run.seeded_sites) {
    BrwParams inv = invasive_params(base);
    inv.start = sites->element(seed_site);
    // Keyed by the canonical element, not the table id: a copy's trajectory
    // is then the same in every run that seeds the same site, which keeps
    // runs with different N or gamma pathwise comparable.
    const uint64_t copy_key =
        derive_key(copies_key, mix64(GroupElementHash{}(inv.start)));
    const bool ok = run_brw_front(inv, copy_key, *sites,
                                  [&deadly](uint32_t, uint32_t site) { deadly.insert(site); });
    if (!ok) run.capped = true;
  }

  std::vector<uint8_t> marks(run.noninvasive.nodes.size());
  for (uint32_t i = 0; i < marks.size(); ++i) {
    marks[i] = deadly.count(run.noninvasive.nodes[i].site) ? kDagger : kAlive;
    run.noninvasive.nodes[i].mark = marks[i];
    if (marks[i] == kDagger) ++run.dagger_nodes;
  }
  run.root_dagger = !marks.empty() && marks[0] == kDagger;
  const std::vector<uint8_t> cluster = root_cluster_flags(run.noninvasive, marks);
  for (uint32_t i = 0; i < cluster.size(); ++i) {
    if (cluster[i] && run.noninvasive.generation_of(i) == base.horizon) {
      run.noninv_alive_at_horizon = true;
      break;
    }
  }
  return run;
}

DaggerMarginal estimate_dagger_marginal(const std::vector<AdaptedRun>& runs) {
  if (runs.empty()) throw std::invalid_argument("estimate_dagger_marginal: zero replicas");
  DaggerMarginal m;
  m.replicas = runs.size();
  m.low_sample = runs.size() < 100;
  uint64_t dagger = 0;
  for (const AdaptedRun& r : runs) dagger += r.root_dagger ? 1 : 0;
  m.dagger_frac = static_cast<double>(dagger) / static_cast<double>(runs.size());
  m.ci = wilson_interval(dagger, runs.size());
  return m;
}

}  // namespace brw
