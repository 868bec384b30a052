// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include "brwlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "brwlab/competing.hpp"
#include "brwlab/percolation.hpp"
#include "brwlab/rng.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/walk_dp.hpp"
#include "json.hpp"

namespace brw {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------- config --

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field, message);
}

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& prefix, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) fail(join_path(prefix, key), "required field is missing");
  return *v;
}

void reject_unknown_keys(const json& obj, const std::string& prefix,
                         const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(join_path(prefix, key), "unknown field");
  }
}

uint64_t as_u64(const json& v, const std::string& field) {
  if (!v.is_number_unsigned()) fail(field, "expected a non-negative integer");
  return v.get<uint64_t>();
}

uint32_t as_u32(const json& v, const std::string& field) {
  const uint64_t x = as_u64(v, field);
  if (x > 0xffffffffu) fail(field, "value does not fit in 32 bits");
  return static_cast<uint32_t>(x);
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) fail(field, "expected a boolean");
  return v.get<bool>();
}

std::vector<double> as_double_list(const json& v, const std::string& field) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
    return out;
  }
  if (!v.is_array() || v.empty()) fail(field, "expected a number or a non-empty array");
  for (const auto& x : v) out.push_back(as_double(x, field));
  return out;
}

std::vector<uint32_t> as_u32_list(const json& v, const std::string& field) {
  std::vector<uint32_t> out;
  if (v.is_number()) {
    out.push_back(as_u32(v, field));
    return out;
  }
  if (!v.is_array() || v.empty()) fail(field, "expected an integer or a non-empty array");
  for (const auto& x : v) out.push_back(as_u32(x, field));
  return out;
}

GroupSpec parse_group(const json& obj, const std::string& prefix) {
  if (!obj.is_object()) fail(prefix, "expected an object");
  const std::string type = as_string(require(obj, prefix, "type"), join_path(prefix, "type"));
  try {
    if (type == "lattice") {
      reject_unknown_keys(obj, prefix, {"type", "dim"});
      return GroupSpec::integer_lattice(as_u32(require(obj, prefix, "dim"), join_path(prefix, "dim")));
    }
    if (type == "free") {
      reject_unknown_keys(obj, prefix, {"type", "rank"});
      return GroupSpec::free_group(as_u32(require(obj, prefix, "rank"), join_path(prefix, "rank")));
    }
    if (type == "free_product_c2") {
      reject_unknown_keys(obj, prefix, {"type", "factors"});
      return GroupSpec::free_product_c2(
          as_u32(require(obj, prefix, "factors"), join_path(prefix, "factors")));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(prefix, e.what());
  }
  fail(join_path(prefix, "type"), "unknown group type (lattice | free | free_product_c2)");
}

StepDistribution parse_step(const json& obj, const GroupSpec& g, const std::string& prefix) {
  if (!obj.is_object()) fail(prefix, "expected an object");
  reject_unknown_keys(obj, prefix, {"laziness", "weights"});
  const double laziness =
      as_double(require(obj, prefix, "laziness"), join_path(prefix, "laziness"));
  try {
    if (const json* w = find(obj, "weights")) {
      std::vector<double> weights;
      if (!w->is_array()) fail(join_path(prefix, "weights"), "expected an array");
      for (const auto& x : *w) weights.push_back(as_double(x, join_path(prefix, "weights")));
      return StepDistribution::from_weights(g, std::move(weights), laziness);
    }
    return StepDistribution::uniform_lazy(g, laziness);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(prefix, e.what());
  }
}

// Configs accept any normalized offspring law; the stricter validate()
// constructor (positive mu_1) stays available to callers that rely on it.
OffspringDistribution parse_offspring(const json& obj, const std::string& prefix) {
  if (!obj.is_object()) fail(prefix, "expected an object");
  reject_unknown_keys(obj, prefix, {"probs"});
  const json& probs_json = require(obj, prefix, "probs");
  if (!probs_json.is_array()) fail(join_path(prefix, "probs"), "expected an array");
  std::vector<double> probs;
  for (const auto& x : probs_json) probs.push_back(as_double(x, join_path(prefix, "probs")));
  try {
    return OffspringDistribution::from_probs(std::move(probs));
  } catch (const std::exception& e) {
    fail(join_path(prefix, "probs"), e.what());
  }
}

GroupElement parse_element(const json& obj, const GroupSpec& g, const std::string& prefix) {
  if (!obj.is_object()) fail(prefix, "expected an object");
  reject_unknown_keys(obj, prefix, {"word", "coords"});
  const json* word = find(obj, "word");
  const json* coords = find(obj, "coords");
  if (!!word == !!coords) fail(prefix, "expected exactly one of: word, coords");
  try {
    if (coords) {
      if (g.kind() != GroupKind::integer_lattice)
        fail(join_path(prefix, "coords"), "coords only apply to lattice groups");
      GroupElement e;
      if (!coords->is_array()) fail(join_path(prefix, "coords"), "expected an array");
      for (const auto& x : *coords) {
        if (!x.is_number_integer()) fail(join_path(prefix, "coords"), "expected integers");
        e.coords.push_back(x.get<int32_t>());
      }
      g.check_element(e);
      return e;
    }
    if (g.kind() == GroupKind::integer_lattice)
      fail(join_path(prefix, "word"), "word only applies to the tree-like groups");
    GroupElement e = g.identity();
    if (!word->is_array()) fail(join_path(prefix, "word"), "expected an array");
    for (const auto& x : *word) {
      const uint32_t letter = as_u32(x, join_path(prefix, "word"));
      if (letter >= g.generator_count())
        fail(join_path(prefix, "word"), "letter out of range for this group");
      e = g.apply_letter(e, static_cast<uint8_t>(letter));
    }
    return e;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(prefix, e.what());
  }
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "brw") return ExperimentKind::brw;
  if (s == "truncated_sweep") return ExperimentKind::truncated_sweep;
  if (s == "competing") return ExperimentKind::competing;
  if (s == "adapted") return ExperimentKind::adapted;
  if (s == "percolation") return ExperimentKind::percolation;
  if (s == "spectral") return ExperimentKind::spectral;
  if (s == "mtp") return ExperimentKind::mtp;
  fail("kind", "unknown experiment kind: " + s +
                   " (brw | truncated_sweep | competing | adapted | percolation | spectral | mtp)");
}

TruncationMode parse_truncation_mode(const std::string& s, const std::string& field) {
  if (s == "paper_exact") return TruncationMode::paper_exact;
  if (s == "operational") return TruncationMode::operational;
  if (s == "site_resource") return TruncationMode::site_resource;
  fail(field, "unknown truncation mode (paper_exact | operational | site_resource)");
}

// ------------------------------------------------------------ formatting --

std::string fmt_f(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct CsvBuilder {
  std::string text;
  void line(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) text += ',';
      text += cells[i];
    }
    text += '\n';
  }
};

// ----------------------------------------------------------- scheduling --

/// Runs body(replica) for every replica index on `workers` threads. Order of
/// execution is arbitrary; callers must write into per-replica slots.
void for_replicas(uint64_t replicas, uint32_t workers, const std::function<void(uint64_t)>& body) {
  std::atomic<uint64_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const uint64_t r = cursor.fetch_add(1);
      if (r >= replicas || failed.load()) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (uint32_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

// ------------------------------------------------------------ kind runs --

void run_brw_kind(const ExperimentSpec& spec, uint32_t workers, bool trace, RunResult& res) {
  BrwParams params{*spec.group, *spec.step, *spec.offspring,
                   spec.start ? *spec.start : spec.group->identity(),
                   spec.horizon, spec.caps, spec.gamma};
  const uint64_t n = spec.replicas;
  std::vector<uint8_t> alive(n, 0), capped(n, 0);
  std::vector<uint64_t> population(n, 0);
  std::vector<std::vector<std::string>> traces(trace ? n : 0);

  for_replicas(n, workers, [&](uint64_t r) {
    auto sites = std::make_shared<SiteTable>(params.group);
    const FamilyTree tree = run_brw(params, replica_key(spec.seed, 0, r), sites);
    alive[r] = tree.alive_at(spec.horizon) ? 1 : 0;
    capped[r] = tree.capped ? 1 : 0;
    population[r] = tree.alive_at(spec.horizon) ? tree.gen_size(spec.horizon) : 0;
    if (trace) {
      std::vector<uint32_t> gen_sites;
      for (uint32_t g = 0; g < tree.generations(); ++g) {
        gen_sites.clear();
        for (uint32_t i = tree.gen_begin(g); i < tree.gen_end[g]; ++i)
          gen_sites.push_back(tree.nodes[i].site);
        std::sort(gen_sites.begin(), gen_sites.end());
        gen_sites.erase(std::unique(gen_sites.begin(), gen_sites.end()), gen_sites.end());
        traces[r].push_back("{\"replica\":" + std::to_string(r) + ",\"gen\":" +
                            std::to_string(g) + ",\"alive\":" + std::to_string(tree.gen_size(g)) +
                            ",\"sites\":" + std::to_string(gen_sites.size()) + "}");
      }
    }
  });

  uint64_t alive_n = 0, capped_n = 0, pop_sum = 0;
  for (uint64_t r = 0; r < n; ++r) {
    alive_n += alive[r];
    capped_n += capped[r];
    pop_sum += population[r];
  }
  const Interval ci = wilson_interval(alive_n, n);
  CsvBuilder csv;
  csv.line({"horizon", "gamma", "replicas", "alive_fraction", "ci_low", "ci_high",
            "mean_population", "caps_triggered"});
  csv.line({std::to_string(spec.horizon), fmt_f(spec.gamma.value_or(1.0)), std::to_string(n),
            fmt_f(static_cast<double>(alive_n) / static_cast<double>(n)), fmt_f(ci.low),
            fmt_f(ci.high), fmt_f(static_cast<double>(pop_sum) / static_cast<double>(n)),
            std::to_string(capped_n)});
  res.csv_text = csv.text;
  res.caps_triggered = capped_n;
  if (trace)
    for (auto& lines : traces)
      for (auto& l : lines) res.trace_lines.push_back(std::move(l));
}

void run_truncated_kind(const ExperimentSpec& spec, uint32_t workers, RunResult& res) {
  BrwParams params{*spec.group, *spec.step, *spec.offspring, spec.group->identity(),
                   spec.horizon, spec.caps, std::nullopt};
  const SweepResult sweep =
      survival_sweep(params, spec.n_grid, spec.truncation_mode, spec.replicas, spec.seed,
                     spec.survival_epsilon, workers);
  CsvBuilder csv;
  csv.line({"N", "mode", "horizon", "replicas", "alive_fraction", "ci_low", "ci_high",
            "mean_cluster_size", "mrho", "caps_triggered"});
  uint64_t caps = 0;
  for (const SweepCell& cell : sweep.cells) {
    caps = std::max(caps, cell.capped_replicas);
    csv.line({std::to_string(cell.N), to_string(sweep.mode), std::to_string(sweep.horizon),
              std::to_string(cell.replicas), fmt_f(cell.alive_fraction), fmt_f(cell.ci_low),
              fmt_f(cell.ci_high), fmt_f(cell.mean_cluster_size), fmt_f(sweep.m_rho),
              std::to_string(cell.capped_replicas)});
  }
  res.csv_text = csv.text;
  res.caps_triggered = caps;
  json extra;
  extra["coupling_violations"] = sweep.coupling_violations;
  extra["plain_alive_fraction"] = sweep.plain_alive_fraction;
  extra["plain_ci_low"] = sweep.plain_ci.low;
  extra["plain_ci_high"] = sweep.plain_ci.high;
  extra["epsilon"] = sweep.epsilon;
  if (sweep.n_c_bracket_low)
    extra["n_c_bracket_low"] = *sweep.n_c_bracket_low;
  else
    extra["n_c_bracket_low"] = nullptr;
  if (sweep.n_c_estimate)
    extra["n_c_estimate"] = *sweep.n_c_estimate;
  else
    extra["n_c_estimate"] = nullptr;
  res.extra_meta_json = extra.dump();
}

void run_competing_kind(const ExperimentSpec& spec, uint32_t workers, RunResult& res) {
  CompetingParams params{*spec.group,
                         spec.step_invasive ? *spec.step_invasive : *spec.step,
                         *spec.step,
                         spec.offspring_invasive ? *spec.offspring_invasive : *spec.offspring,
                         *spec.offspring,
                         *spec.start,
                         0,
                         spec.caps};
  const CoexistenceResult cx =
      estimate_coexistence(params, spec.horizons, spec.replicas, spec.seed, workers);
  const uint64_t window =
      spec.group->word_distance(spec.group->identity(), params.start_invasive);
  const double dagger_marginal = static_cast<double>(cx.noninv_root_dagger) /
                                 static_cast<double>(cx.replicas);
  CsvBuilder csv;
  csv.line({"mode", "N", "gamma", "horizon", "window", "inv_alive_frac", "noninv_alive_frac",
            "joint_frac", "ci_low", "ci_high", "dagger_marginal", "caps_triggered"});
  for (const CoexistenceCell& cell : cx.cells) {
    csv.line({"pair", "0", "1", std::to_string(cell.horizon), std::to_string(window),
              fmt_f(cell.inv_alive_frac), fmt_f(cell.noninv_alive_frac), fmt_f(cell.joint_frac),
              fmt_f(cell.joint_ci.low), fmt_f(cell.joint_ci.high), fmt_f(dagger_marginal),
              std::to_string(cx.capped_replicas)});
  }
  res.csv_text = csv.text;
  res.caps_triggered = cx.capped_replicas;
}

void run_adapted_kind(const ExperimentSpec& spec, uint32_t workers, RunResult& res) {
  CompetingParams base{*spec.group,
                       spec.step_invasive ? *spec.step_invasive : *spec.step,
                       *spec.step,
                       spec.offspring_invasive ? *spec.offspring_invasive : *spec.offspring,
                       *spec.offspring,
                       spec.group->identity(),
                       spec.horizon,
                       spec.caps};
  CsvBuilder csv;
  csv.line({"mode", "N", "gamma", "horizon", "window", "inv_alive_frac", "noninv_alive_frac",
            "joint_frac", "ci_low", "ci_high", "dagger_marginal", "caps_triggered"});
  uint64_t total_caps = 0;
  const uint64_t n = spec.replicas;
  for (size_t cell = 0; cell < spec.adapted_n.size(); ++cell) {
    AdaptedParams params{base, spec.adapted_n[cell], spec.adapted_gamma, spec.window_radius,
                         spec.max_seeded_copies};
    std::vector<uint8_t> seeded(n, 0), alive(n, 0), rootd(n, 0), capped(n, 0);
    for_replicas(n, workers, [&](uint64_t r) {
      auto sites = std::make_shared<SiteTable>(base.group);
      const AdaptedRun run = run_adapted(params, replica_key(spec.seed, cell, r), sites);
      seeded[r] = run.seeded_sites.empty() ? 0 : 1;
      alive[r] = run.noninv_alive_at_horizon ? 1 : 0;
      rootd[r] = run.root_dagger ? 1 : 0;
      capped[r] = (run.capped || run.seed_cap_hit) ? 1 : 0;
    });
    uint64_t seeded_n = 0, alive_n = 0, joint_n = 0, rootd_n = 0, capped_n = 0;
    for (uint64_t r = 0; r < n; ++r) {
      seeded_n += seeded[r];
      alive_n += alive[r];
      joint_n += seeded[r] && alive[r];
      rootd_n += rootd[r];
      capped_n += capped[r];
    }
    total_caps += capped_n;
    const Interval ci = wilson_interval(joint_n, n);
    csv.line({"adapted", std::to_string(params.N), fmt_f(params.gamma),
              std::to_string(spec.horizon), std::to_string(spec.window_radius),
              fmt_f(static_cast<double>(seeded_n) / static_cast<double>(n)),
              fmt_f(static_cast<double>(alive_n) / static_cast<double>(n)),
              fmt_f(static_cast<double>(joint_n) / static_cast<double>(n)), fmt_f(ci.low),
              fmt_f(ci.high), fmt_f(static_cast<double>(rootd_n) / static_cast<double>(n)),
              std::to_string(capped_n)});
  }
  res.csv_text = csv.text;
  res.caps_triggered = total_caps;
}

void run_percolation_kind(const ExperimentSpec& spec, uint32_t workers, RunResult& res) {
  CsvBuilder csv;
  csv.line({"p", "depth", "alive_frac", "ci_low", "ci_high", "oracle_value", "caps_triggered"});
  uint64_t total_caps = 0;
  const uint64_t n = spec.replicas;
  const OffspringDistribution& mu = *spec.offspring;
  size_t cell = 0;
  for (double p : spec.p_values) {
    for (uint32_t depth : spec.depths) {
      std::vector<uint8_t> alive(n, 0), capped(n, 0);
      const size_t this_cell = cell++;
      for_replicas(n, workers, [&](uint64_t r) {
        Rng rng(replica_key(spec.seed, this_cell, r));
        const MarkedTree tree = sample_gw(mu, depth, rng);
        if (tree.nodes.size() > spec.caps.max_nodes) capped[r] = 1;
        alive[r] = percolation_depth_reached(tree, p, rng) >= static_cast<int64_t>(depth) ? 1 : 0;
      });
      uint64_t alive_n = 0, capped_n = 0;
      for (uint64_t r = 0; r < n; ++r) {
        alive_n += alive[r];
        capped_n += capped[r];
      }
      total_caps += capped_n;
      const Interval ci = wilson_interval(alive_n, n);
      const double oracle = p * depth_survival(mu, p, depth);
      csv.line({fmt_f(p), std::to_string(depth),
                fmt_f(static_cast<double>(alive_n) / static_cast<double>(n)), fmt_f(ci.low),
                fmt_f(ci.high), fmt_f(oracle), std::to_string(capped_n)});
    }
  }
  res.csv_text = csv.text;
  res.caps_triggered = total_caps;
}

void run_spectral_kind(const ExperimentSpec& spec, RunResult& res) {
  const GroupSpec& g = *spec.group;
  const StepDistribution& q = *spec.step;
  const SpectralEstimate series = spectral_radius_series(g, q, spec.n_max);
  const bool closed = has_closed_form_rho(g, q);
  const double closed_value = closed ? spectral_radius_closed(g, q) : 0.0;
  CsvBuilder csv;
  csv.line({"group", "n_max", "estimate", "bracket_low", "bracket_high", "converged",
            "closed_form", "closed_form_value", "caps_triggered"});
  csv.line({g.name(), std::to_string(spec.n_max), fmt_f(series.value), fmt_f(series.bracket_low),
            fmt_f(series.bracket_high), series.converged ? "1" : "0", closed ? "1" : "0",
            fmt_f(closed_value), "0"});
  res.csv_text = csv.text;
}

void run_mtp_kind(const ExperimentSpec& spec, RunResult& res) {
  CsvBuilder csv;
  csv.line({"functional", "sampler", "samples", "lhs", "rhs", "diff", "diff_se", "z",
            "caps_triggered"});
  const auto& fns = shipped_pair_functionals();
  for (size_t i = 0; i < fns.size(); ++i) {
    std::vector<RootSampler> samplers{RootSampler::unimodular};
    if (spec.negative_control) samplers.push_back(RootSampler::plain_gw);
    for (size_t s = 0; s < samplers.size(); ++s) {
      const MassTransportCheck c =
          mass_transport_check(*spec.offspring, fns[i], spec.samples, spec.sample_depth,
                               replica_key(spec.seed, i, s), samplers[s]);
      csv.line({fns[i].name, samplers[s] == RootSampler::unimodular ? "unimodular" : "plain_gw",
                std::to_string(c.samples), fmt_f(c.lhs), fmt_f(c.rhs), fmt_f(c.diff),
                fmt_f(c.diff_se), fmt_f(c.z), "0"});
    }
  }
  res.csv_text = csv.text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::brw: return "brw";
    case ExperimentKind::truncated_sweep: return "truncated_sweep";
    case ExperimentKind::competing: return "competing";
    case ExperimentKind::adapted: return "adapted";
    case ExperimentKind::percolation: return "percolation";
    case ExperimentKind::spectral: return "spectral";
    case ExperimentKind::mtp: return "mtp";
  }
  return "unknown";
}

ExperimentSpec parse_experiment(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("config", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("config", "top level must be an object");

  ExperimentSpec spec;
  spec.kind = parse_kind(as_string(require(root, "", "kind"), "kind"));
  const std::string kind_name = to_string(spec.kind);
  const std::string section_name =
      spec.kind == ExperimentKind::truncated_sweep ? "truncation" : kind_name;

  // Per-kind whitelists keep misplaced fields loud instead of ignored.
  std::vector<std::string> allowed{"kind", "id", "seed", "workers", "out"};
  const bool uses_group = spec.kind != ExperimentKind::percolation && spec.kind != ExperimentKind::mtp;
  const bool uses_offspring = spec.kind != ExperimentKind::spectral;
  const bool uses_replicas =
      spec.kind != ExperimentKind::spectral && spec.kind != ExperimentKind::mtp;
  if (uses_group) allowed.insert(allowed.end(), {"group", "step"});
  if (uses_offspring) allowed.push_back("offspring");
  if (uses_replicas) allowed.insert(allowed.end(), {"replicas", "caps"});
  if (spec.kind == ExperimentKind::brw)
    allowed.insert(allowed.end(), {"start", "horizon", "gamma"});
  if (spec.kind == ExperimentKind::truncated_sweep || spec.kind == ExperimentKind::adapted)
    allowed.push_back("horizon");
  if (spec.kind != ExperimentKind::brw) allowed.push_back(section_name);
  reject_unknown_keys(root, "", allowed);

  if (const json* v = find(root, "seed"))
    spec.seed = as_u64(*v, "seed");
  else
    fail("seed", "seed is mandatory (runs never default to wall-clock time)");

  spec.id = kind_name;
  if (const json* v = find(root, "id")) {
    spec.id = as_string(*v, "id");
    if (spec.id.empty() || spec.id.size() > 64 ||
        spec.id.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos)
      fail("id", "id must be 1-64 characters from [A-Za-z0-9_-]");
  }
  if (const json* v = find(root, "workers")) {
    const uint32_t w = as_u32(*v, "workers");
    if (w == 0) fail("workers", "worker count must be >= 1");
    spec.workers = w;
  }
  if (const json* v = find(root, "out")) spec.out_dir = as_string(*v, "out");

  if (uses_group) {
    spec.group = parse_group(require(root, "", "group"), "group");
    spec.step = parse_step(require(root, "", "step"), *spec.group, "step");
  }
  if (uses_offspring) {
    spec.offspring = parse_offspring(require(root, "", "offspring"), "offspring");
  }
  if (uses_replicas) {
    spec.replicas = as_u64(require(root, "", "replicas"), "replicas");
    if (spec.replicas == 0) fail("replicas", "replicas must be >= 1");
    if (const json* v = find(root, "caps")) {
      if (!v->is_object()) fail("caps", "expected an object");
      reject_unknown_keys(*v, "caps", {"max_nodes"});
      if (const json* m = find(*v, "max_nodes")) {
        spec.caps.max_nodes = as_u64(*m, "caps.max_nodes");
        if (spec.caps.max_nodes == 0) fail("caps.max_nodes", "must be >= 1");
      }
    }
  }

  auto need_horizon = [&] {
    spec.horizon = as_u32(require(root, "", "horizon"), "horizon");
    if (spec.horizon == 0) fail("horizon", "horizon must be >= 1");
  };

  switch (spec.kind) {
    case ExperimentKind::brw: {
      need_horizon();
      if (const json* v = find(root, "start"))
        spec.start = parse_element(*v, *spec.group, "start");
      if (const json* v = find(root, "gamma")) {
        const double g = as_double(*v, "gamma");
        if (!(g > 0.0) || g > 1.0) fail("gamma", "gamma must lie in (0, 1]");
        spec.gamma = g;
      }
      break;
    }
    case ExperimentKind::truncated_sweep: {
      need_horizon();
      const json& sec = require(root, "", "truncation");
      if (!sec.is_object()) fail("truncation", "expected an object");
      reject_unknown_keys(sec, "truncation", {"mode", "grid", "epsilon"});
      spec.n_grid = as_u32_list(require(sec, "truncation", "grid"), "truncation.grid");
      for (uint32_t n : spec.n_grid)
        if (n == 0) fail("truncation.grid", "every N must be >= 1");
      if (const json* v = find(sec, "mode"))
        spec.truncation_mode =
            parse_truncation_mode(as_string(*v, "truncation.mode"), "truncation.mode");
      if (const json* v = find(sec, "epsilon")) {
        spec.survival_epsilon = as_double(*v, "truncation.epsilon");
        if (!(spec.survival_epsilon > 0.0) || spec.survival_epsilon >= 1.0)
          fail("truncation.epsilon", "epsilon must lie in (0, 1)");
      }
      break;
    }
    case ExperimentKind::competing: {
      const json& sec = require(root, "", "competing");
      if (!sec.is_object()) fail("competing", "expected an object");
      reject_unknown_keys(sec, "competing",
                          {"start", "horizons", "step_invasive", "offspring_invasive"});
      spec.start = parse_element(require(sec, "competing", "start"), *spec.group,
                                 "competing.start");
      if (*spec.start == spec.group->identity())
        fail("competing.start", "the invasive start must differ from the origin");
      spec.horizons = as_u32_list(require(sec, "competing", "horizons"), "competing.horizons");
      for (uint32_t t : spec.horizons)
        if (t == 0) fail("competing.horizons", "every horizon must be >= 1");
      if (const json* v = find(sec, "step_invasive"))
        spec.step_invasive = parse_step(*v, *spec.group, "competing.step_invasive");
      if (const json* v = find(sec, "offspring_invasive"))
        spec.offspring_invasive = parse_offspring(*v, "competing.offspring_invasive");
      break;
    }
    case ExperimentKind::adapted: {
      need_horizon();
      const json& sec = require(root, "", "adapted");
      if (!sec.is_object()) fail("adapted", "expected an object");
      reject_unknown_keys(sec, "adapted",
                          {"N", "gamma", "window_radius", "max_seeded_copies", "step_invasive",
                           "offspring_invasive"});
      spec.adapted_n = as_u32_list(require(sec, "adapted", "N"), "adapted.N");
      for (uint32_t n : spec.adapted_n)
        if (n == 0) fail("adapted.N", "every N must be >= 1");
      if (const json* v = find(sec, "gamma")) {
        spec.adapted_gamma = as_double(*v, "adapted.gamma");
        if (!(spec.adapted_gamma > 0.0) || spec.adapted_gamma > 1.0)
          fail("adapted.gamma", "gamma must lie in (0, 1]");
      }
      spec.window_radius = as_u32(require(sec, "adapted", "window_radius"),
                                  "adapted.window_radius");
      if (const json* v = find(sec, "max_seeded_copies")) {
        spec.max_seeded_copies = as_u64(*v, "adapted.max_seeded_copies");
        if (spec.max_seeded_copies == 0) fail("adapted.max_seeded_copies", "must be >= 1");
      }
      if (const json* v = find(sec, "step_invasive"))
        spec.step_invasive = parse_step(*v, *spec.group, "adapted.step_invasive");
      if (const json* v = find(sec, "offspring_invasive"))
        spec.offspring_invasive = parse_offspring(*v, "adapted.offspring_invasive");
      break;
    }
    case ExperimentKind::percolation: {
      const json& sec = require(root, "", "percolation");
      if (!sec.is_object()) fail("percolation", "expected an object");
      reject_unknown_keys(sec, "percolation", {"p", "depths"});
      spec.p_values = as_double_list(require(sec, "percolation", "p"), "percolation.p");
      for (double p : spec.p_values)
        if (!(p > 0.0) || p > 1.0) fail("percolation.p", "every p must lie in (0, 1]");
      spec.depths = as_u32_list(require(sec, "percolation", "depths"), "percolation.depths");
      for (uint32_t d : spec.depths) {
        if (d == 0) fail("percolation.depths", "every depth must be >= 1");
        // Expected tree size must respect the node cap; individual trees may
        // still exceed it and are then flagged as capped.
        const double expected = std::pow(std::max(1.0, spec.offspring->mean()), d);
        if (expected > static_cast<double>(spec.caps.max_nodes))
          fail("percolation.depths", "expected tree size exceeds caps.max_nodes at depth " +
                                         std::to_string(d));
      }
      break;
    }
    case ExperimentKind::spectral: {
      const json& sec = require(root, "", "spectral");
      if (!sec.is_object()) fail("spectral", "expected an object");
      reject_unknown_keys(sec, "spectral", {"n_max"});
      spec.n_max = 200;
      if (const json* v = find(sec, "n_max")) spec.n_max = as_u32(*v, "spectral.n_max");
      if (spec.n_max < 8) fail("spectral.n_max", "n_max must be >= 8");
      break;
    }
    case ExperimentKind::mtp: {
      const json& sec = require(root, "", "mtp");
      if (!sec.is_object()) fail("mtp", "expected an object");
      reject_unknown_keys(sec, "mtp", {"samples", "depth", "negative_control"});
      spec.samples = as_u64(require(sec, "mtp", "samples"), "mtp.samples");
      if (spec.samples == 0) fail("mtp.samples", "samples must be >= 1");
      spec.sample_depth = 3;
      if (const json* v = find(sec, "depth")) spec.sample_depth = as_u32(*v, "mtp.depth");
      uint32_t max_radius = 0;
      for (const auto& f : shipped_pair_functionals()) max_radius = std::max(max_radius, f.radius);
      if (spec.sample_depth < max_radius + 1)
        fail("mtp.depth", "depth must exceed the largest functional radius (" +
                              std::to_string(max_radius) + ")");
      if (const json* v = find(sec, "negative_control"))
        spec.negative_control = as_bool(*v, "mtp.negative_control");
      break;
    }
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& config_path) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) fail("config", "cannot read config file: " + config_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

RunResult run_experiment(const ExperimentSpec& spec, uint32_t workers, bool trace) {
  const auto t0 = std::chrono::steady_clock::now();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  RunResult res;
  res.id = spec.id;
  res.kind = spec.kind;
  res.seed = spec.seed;
  res.extra_meta_json = "{}";
  switch (spec.kind) {
    case ExperimentKind::brw: run_brw_kind(spec, workers, trace, res); break;
    case ExperimentKind::truncated_sweep: run_truncated_kind(spec, workers, res); break;
    case ExperimentKind::competing: run_competing_kind(spec, workers, res); break;
    case ExperimentKind::adapted: run_adapted_kind(spec, workers, res); break;
    case ExperimentKind::percolation: run_percolation_kind(spec, workers, res); break;
    case ExperimentKind::spectral: run_spectral_kind(spec, res); break;
    case ExperimentKind::mtp: run_mtp_kind(spec, res); break;
  }
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

RunFiles write_run_result(const RunResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunFiles files;
  files.csv = out_dir / (result.id + ".csv");
  files.meta = out_dir / (result.id + ".meta.json");
  {
    std::ofstream out(files.csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + files.csv.string());
    out << result.csv_text;
  }
  {
    json meta;
    meta["id"] = result.id;
    meta["kind"] = to_string(result.kind);
    meta["seed"] = result.seed;
    meta["schema_version"] = result.schema_version;
    meta["caps_triggered"] = result.caps_triggered;
    meta["wall_ms"] = result.wall_ms;  // the one field excluded from determinism
    meta["extra"] = result.extra_meta_json.empty() ? json::object()
                                                   : json::parse(result.extra_meta_json);
    std::ofstream out(files.meta, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + files.meta.string());
    out << meta.dump(2) << '\n';
  }
  if (!result.trace_lines.empty()) {
    files.trace = out_dir / (result.id + ".trace.ndjson");
    std::ofstream out(files.trace, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + files.trace.string());
    for (const auto& line : result.trace_lines) out << line << '\n';
  }
  return files;
}

std::string plot_data_from_csv(const std::string& csv_text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : csv_text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }
  if (lines.empty()) fail("csv", "empty input, expected at least a header line");

  const std::string& header = lines[0];
  std::string out = "parameter,value,estimate,ci_low,ci_high\n";
  enum class Schema { truncated, competing, percolation, brw_single, spectral, mtp };
  Schema schema;
  if (header ==
      "N,mode,horizon,replicas,alive_fraction,ci_low,ci_high,mean_cluster_size,mrho,caps_triggered")
    schema = Schema::truncated;
  else if (header ==
           "mode,N,gamma,horizon,window,inv_alive_frac,noninv_alive_frac,joint_frac,ci_low,ci_"
           "high,dagger_marginal,caps_triggered")
    schema = Schema::competing;
  else if (header == "p,depth,alive_frac,ci_low,ci_high,oracle_value,caps_triggered")
    schema = Schema::percolation;
  else if (header ==
           "horizon,gamma,replicas,alive_fraction,ci_low,ci_high,mean_population,caps_triggered")
    schema = Schema::brw_single;
  else if (header ==
           "group,n_max,estimate,bracket_low,bracket_high,converged,closed_form,closed_form_"
           "value,caps_triggered")
    schema = Schema::spectral;
  else if (header == "functional,sampler,samples,lhs,rhs,diff,diff_se,z,caps_triggered")
    schema = Schema::mtp;
  else
    fail("csv", "unrecognized result header: " + header);

  const size_t expected_cols = split_csv_line(header).size();
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> c = split_csv_line(lines[i]);
    if (c.size() != expected_cols)
      fail("csv", "malformed row " + std::to_string(i) + ": expected " +
                      std::to_string(expected_cols) + " columns");
    switch (schema) {
      case Schema::truncated:
        out += "N," + c[0] + "," + c[4] + "," + c[5] + "," + c[6] + "\n";
        break;
      case Schema::competing:
        if (c[0] == "adapted")
          out += "N," + c[1] + "," + c[7] + "," + c[8] + "," + c[9] + "\n";
        else
          out += "horizon," + c[3] + "," + c[7] + "," + c[8] + "," + c[9] + "\n";
        break;
      case Schema::percolation:
        out += "p," + c[0] + "," + c[2] + "," + c[3] + "," + c[4] + "\n";
        out += "p_oracle," + c[0] + "," + c[5] + "," + c[5] + "," + c[5] + "\n";
        break;
      case Schema::brw_single:
        out += "horizon," + c[0] + "," + c[3] + "," + c[4] + "," + c[5] + "\n";
        break;
      case Schema::spectral:
        out += "n_max," + c[1] + "," + c[2] + "," + c[3] + "," + c[4] + "\n";
        break;
      case Schema::mtp: {
        double diff = 0.0, se = 0.0;
        try {
          diff = std::stod(c[5]);
          se = std::stod(c[6]);
        } catch (const std::exception&) {
          fail("csv", "malformed number in row " + std::to_string(i));
        }
        out += "mtp_diff," + std::to_string(i - 1) + "," + fmt_f(diff) + "," +
               fmt_f(diff - 1.96 * se) + "," + fmt_f(diff + 1.96 * se) + "\n";
        break;
      }
    }
  }
  return out;
}

}  // namespace brw
