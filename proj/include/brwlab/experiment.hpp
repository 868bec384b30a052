// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/group.hpp"
#include "brwlab/offspring.hpp"
#include "brwlab/truncated.hpp"

namespace brw {

/// Field-level configuration failure. The CLI maps this to exit code 2 and
/// a machine-readable error record on stderr.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_, const std::string& message)
      : std::runtime_error(message), field(std::move(field_)) {}
};

enum class ExperimentKind : uint8_t {
  brw,
  truncated_sweep,
  competing,
  adapted,
  percolation,
  spectral,
  mtp,
};

std::string to_string(ExperimentKind kind);

/// Parsed and validated experiment description. Shared fields sit at the
/// top of the config file; kind-specific knobs live in a nested section
/// named after the kind (see the README for the schema).
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::brw;
  std::string id;                      // output file stem, defaults to the kind name
  uint64_t seed = 0;                   // mandatory: no wall-clock fallback
  std::optional<uint32_t> workers;     // config default; flag and env override
  std::optional<std::string> out_dir;  // config default; flag overrides

  std::optional<GroupSpec> group;
  std::optional<StepDistribution> step;
  std::optional<OffspringDistribution> offspring;
  std::optional<GroupElement> start;  // brw start; competing invasive start
  Caps caps;
  uint32_t horizon = 0;
  uint64_t replicas = 0;
  std::optional<double> gamma;  // brw attenuation

  // truncated_sweep
  std::vector<uint32_t> n_grid;
  TruncationMode truncation_mode = TruncationMode::paper_exact;
  double survival_epsilon = 0.01;

  // competing (invasive side defaults to the shared step/offspring)
  std::vector<uint32_t> horizons;
  std::optional<StepDistribution> step_invasive;
  std::optional<OffspringDistribution> offspring_invasive;

  // adapted
  std::vector<uint32_t> adapted_n;
  double adapted_gamma = 1.0;
  uint32_t window_radius = 0;
  uint64_t max_seeded_copies = 10000;

  // percolation
  std::vector<double> p_values;
  std::vector<uint32_t> depths;

  // spectral
  uint32_t n_max = 0;

  // mtp
  uint64_t samples = 0;
  uint32_t sample_depth = 0;
  bool negative_control = false;
};

/// Parses a JSON experiment config. Throws ConfigError with the offending
/// field path on any violation.
ExperimentSpec parse_experiment(const std::string& json_text);

/// parse_experiment over the contents of `config_path`.
ExperimentSpec load_experiment(const std::filesystem::path& config_path);

struct RunResult {
  std::string id;
  ExperimentKind kind = ExperimentKind::brw;
  uint64_t seed = 0;
  uint32_t schema_version = 1;
  std::string csv_text;                  // deterministic payload
  std::vector<std::string> trace_lines;  // NDJSON (brw kind, opt-in)
  uint64_t caps_triggered = 0;           // replica cap hits; nonzero exit
  double wall_ms = 0.0;                  // excluded from the determinism contract
  std::string extra_meta_json;           // kind-specific summary, "{}" if none
};

/// Runs the experiment on `workers` threads (0 picks the hardware count).
/// The CSV bytes depend only on (spec, trace), never on the worker count.
RunResult run_experiment(const ExperimentSpec& spec, uint32_t workers, bool trace);

struct RunFiles {
  std::filesystem::path csv;
  std::filesystem::path meta;
  std::filesystem::path trace;  // empty when no trace lines were produced
};

/// Writes <id>.csv, <id>.meta.json, and optionally <id>.trace.ndjson under
/// out_dir (created if missing).
RunFiles write_run_result(const RunResult& result, const std::filesystem::path& out_dir);

/// Long-format plot table (parameter,value,estimate,ci_low,ci_high) from a
/// result CSV written by run_experiment. Header-only input gives
/// header-only output; an unrecognized header is a ConfigError.
std::string plot_data_from_csv(const std::string& csv_text);

}  // namespace brw
