// SPDX-FileCopyrightText: 2026 brwlab authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "brwlab/experiment.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void print_error(const std::string& kind, const std::string& field, const std::string& message) {
  nlohmann::json err;
  err["error"] = kind;
  if (!field.empty()) err["field"] = field;
  err["message"] = message;
  std::cerr << err.dump() << '\n';
}

/// Worker-count precedence: --workers flag, then BRWLAB_WORKERS, then the
/// config file, then hardware concurrency (inside run_experiment).
uint32_t resolve_workers(bool flag_set, uint32_t flag_value, const brw::ExperimentSpec& spec) {
  if (flag_set) return flag_value;
  if (const char* env = std::getenv("BRWLAB_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (!end || *end != '\0' || v == 0 || v > 4096)
      throw brw::ConfigError("BRWLAB_WORKERS", "expected an integer in [1, 4096], got: " +
                                                   std::string(env));
    return static_cast<uint32_t>(v);
  }
  if (spec.workers) return *spec.workers;
  return 0;
}

int cmd_run(const std::string& config_path, bool workers_set, uint32_t workers_flag,
            const std::string& out_flag, bool trace) {
  brw::ExperimentSpec spec;
  uint32_t workers = 0;
  try {
    spec = brw::load_experiment(config_path);
    workers = resolve_workers(workers_set, workers_flag, spec);
  } catch (const brw::ConfigError& e) {
    print_error("config", e.field, e.what());
    return kExitConfig;
  }
  try {
    const brw::RunResult result = brw::run_experiment(spec, workers, trace);
    const std::string out_dir =
        !out_flag.empty() ? out_flag : spec.out_dir ? *spec.out_dir : std::string(".");
    const brw::RunFiles files = brw::write_run_result(result, out_dir);
    std::cout << files.csv.string() << '\n' << files.meta.string() << '\n';
    if (!files.trace.empty()) std::cout << files.trace.string() << '\n';
    if (result.caps_triggered > 0) {
      print_error("runtime", "", "node cap reached in " + std::to_string(result.caps_triggered) +
                                     " replicas; results are flagged as censored");
      return kExitRuntime;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    print_error("runtime", "", e.what());
    return kExitRuntime;
  }
}

int cmd_plotdata(const std::string& csv_path, const std::string& out_path) {
  try {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw brw::ConfigError("csv", "cannot read: " + csv_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string table = brw::plot_data_from_csv(buf.str());
    std::string target = out_path;
    if (target.empty()) {
      target = csv_path;
      const size_t dot = target.rfind(".csv");
      if (dot != std::string::npos && dot == target.size() - 4) target.resize(dot);
      target += ".plot.csv";
    }
    std::ofstream out(target, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + target);
    out << table;
    std::cout << target << '\n';
    return kExitOk;
  } catch (const brw::ConfigError& e) {
    print_error("config", e.field, e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    print_error("runtime", "", e.what());
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for branching random walks on groups"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute an experiment described by a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "path to the experiment config")->required();
  uint32_t workers_flag = 0;
  auto* workers_opt = run->add_option("--workers", workers_flag, "worker thread count");
  std::string out_flag;
  run->add_option("--out", out_flag, "output directory (default: config 'out' or .)");
  bool trace = false;
  run->add_flag("--trace", trace, "write per-generation NDJSON traces where supported");

  auto* plot = app.add_subcommand("plotdata", "convert a result CSV to long plot format");
  std::string csv_path;
  plot->add_option("csv", csv_path, "result CSV produced by 'run'")->required();
  std::string plot_out;
  plot->add_option("-o,--out", plot_out, "output path (default: <input>.plot.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("config", "argv", e.what());
    return kExitConfig;
  }

  if (run->parsed()) {
    if (*workers_opt && workers_flag == 0) {
      print_error("config", "workers", "worker count must be >= 1");
      return kExitConfig;
    }
    return cmd_run(config_path, static_cast<bool>(*workers_opt), workers_flag, out_flag, trace);
  }
  return cmd_plotdata(csv_path, plot_out);
}
