/*
 * Copyright 2026 the gcmpsim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcmp/engine.hpp"
#include "gcmp/experiments.hpp"
#include "gcmp/rng.hpp"
#include "gcmp/scenario.hpp"
#include "gcmp/taskgraph.hpp"

namespace {

namespace fs = std::filesystem;

std::string fmt9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

// GCMPSIM_OUT_DIR rebases every relative output path.
fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (p.is_absolute()) return p;
  const char* base = std::getenv("GCMPSIM_OUT_DIR");
  if (base && *base) return fs::path(base) / p;
  return p;
}

void write_text(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << bytes;
}

struct CommonOpts {
  std::string file;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string duration;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_file) {
  if (with_file) {
    cmd->add_option("file", o.file, "scenario file")
        ->required()
        ->check(CLI::ExistingFile);
  }
  cmd->add_option("--out", o.out, "output path (CSV, or directory for "
                                  "reproduce-paper)");
  cmd->add_option("--seed", o.seed, "override the scenario seed");
  cmd->add_option("--duration", o.duration,
                  "override the simulated duration (e.g. 2ms, 500us, or "
                  "integer femtoseconds)");
  cmd->add_option("--jobs", o.jobs, "concurrent simulation jobs")
      ->check(CLI::PositiveNumber);
}

gcmp::Scenario load_with_overrides(const CommonOpts& o) {
  gcmp::Scenario s = gcmp::load_scenario_file(o.file);
  if (o.seed) {
    s.seed = *o.seed;
    if (s.spec.kind != gcmp::GraphKind::Explicit) {
      // Generated node seeds derive from the scenario seed; keep them
      // consistent with what generate() would now produce.
      for (gcmp::TaskNode& nd : s.graph.nodes) {
        nd.seed = gcmp::mix_seed(s.seed, static_cast<std::uint64_t>(nd.id));
      }
    }
  }
  if (!o.duration.empty()) {
    s.duration = gcmp::parse_time_value(o.duration);
  }
  const std::vector<std::string> errs = gcmp::validate_scenario(s);
  if (!errs.empty()) {
    std::string msg = "scenario does not validate:";
    for (const std::string& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return s;
}

void print_metrics(const gcmp::Scenario& s, const gcmp::Metrics& m) {
  std::cout << "scenario '" << s.name << "': " << s.graph.nodes.size()
            << " nodes, " << s.graph.channels.size() << " channels, "
            << (s.mapping.interconnect == gcmp::Interconnect::SharedBus
                    ? "shared bus"
                    : "point-to-point")
            << "\n";
  std::cout << "measured " << fmt9(gcmp::to_seconds(m.measured_duration) * 1e3)
            << " ms: aggregate throughput " << fmt9(m.aggregate_throughput)
            << " tokens/s, energy " << fmt9(m.total_energy)
            << (m.degenerate ? " [degenerate: no sink tokens]" : "") << "\n";
  for (const gcmp::SinkMetrics& sink : m.sinks) {
    std::cout << "  sink " << sink.node << ": " << sink.tokens << " tokens, "
              << fmt9(sink.throughput) << " tokens/s\n";
  }
  for (const gcmp::PeMetrics& pe : m.pes) {
    const double e = pe.edges > 0 ? static_cast<double>(pe.edges) : 1.0;
    std::cout << "  pe " << pe.node << ": " << pe.edges << " edges, compute "
              << fmt9(100.0 * pe.compute_cycles / e) << "%, acquire "
              << fmt9(100.0 * pe.acquire_cycles / e) << "%, emit "
              << fmt9(100.0 * pe.emit_cycles / e) << "%, read stall "
              << fmt9(100.0 * pe.read_stall_cycles / e) << "%, write stall "
              << fmt9(100.0 * pe.write_stall_cycles / e) << "%, energy "
              << fmt9(pe.energy) << "\n";
  }
}

std::string pe_csv(const gcmp::Metrics& m) {
  std::string out =
      "node,edges,compute_cycles,acquire_cycles,emit_cycles,"
      "read_stall_cycles,write_stall_cycles,firings,energy\n";
  for (const gcmp::PeMetrics& pe : m.pes) {
    out += std::to_string(pe.node) + "," + std::to_string(pe.edges) + "," +
           std::to_string(pe.compute_cycles) + "," +
           std::to_string(pe.acquire_cycles) + "," +
           std::to_string(pe.emit_cycles) + "," +
           std::to_string(pe.read_stall_cycles) + "," +
           std::to_string(pe.write_stall_cycles) + "," +
           std::to_string(pe.firings) + "," + fmt9(pe.energy) + "\n";
  }
  return out;
}

std::string dfs_csv(const gcmp::DfsReport& rep) {
  std::string out =
      "energy_savings,throughput_ratio,optimal_savings,fraction_of_bound,"
      "governed_energy,baseline_energy\n";
  out += fmt9(rep.energy_savings) + "," + fmt9(rep.throughput_ratio) + "," +
         fmt9(rep.optimal_savings) + "," + fmt9(rep.fraction_of_bound) + "," +
         fmt9(rep.governed.total_energy) + "," +
         fmt9(rep.baseline.total_energy) + "\n";
  return out;
}

int run_cmd(const CommonOpts& o) {
  const gcmp::Scenario s = load_with_overrides(o);
  const gcmp::Metrics m = gcmp::run(s);
  print_metrics(s, m);
  if (!o.out.empty()) {
    write_text(resolve_out(o.out), pe_csv(m));
    std::cout << "wrote " << resolve_out(o.out).string() << "\n";
  }
  return 0;
}

int sweep_cmd(const CommonOpts& o, const std::string& axis_name,
              const std::string& values_csv) {
  static const std::map<std::string, gcmp::SweepAxis> axes = {
      {"fifo_capacity", gcmp::SweepAxis::FifoCapacity},
      {"sync_stages", gcmp::SweepAxis::SyncStages},
      {"pe_count", gcmp::SweepAxis::PeCount},
      {"governor", gcmp::SweepAxis::Governor}};
  const auto axis_it = axes.find(axis_name);
  if (axis_it == axes.end()) {
    throw std::invalid_argument(
        "unknown axis '" + axis_name +
        "' (use fifo_capacity, sync_stages, pe_count, or governor)");
  }
  static const std::map<std::string, int> governors = {
      {"none", 0}, {"static", 1}, {"pid", 2}, {"ondemand", 3},
      {"conservative", 4}};
  std::vector<double> values;
  std::string tok;
  std::istringstream in(values_csv);
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    const auto gov_it = governors.find(tok);
    if (axis_it->second == gcmp::SweepAxis::Governor &&
        gov_it != governors.end()) {
      values.push_back(gov_it->second);
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      values.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad sweep value '" + tok + "'");
    }
  }
  if (values.empty()) {
    throw std::invalid_argument("--values needs a comma-separated list");
  }
  const gcmp::Scenario s = load_with_overrides(o);
  const std::vector<gcmp::ReportRow> rows =
      gcmp::sweep(s, axis_it->second, values, o.jobs);
  const std::string csv = gcmp::emit_csv(rows);
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_text(resolve_out(o.out), csv);
    std::cout << "wrote " << resolve_out(o.out).string() << "\n";
  }
  return 0;
}

int compare_cmd(const CommonOpts& o) {
  const gcmp::Scenario s = load_with_overrides(o);
  const gcmp::CompareReport rep = gcmp::compare_sync_gals(s);
  std::cout << "as configured:   " << fmt9(rep.row.throughput)
            << " tokens/s, energy " << fmt9(rep.row.energy) << "\n";
  std::cout << "stages-0 mirror: " << fmt9(rep.row.baseline_throughput)
            << " tokens/s, energy " << fmt9(rep.row.baseline_energy) << "\n";
  std::cout << "penalty: " << fmt9(100.0 * rep.row.penalty) << "%\n";
  std::cout << "stalls (configured run): read "
            << fmt9(100.0 * rep.row.read_stall_frac) << "%, write "
            << fmt9(100.0 * rep.row.write_stall_frac) << "%\n";
  for (const gcmp::ChannelMetrics& ch : rep.gals.channels) {
    std::cout << "  channel " << ch.channel << ": " << ch.pushes
              << " pushes, " << ch.pops << " pops, occupancy mean "
              << fmt9(ch.occ_mean) << " min " << ch.occ_min << " max "
              << ch.occ_max << "\n";
  }
  if (!o.out.empty()) {
    write_text(resolve_out(o.out), gcmp::emit_csv({rep.row}));
    std::cout << "wrote " << resolve_out(o.out).string() << "\n";
  }
  return 0;
}

int dfs_cmd(const CommonOpts& o) {
  const gcmp::Scenario s = load_with_overrides(o);
  const gcmp::DfsReport rep = gcmp::dfs_report(s);
  std::cout << "energy savings vs all-top baseline: "
            << fmt9(100.0 * rep.energy_savings) << "%\n";
  std::cout << "throughput ratio: " << fmt9(rep.throughput_ratio) << "\n";
  std::cout << "optimal static bound: " << fmt9(100.0 * rep.optimal_savings)
            << "% (" << fmt9(100.0 * rep.fraction_of_bound)
            << "% of it reached)\n";
  for (std::size_t i = 0; i < rep.optimal_freqs.size(); ++i) {
    const auto& trace = rep.governed.pes[i].freq_trace;
    std::cout << "  pe " << i << ": optimal static "
              << fmt9(rep.optimal_freqs[i]) << " Hz, governed settled at "
              << fmt9(trace.back().freq) << " Hz after "
              << (trace.size() - 1) << " retunes\n";
  }
  if (!o.out.empty()) {
    write_text(resolve_out(o.out), dfs_csv(rep));
    std::cout << "wrote " << resolve_out(o.out).string() << "\n";
  }
  return 0;
}

int generate_cmd(const std::string& kind_name, const std::string& params_csv,
                 std::uint64_t seed, int stages, bool remove_feedback,
                 const std::string& out) {
  const gcmp::GraphKind kind = gcmp::graph_kind_from_name(kind_name);
  gcmp::GenParams p;
  std::string tok;
  std::istringstream in(params_csv);
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    const std::size_t eq = tok.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--params entries look like key=value");
    }
    const std::string key = tok.substr(0, eq);
    const long long v = std::stoll(tok.substr(eq + 1));
    if (key == "stages") p.stages = static_cast<int>(v);
    else if (key == "points") p.points = static_cast<int>(v);
    else if (key == "copies") p.copies = static_cast<int>(v);
    else if (key == "cycles") p.cycles = v;
    else if (key == "cycles_min") p.cycles_min = v;
    else if (key == "cycles_max") p.cycles_max = v;
    else if (key == "capacity") p.capacity = static_cast<int>(v);
    else throw std::invalid_argument("unknown generator param '" + key + "'");
  }
  const gcmp::Scenario s =
      gcmp::scenario_from_generator(kind, p, seed, stages, remove_feedback);
  const std::string text = gcmp::serialize_scenario(s);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(resolve_out(out), text);
    std::cout << "wrote " << resolve_out(out).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcmpsim: a deterministic simulator for chip multiprocessors "
               "built from per-PE clock domains linked by dual-clock FIFOs"};
  app.require_subcommand(1);

  CommonOpts run_o, sweep_o, compare_o, dfs_o, repro_o;
  std::string axis, values;
  std::string gen_kind, gen_params, gen_out;
  std::uint64_t gen_seed = 1;
  int gen_stages = 2;
  bool gen_remove = false;

  CLI::App* c_run = app.add_subcommand("run", "Run one scenario");
  add_common(c_run, run_o, true);

  CLI::App* c_sweep =
      app.add_subcommand("sweep", "Run a scenario across an axis of values");
  add_common(c_sweep, sweep_o, true);
  c_sweep->add_option("--axis", axis,
                      "fifo_capacity | sync_stages | pe_count | governor")
      ->required();
  c_sweep->add_option("--values", values, "comma-separated axis values")
      ->required();

  CLI::App* c_compare = app.add_subcommand(
      "compare", "Run a scenario against its zero-stage synchronous mirror");
  add_common(c_compare, compare_o, true);

  CLI::App* c_dfs = app.add_subcommand(
      "dfs", "Report governed energy vs the all-top static baseline");
  add_common(c_dfs, dfs_o, true);

  CLI::App* c_gen =
      app.add_subcommand("generate", "Emit a scenario file for a graph kind");
  c_gen->add_option("--kind", gen_kind,
                    "fir_chain | fft_dag | iir_feedback | mjpeg_pipeline | "
                    "adpcm_chain")
      ->required();
  c_gen->add_option("--params", gen_params,
                    "comma-separated key=value generator parameters");
  c_gen->add_option("--seed", gen_seed, "generation seed");
  c_gen->add_option("--stages", gen_stages, "synchronizer depth per channel");
  c_gen->add_flag("--remove-feedback", gen_remove,
                  "drop feedback channels until the graph is acyclic");
  c_gen->add_option("--out", gen_out, "output path (default stdout)");

  CLI::App* c_repro = app.add_subcommand(
      "reproduce-paper",
      "Run the three headline experiments and write their CSVs");
  add_common(c_repro, repro_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(c_run)) return run_cmd(run_o);
    if (app.got_subcommand(c_sweep)) return sweep_cmd(sweep_o, axis, values);
    if (app.got_subcommand(c_compare)) return compare_cmd(compare_o);
    if (app.got_subcommand(c_dfs)) return dfs_cmd(dfs_o);
    if (app.got_subcommand(c_gen)) {
      return generate_cmd(gen_kind, gen_params, gen_seed, gen_stages,
                          gen_remove, gen_out);
    }
    if (app.got_subcommand(c_repro)) {
      const std::string dir = repro_o.out.empty() ? "results" : repro_o.out;
      return gcmp::reproduce_paper(resolve_out(dir).string(), repro_o.jobs,
                                   std::cout);
    }
  } catch (const gcmp::ScenarioError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "runtime error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
