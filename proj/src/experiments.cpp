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

#include "gcmp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <stdexcept>

#include "gcmp/scenario.hpp"

namespace gcmp {

namespace {

std::string fmt9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

ReportRow row_from_runs(const std::string& axis, double value,
                        const Metrics& gals, const Metrics& sync) {
  ReportRow row;
  row.axis = axis;
  row.value = value;
  row.throughput = gals.aggregate_throughput;
  row.baseline_throughput = sync.aggregate_throughput;
  row.degenerate = gals.degenerate || sync.degenerate;
  row.penalty = penalty(gals, sync);
  row.energy = gals.total_energy;
  row.baseline_energy = sync.total_energy;
  std::int64_t edges = 0, rs = 0, ws = 0;
  for (const PeMetrics& pe : gals.pes) {
    edges += pe.edges;
    rs += pe.read_stall_cycles;
    ws += pe.write_stall_cycles;
  }
  if (edges > 0) {
    row.read_stall_frac = static_cast<double>(rs) / static_cast<double>(edges);
    row.write_stall_frac = static_cast<double>(ws) / static_cast<double>(edges);
  }
  return row;
}

int integral_value(SweepAxis axis, double v) {
  const double r = std::floor(v);
  if (r != v || r < 0) {
    throw std::invalid_argument(std::string(sweep_axis_name(axis)) +
                                " sweep values must be non-negative integers");
  }
  return static_cast<int>(r);
}

}  // namespace

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::FifoCapacity: return "fifo_capacity";
    case SweepAxis::SyncStages: return "sync_stages";
    case SweepAxis::PeCount: return "pe_count";
    case SweepAxis::Governor: return "governor";
  }
  return "unknown";
}

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value) {
  Scenario s = base;
  switch (axis) {
    case SweepAxis::FifoCapacity: {
      const int cap = integral_value(axis, value);
      if (cap < 1) {
        throw std::invalid_argument("fifo_capacity values must be >= 1");
      }
      for (Channel& c : s.graph.channels) {
        c.capacity = cap;
        c.initial_tokens = std::min(c.initial_tokens, cap);
      }
      s.spec.params.capacity = cap;
      break;
    }
    case SweepAxis::SyncStages: {
      const int st = integral_value(axis, value);
      std::fill(s.sync_stages.begin(), s.sync_stages.end(), st);
      break;
    }
    case SweepAxis::PeCount: {
      if (base.spec.kind == GraphKind::Explicit) {
        throw std::invalid_argument(
            "pe_count sweeps need a generated graph spec");
      }
      const int target = integral_value(axis, value);
      const int per_copy =
          static_cast<int>(base.graph.nodes.size()) / base.spec.params.copies;
      if (target < per_copy || target % per_copy != 0) {
        throw std::invalid_argument(
            "pe_count value " + std::to_string(target) +
            " is not a multiple of the graph's per-instance node count " +
            std::to_string(per_copy));
      }
      auto uniform = [](const auto& xs) {
        return std::all_of(xs.begin(), xs.end(),
                           [&](const auto& x) { return x == xs.front(); });
      };
      if (base.clocks.empty() || !uniform(base.clocks) ||
          !uniform(base.governors) || !uniform(base.sync_stages)) {
        throw std::invalid_argument(
            "pe_count sweeps need uniform per-node and per-channel config");
      }
      GenParams params = base.spec.params;
      params.copies = target / per_copy;
      Scenario grown = scenario_from_generator(
          base.spec.kind, params, base.seed, base.sync_stages.front(),
          base.spec.remove_feedback);
      grown.name = base.name;
      grown.mapping.interconnect = base.mapping.interconnect;
      grown.mapping.adjacency_check = base.mapping.adjacency_check;
      grown.bus = base.bus;
      grown.power = base.power;
      grown.duration = base.duration;
      grown.warmup = base.warmup;
      grown.clocks.assign(grown.graph.nodes.size(), base.clocks.front());
      grown.governors.assign(grown.graph.nodes.size(),
                             base.governors.front());
      s = std::move(grown);
      break;
    }
    case SweepAxis::Governor: {
      const int k = integral_value(axis, value);
      if (k > static_cast<int>(GovernorKind::Conservative)) {
        throw std::invalid_argument("governor sweep value out of range");
      }
      for (GovernorConfig& g : s.governors) {
        g.kind = static_cast<GovernorKind>(k);
      }
      break;
    }
  }
  return s;
}

std::vector<ReportRow> sweep(const Scenario& base, SweepAxis axis,
                             const std::vector<double>& values, int jobs) {
  if (values.empty()) {
    throw std::invalid_argument("sweep needs at least one axis value");
  }
  std::vector<Scenario> variants;
  variants.reserve(values.size());
  for (double v : values) variants.push_back(apply_axis(base, axis, v));

  auto one = [&](std::size_t i) -> ReportRow {
    try {
      const Metrics gals = run(variants[i]);
      const Metrics sync = run(sync_baseline_of(variants[i]));
      return row_from_runs(sweep_axis_name(axis), values[i], gals, sync);
    } catch (const std::exception& ex) {
      throw std::runtime_error(std::string(sweep_axis_name(axis)) + " = " +
                               fmt9(values[i]) + ": " + ex.what());
    }
  };

  std::vector<ReportRow> rows(values.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) rows[i] = one(i);
    return rows;
  }
  // Waves of at most `jobs` concurrent points; completion order cannot
  // matter because results land by index.
  std::vector<std::future<ReportRow>> futs(values.size());
  std::size_t next = 0;
  while (next < values.size()) {
    const std::size_t wave_end =
        std::min(values.size(), next + static_cast<std::size_t>(jobs));
    for (std::size_t i = next; i < wave_end; ++i) {
      futs[i] = std::async(std::launch::async, one, i);
    }
    for (std::size_t i = next; i < wave_end; ++i) rows[i] = futs[i].get();
    next = wave_end;
  }
  return rows;
}

CompareReport compare_sync_gals(const Scenario& s) {
  CompareReport rep;
  rep.gals = run(s);
  rep.sync = run(sync_baseline_of(s));
  rep.row = row_from_runs("compare", 0, rep.gals, rep.sync);
  return rep;
}

DfsReport dfs_report(const Scenario& s) {
  const bool any_governed =
      std::any_of(s.governors.begin(), s.governors.end(),
                  [](const GovernorConfig& g) {
                    return g.kind != GovernorKind::Static &&
                           g.kind != GovernorKind::None;
                  });
  if (!any_governed) {
    throw std::invalid_argument(
        "dfs_report needs at least one governed processing element");
  }
  const ResolvedScenario rs = resolve_scenario(s);
  const int n = static_cast<int>(s.graph.nodes.size());

  Scenario base = s;
  base.power = rs.power;  // identical V(f) map on both sides
  std::vector<double> tops(n);
  for (int i = 0; i < n; ++i) {
    tops[i] = rs.levels[i].back();
    base.clocks[i] = ClockConfig{};
    base.clocks[i].freq = tops[i];
    base.clocks[i].levels = {tops[i]};
    base.governors[i] = GovernorConfig{};
  }

  DfsReport rep;
  rep.governed = run(s);
  rep.baseline = run(base);
  if (!(rep.baseline.total_energy > 0) ||
      !(rep.baseline.aggregate_throughput > 0)) {
    throw std::domain_error(
        "dfs_report: baseline produced no energy or throughput");
  }
  rep.energy_savings =
      1.0 - rep.governed.total_energy / rep.baseline.total_energy;
  rep.throughput_ratio =
      rep.governed.aggregate_throughput / rep.baseline.aggregate_throughput;

  // Optimal static frequencies: the demanded rate equals the all-top
  // bottleneck rate; every node then takes the smallest level that sustains
  // its share of it. Power at those levels bounds harvestable savings.
  const std::vector<double> rates = bottleneck_rate(s.graph, tops);
  const double demand = *std::min_element(rates.begin(), rates.end());
  double p_opt = 0, p_top = 0;
  rep.optimal_freqs.resize(n);
  for (int i = 0; i < n; ++i) {
    const double need = demand * s.graph.nodes[i].expected_cost();
    double pick = tops[i];
    for (double f : rs.levels[i]) {
      if (f >= need * (1.0 - 1e-12)) {
        pick = f;
        break;
      }
    }
    rep.optimal_freqs[i] = pick;
    p_opt += power_of(pick, rs.power);
    p_top += power_of(tops[i], rs.power);
  }
  rep.optimal_savings = 1.0 - p_opt / p_top;
  rep.fraction_of_bound = rep.optimal_savings > 0
                              ? rep.energy_savings / rep.optimal_savings
                              : 1.0;
  return rep;
}

std::string emit_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "axis,value,throughput,baseline_throughput,penalty,energy,"
      "baseline_energy,read_stall_frac,write_stall_frac,degenerate\n";
  for (const ReportRow& r : rows) {
    out += r.axis;
    out += ',';
    out += fmt9(r.value);
    out += ',';
    out += fmt9(r.throughput);
    out += ',';
    out += fmt9(r.baseline_throughput);
    out += ',';
    out += fmt9(r.penalty);
    out += ',';
    out += fmt9(r.energy);
    out += ',';
    out += fmt9(r.baseline_energy);
    out += ',';
    out += fmt9(r.read_stall_frac);
    out += ',';
    out += fmt9(r.write_stall_frac);
    out += ',';
    out += r.degenerate ? '1' : '0';
    out += '\n';
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + p.string());
  }
  out << bytes;
}

// The standing configuration for the three headline experiments. Durations
// are chosen so token-count granularity sits well under the thresholds.
Scenario zero_penalty_scenario(GraphKind kind) {
  GenParams p;
  p.cycles = 10;
  p.capacity = 1024;
  if (kind == GraphKind::FirChain) p.stages = 4;
  if (kind == GraphKind::FftDag) p.points = 8;
  Scenario s = scenario_from_generator(kind, p, 1, 2);
  s.duration = from_seconds(2e-3);
  s.warmup = from_seconds(5e-4);
  return s;
}

Scenario loop_removal_scenario(bool removed) {
  GenParams p;
  p.stages = 3;
  p.cycles = 10;
  p.capacity = 1024;
  Scenario s = scenario_from_generator(GraphKind::IirFeedback, p, 1, 2,
                                       removed);
  s.duration = from_seconds(1'500e-6);
  s.warmup = from_seconds(300e-6);
  return s;
}

Scenario dfs_savings_scenario() {
  GenParams p;
  p.cycles = 10;  // encode 10 cycles/token, decode 5: a 2x over-provision
  p.capacity = 64;
  Scenario s = scenario_from_generator(GraphKind::AdpcmChain, p, 1, 2);
  for (std::size_t i = 0; i < s.clocks.size(); ++i) {
    s.clocks[i].levels.clear();
    for (int k = 1; k <= 8; ++k) s.clocks[i].levels.push_back(62.5e6 * k);
    GovernorConfig g;
    g.kind = GovernorKind::Pid;
    g.setpoint = 5e7;
    g.kp = 0.3;
    g.ki = 0.1;
    g.kd = 0.0;
    g.window = from_seconds(50e-6);
    g.initial = InitialLevel::Min;
    s.governors[i] = g;
  }
  s.duration = from_seconds(2e-3);
  s.warmup = from_seconds(300e-6);
  return s;
}

}  // namespace

int reproduce_paper(const std::string& out_dir, int jobs, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  bool all_pass = true;
  auto verdict = [&](const char* name, bool ok, const std::string& detail) {
    log << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    all_pass = all_pass && ok;
  };

  {
    std::vector<ReportRow> rows;
    auto run_one = [&](GraphKind kind, double label) {
      const Scenario s = zero_penalty_scenario(kind);
      const Metrics g = run(s);
      const Metrics b = run(sync_baseline_of(s));
      rows.push_back(row_from_runs(graph_kind_name(kind), label, g, b));
    };
    if (jobs > 1) {
      auto fir = std::async(std::launch::async, [] {
        const Scenario s = zero_penalty_scenario(GraphKind::FirChain);
        return std::pair{run(s), run(sync_baseline_of(s))};
      });
      auto fft = std::async(std::launch::async, [] {
        const Scenario s = zero_penalty_scenario(GraphKind::FftDag);
        return std::pair{run(s), run(sync_baseline_of(s))};
      });
      auto [fg, fb] = fir.get();
      rows.push_back(row_from_runs("fir_chain", 4, fg, fb));
      auto [gg, gb] = fft.get();
      rows.push_back(row_from_runs("fft_dag", 8, gg, gb));
    } else {
      run_one(GraphKind::FirChain, 4);
      run_one(GraphKind::FftDag, 8);
    }
    write_file(fs::path(out_dir) / "zero_penalty.csv", emit_csv(rows));
    const double worst = std::max(rows[0].penalty, rows[1].penalty);
    verdict("zero_penalty", worst <= 0.001,
            "worst penalty " + fmt9(worst) + " (required <= 0.001)");
  }

  {
    std::vector<ReportRow> rows;
    for (const bool removed : {false, true}) {
      const Scenario s = loop_removal_scenario(removed);
      const Metrics g = run(s);
      const Metrics b = run(sync_baseline_of(s));
      rows.push_back(
          row_from_runs("remove_feedback", removed ? 1 : 0, g, b));
    }
    write_file(fs::path(out_dir) / "loop_removal.csv", emit_csv(rows));
    const bool ok = rows[0].penalty > 0.01 && rows[1].penalty <= 0.001;
    verdict("loop_removal", ok,
            "penalty " + fmt9(rows[0].penalty) + " before removal (required "
            "> 0.01), " + fmt9(rows[1].penalty) + " after (required <= 0.001)");
  }

  {
    const DfsReport rep = dfs_report(dfs_savings_scenario());
    std::string csv =
        "energy_savings,throughput_ratio,optimal_savings,fraction_of_bound,"
        "governed_energy,baseline_energy\n";
    csv += fmt9(rep.energy_savings);
    csv += ',';
    csv += fmt9(rep.throughput_ratio);
    csv += ',';
    csv += fmt9(rep.optimal_savings);
    csv += ',';
    csv += fmt9(rep.fraction_of_bound);
    csv += ',';
    csv += fmt9(rep.governed.total_energy);
    csv += ',';
    csv += fmt9(rep.baseline.total_energy);
    csv += '\n';
    write_file(fs::path(out_dir) / "dfs_savings.csv", csv);
    const bool ok = rep.energy_savings >= 0.30 && rep.energy_savings <= 0.50 &&
                    std::abs(rep.throughput_ratio - 1.0) <= 0.01 &&
                    rep.fraction_of_bound >= 0.75;
    verdict("dfs_savings", ok,
            "savings " + fmt9(rep.energy_savings) +
                " (required in [0.3, 0.5]), throughput ratio " +
                fmt9(rep.throughput_ratio) + " (required within 1%), " +
                fmt9(rep.fraction_of_bound) +
                " of the static-optimal bound (required >= 0.75)");
  }

  return all_pass ? 0 : 1;
}

}  // namespace gcmp
