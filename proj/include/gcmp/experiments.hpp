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

#ifndef GCMP_EXPERIMENTS_HPP
#define GCMP_EXPERIMENTS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gcmp/engine.hpp"

namespace gcmp {

// What a sweep varies. fifo_capacity and sync_stages apply uniformly to
// every channel; pe_count re-generates the graph at a different replication
// factor (generated kinds only, uniform per-node config required); governor
// switches every PE's governor kind.
enum class SweepAxis { FifoCapacity, SyncStages, PeCount, Governor };

const char* sweep_axis_name(SweepAxis axis);

// One measurement: a scenario variant run twice, once as configured and once
// with every synchronizer depth forced to zero (the synchronous reference).
struct ReportRow {
  std::string axis;
  double value = 0;
  double throughput = 0;           // aggregate sink tokens/s, as configured
  double baseline_throughput = 0;  // same, stages = 0
  double penalty = 0;              // engine penalty() of the two runs
  double energy = 0;
  double baseline_energy = 0;
  double read_stall_frac = 0;   // summed over PEs / summed edges
  double write_stall_frac = 0;
  bool degenerate = false;      // either run finished without sink tokens

  bool operator==(const ReportRow&) const = default;
};

// The scenario variant a sweep runs at one axis value. Throws
// std::invalid_argument when the value does not suit the axis.
Scenario apply_axis(const Scenario& base, SweepAxis axis, double value);

// One row per value, in the given order. jobs > 1 runs points concurrently;
// row order and content are identical either way.
std::vector<ReportRow> sweep(const Scenario& base, SweepAxis axis,
                             const std::vector<double>& values, int jobs = 1);

struct CompareReport {
  ReportRow row;  // axis "compare", value 0
  Metrics gals;
  Metrics sync;
};

// Runs the scenario and its stages-0 baseline; full Metrics for both.
CompareReport compare_sync_gals(const Scenario& s);

struct DfsReport {
  Metrics governed;
  Metrics baseline;          // every PE pinned to the top of its level grid
  double energy_savings = 0;      // 1 - governed energy / baseline energy
  double throughput_ratio = 0;    // governed / baseline aggregate throughput
  double optimal_savings = 0;     // bound from the optimal static frequencies
  double fraction_of_bound = 0;   // energy_savings / optimal_savings
  std::vector<double> optimal_freqs;  // per node: smallest level sustaining
                                      // the baseline bottleneck rate
};

// Governed run vs all-top-frequency static baseline, plus the analytic
// optimal-static-frequency bound. Requires at least one non-static governor
// and an acyclic graph (the bound is a bottleneck-rate argument).
DfsReport dfs_report(const Scenario& s);

// Header plus one line per row, %.9g numbers, deterministic bytes.
std::string emit_csv(const std::vector<ReportRow>& rows);

// Runs the three headline experiments (zero-penalty regime, feedback-loop
// removal, DFS energy savings), writes zero_penalty.csv, loop_removal.csv,
// and dfs_savings.csv into out_dir, and prints one PASS/FAIL line per
// experiment to log. Returns 0 when all pass, 1 otherwise.
int reproduce_paper(const std::string& out_dir, int jobs, std::ostream& log);

}  // namespace gcmp

#endif  // GCMP_EXPERIMENTS_HPP
