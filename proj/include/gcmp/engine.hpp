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

#ifndef GCMP_ENGINE_HPP
#define GCMP_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gcmp/dfs.hpp"
#include "gcmp/sim_time.hpp"
#include "gcmp/taskgraph.hpp"

namespace gcmp {

struct ClockConfig {
  double freq = 100e6;          // starting frequency, a member of levels
  SimTime phase = 0;            // time of the first rising edge
  std::vector<double> levels;   // sorted ascending; filled by defaults
  double f_min = 0;             // 0 = derive from levels
  double f_max = 0;

  bool operator==(const ClockConfig&) const = default;
};

// Which level a governed PE starts from. Given keeps ClockConfig::freq;
// governed PEs default to Min because a throughput controller can only
// discover slack by ramping up from below.
enum class InitialLevel { Given, Min, Max, Nominal };

struct GovernorConfig {
  GovernorKind kind = GovernorKind::Static;
  double setpoint = 0;              // tokens/s; required for pid
  double kp = 0.5;
  double ki = 0.2;
  double kd = 0.0;
  SimTime window = 50'000'000'000;  // 50 us
  double up_threshold = 0.8;
  double down_threshold = 0.3;
  double f_nominal = 0;             // 0 = expected cycles * setpoint
  InitialLevel initial = InitialLevel::Given;

  bool operator==(const GovernorConfig&) const = default;
};

struct BusConfig {
  double freq = 100e6;
  int cycles_per_transfer = 4;

  bool operator==(const BusConfig&) const = default;
};

// Where the graph came from; lets scenarios round-trip compactly and lets
// pe_count sweeps re-generate at a different replication factor.
struct GraphSpec {
  GraphKind kind = GraphKind::Explicit;
  GenParams params;
  bool remove_feedback = false;

  bool operator==(const GraphSpec&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  GraphSpec spec;
  TaskGraph graph;
  Mapping mapping;
  std::vector<ClockConfig> clocks;   // one per node
  std::vector<int> sync_stages;      // one per channel, by channel position
  BusConfig bus;
  std::vector<GovernorConfig> governors;  // one per node
  PowerModel power;
  SimTime duration = 1'000'000'000'000;   // 1 ms
  SimTime warmup = 100'000'000'000;       // 100 us
  std::uint64_t seed = 1;

  bool operator==(const Scenario&) const = default;
};

struct GovSample {
  SimTime window_end = 0;
  double measured = 0;   // tokens/s (pid) or busy fraction (threshold kinds)
  double commanded = 0;  // Hz

  bool operator==(const GovSample&) const = default;
};

struct PeMetrics {
  int node = 0;
  std::int64_t edges = 0;  // local rising edges in the measured window
  std::int64_t compute_cycles = 0;
  std::int64_t acquire_cycles = 0;
  std::int64_t emit_cycles = 0;
  std::int64_t read_stall_cycles = 0;
  std::int64_t write_stall_cycles = 0;
  std::int64_t firings = 0;
  std::vector<FreqSpan> freq_trace;    // effective times, from t = 0
  std::vector<GovSample> governor_log;  // every window, including warmup
  double energy = 0;  // over the measured window

  bool operator==(const PeMetrics&) const = default;
};

struct ChannelMetrics {
  int channel = 0;
  std::int64_t pushes = 0;  // within the measured window
  std::int64_t pops = 0;
  std::int64_t warmup_occupancy = 0;  // true occupancy when the window opened
  std::int64_t final_occupancy = 0;   // true occupancy at the end
  int occ_min = 0;
  int occ_max = 0;
  double occ_mean = 0;  // time-weighted over the measured window

  bool operator==(const ChannelMetrics&) const = default;
};

struct SinkMetrics {
  int node = 0;
  std::int64_t tokens = 0;  // firings completed within the measured window
  double throughput = 0;    // tokens / measured seconds

  bool operator==(const SinkMetrics&) const = default;
};

struct Metrics {
  std::vector<PeMetrics> pes;
  std::vector<ChannelMetrics> channels;
  std::vector<SinkMetrics> sinks;
  SimTime measured_duration = 0;
  double aggregate_throughput = 0;  // sum over sinks
  double total_energy = 0;
  bool degenerate = false;  // no sink completed anything in the window

  bool operator==(const Metrics&) const = default;
};

// Runs the scenario to completion. Throws std::invalid_argument on
// validation failures. Identical scenarios produce bit-identical Metrics.
Metrics run(const Scenario& s);

// 1 - throughput_gals / throughput_sync, averaged over sinks. Throws when
// any sync sink throughput is zero.
double penalty(const Metrics& gals, const Metrics& sync);

// The equal-frequency synchronous reference: same scenario with every
// synchronizer depth forced to zero.
Scenario sync_baseline_of(const Scenario& s);

// Aggregated structural and semantic problems; empty when runnable.
std::vector<std::string> validate_scenario(const Scenario& s);

// The scenario's defaults made concrete: per-node level grids (sorted),
// starting frequencies, pid anchor frequencies, and the power model with
// its frequency range derived. Throws std::invalid_argument when the
// scenario does not validate.
struct ResolvedScenario {
  std::vector<std::vector<double>> levels;
  std::vector<double> f0;
  std::vector<double> f_nominal;
  PowerModel power;
};
ResolvedScenario resolve_scenario(const Scenario& s);

}  // namespace gcmp

#endif  // GCMP_ENGINE_HPP
