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

#ifndef GCMP_TASKGRAPH_HPP
#define GCMP_TASKGRAPH_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gcmp/sim_time.hpp"

namespace gcmp {

// A dataflow task. Port rates are indexed by port number; input port p of a
// node is bound to exactly one channel, likewise output ports. Compute cost
// is fixed when compute_min == compute_max, otherwise drawn uniformly per
// firing from [compute_min, compute_max] using the node's seed.
struct TaskNode {
  int id = 0;
  std::int64_t compute_min = 1;
  std::int64_t compute_max = 1;
  std::uint64_t seed = 0;
  std::vector<int> consume;  // tokens required per input port per firing
  std::vector<int> produce;  // tokens emitted per output port per firing

  bool fixed_cost() const { return compute_min == compute_max; }
  double expected_cost() const {
    return 0.5 * (static_cast<double>(compute_min) +
                  static_cast<double>(compute_max));
  }

  bool operator==(const TaskNode&) const = default;
};

struct Channel {
  int id = 0;
  int src_node = 0;
  int src_port = 0;
  int dst_node = 0;
  int dst_port = 0;
  int capacity = 32;
  int initial_tokens = 0;

  bool operator==(const Channel&) const = default;
};

struct TaskGraph {
  std::vector<TaskNode> nodes;
  std::vector<Channel> channels;
  std::vector<int> sinks;  // nodes whose completed firings are counted

  bool operator==(const TaskGraph&) const = default;
};

enum class Interconnect { PointToPoint, SharedBus };

// Placement of nodes onto a W x H mesh of processing elements, one node per
// PE. Adjacency of connected nodes is only enforced when adjacency_check is
// set; tree- and loop-shaped graphs generally cannot satisfy it.
struct Mapping {
  std::vector<std::pair<int, int>> coords;  // per node, (x, y)
  int mesh_w = 1;
  int mesh_h = 1;
  Interconnect interconnect = Interconnect::PointToPoint;
  bool adjacency_check = false;

  bool operator==(const Mapping&) const = default;
};

// Returns the complete list of structural problems, empty when valid.
std::vector<std::string> validate(const TaskGraph& g, const Mapping& m);

// Enumerates the elementary communication loops as channel-id sequences.
// Throws std::runtime_error once more than max_cycles loops exist.
std::vector<std::vector<int>> detect_comm_loops(const TaskGraph& g,
                                                std::size_t max_cycles = 10'000);

// Returns an acyclic copy of g plus the ids of the removed channels. The
// set is chosen greedily (channel covering the most remaining loops first,
// ties broken toward channels whose removal keeps every sink reachable from
// a source, then toward the lowest id) and then thinned until restoring any
// removed channel would reintroduce a loop.
std::pair<TaskGraph, std::vector<int>> remove_feedback_channels(
    const TaskGraph& g);

enum class GraphKind {
  FirChain,
  FftDag,
  IirFeedback,
  MjpegPipeline,
  AdpcmChain,
  Explicit,  // only produced by scenario files, never by generate()
};

struct GenParams {
  int stages = 4;                // chain length (FirChain, IirFeedback)
  int points = 8;                // transform size (FftDag), power of two
  int copies = 1;                // parallel independent instances
  std::int64_t cycles = 10;      // fixed compute cost
  std::int64_t cycles_min = 6;   // variable compute cost (MjpegPipeline)
  std::int64_t cycles_max = 14;
  int capacity = 32;             // channel capacity at generation time

  bool operator==(const GenParams&) const = default;
};

// Deterministically builds a graph and mapping for the given kind. Equal
// arguments produce bit-equal results.
std::pair<TaskGraph, Mapping> generate(GraphKind kind, const GenParams& p,
                                       std::uint64_t seed);

// Serpentine placement of n nodes on a near-square mesh; consecutive ids
// land on adjacent PEs.
Mapping snake_mapping(int n, Interconnect ic, bool adjacency_check);

// Long-run sink rates (tokens/s) of an acyclic unit-rate graph where node i
// runs at freq_per_node[i] Hz: for each sink, the minimum of f/expected_cost
// over every node on some path into it. Order follows g.sinks.
std::vector<double> bottleneck_rate(const TaskGraph& g,
                                    const std::vector<double>& freq_per_node);

const char* graph_kind_name(GraphKind k);

// Inverse of graph_kind_name; throws std::invalid_argument on unknown names.
GraphKind graph_kind_from_name(const std::string& name);

}  // namespace gcmp

#endif  // GCMP_TASKGRAPH_HPP
