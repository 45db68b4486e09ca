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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdlib>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "gcmp/rng.hpp"
#include "gcmp/taskgraph.hpp"

namespace {

using gcmp::Channel;
using gcmp::TaskGraph;
using gcmp::TaskNode;

// Builds a unit-rate graph from (src, dst) pairs; ports are appended in
// channel order, exactly like the library's own Builder does.
TaskGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  TaskGraph g;
  for (int i = 0; i < n; ++i) {
    TaskNode nd;
    nd.id = i;
    g.nodes.push_back(nd);
  }
  int id = 0;
  for (auto [src, dst] : edges) {
    Channel c;
    c.id = id++;
    c.src_node = src;
    c.src_port = static_cast<int>(g.nodes[src].produce.size());
    c.dst_node = dst;
    c.dst_port = static_cast<int>(g.nodes[dst].consume.size());
    g.nodes[src].produce.push_back(1);
    g.nodes[dst].consume.push_back(1);
    g.channels.push_back(c);
  }
  g.sinks = {0};
  return g;
}

// Independent elementary-circuit enumeration: DFS over channels restricted
// to vertices >= the start, so each circuit is found exactly once, anchored
// at its least vertex.
void brute_circuits_from(const TaskGraph& g, int start, int v,
                         std::vector<char>& on_path, std::vector<int>& path,
                         std::vector<std::vector<int>>& out) {
  for (const Channel& c : g.channels) {
    if (c.src_node != v || c.dst_node < start) continue;
    if (c.dst_node == start) {
      path.push_back(c.id);
      out.push_back(path);
      path.pop_back();
    } else if (!on_path[c.dst_node]) {
      on_path[c.dst_node] = 1;
      path.push_back(c.id);
      brute_circuits_from(g, start, c.dst_node, on_path, path, out);
      path.pop_back();
      on_path[c.dst_node] = 0;
    }
  }
}

std::vector<std::vector<int>> brute_circuits(const TaskGraph& g) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(g.nodes.size());
  for (int s = 0; s < n; ++s) {
    std::vector<char> on_path(n, 0);
    on_path[s] = 1;
    std::vector<int> path;
    brute_circuits_from(g, s, s, on_path, path, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool edges_have_cycle(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [s, d] : edges) {
    if (s == d) return true;
    adj[s].push_back(d);
  }
  // Kahn-style: a cycle exists iff the topological order is incomplete.
  std::vector<int> indeg(n, 0);
  for (int v = 0; v < n; ++v) {
    for (int w : adj[v]) indeg[w]++;
  }
  std::vector<int> q;
  for (int v = 0; v < n; ++v) {
    if (indeg[v] == 0) q.push_back(v);
  }
  std::size_t done = 0;
  while (!q.empty()) {
    int v = q.back();
    q.pop_back();
    done++;
    for (int w : adj[v]) {
      if (--indeg[w] == 0) q.push_back(w);
    }
  }
  return done != static_cast<std::size_t>(n);
}

bool has_err(const std::vector<std::string>& errs, const std::string& what) {
  return std::any_of(errs.begin(), errs.end(), [&](const std::string& e) {
    return e.find(what) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("generated graphs validate cleanly") {
  for (gcmp::GraphKind kind :
       {gcmp::GraphKind::FirChain, gcmp::GraphKind::FftDag,
        gcmp::GraphKind::IirFeedback, gcmp::GraphKind::MjpegPipeline,
        gcmp::GraphKind::AdpcmChain}) {
    auto [g, m] = gcmp::generate(kind, {}, 1);
    CHECK(gcmp::validate(g, m).empty());
    CHECK_FALSE(g.sinks.empty());
  }
}

TEST_CASE("validation names every structural problem") {
  auto [g, m] = gcmp::generate(gcmp::GraphKind::FirChain, {}, 1);

  SUBCASE("node ids must be positional") {
    g.nodes[1].id = 5;
    CHECK(has_err(gcmp::validate(g, m), "ids must be 0..N-1"));
  }
  SUBCASE("compute cost bounds") {
    g.nodes[0].compute_min = 0;
    CHECK(has_err(gcmp::validate(g, m), "compute cycles"));
    g.nodes[0].compute_min = 5;
    g.nodes[0].compute_max = 3;
    CHECK(has_err(gcmp::validate(g, m), "compute cycles"));
  }
  SUBCASE("port rates are at least one") {
    g.nodes[1].consume[0] = 0;
    CHECK(has_err(gcmp::validate(g, m), "consume rates"));
  }
  SUBCASE("duplicate channel ids") {
    g.channels[1].id = g.channels[0].id;
    CHECK(has_err(gcmp::validate(g, m), "duplicate channel id"));
  }
  SUBCASE("a port bound twice") {
    g.channels[1].src_node = g.channels[0].src_node;
    g.channels[1].src_port = g.channels[0].src_port;
    auto errs = gcmp::validate(g, m);
    CHECK(has_err(errs, "bound twice"));
    CHECK(has_err(errs, "has no channel"));  // the abandoned port
  }
  SUBCASE("capacity and initial tokens") {
    g.channels[0].capacity = 0;
    CHECK(has_err(gcmp::validate(g, m), "capacity must be >= 1"));
    g.channels[0].capacity = 4;
    g.channels[0].initial_tokens = 5;
    CHECK(has_err(gcmp::validate(g, m), "initial tokens"));
  }
  SUBCASE("sink bookkeeping") {
    g.sinks = {};
    CHECK(has_err(gcmp::validate(g, m), "no sink nodes"));
    g.sinks = {99};
    CHECK(has_err(gcmp::validate(g, m), "out of range"));
    g.sinks = {3, 3};
    CHECK(has_err(gcmp::validate(g, m), "listed twice"));
  }
  SUBCASE("mapping shape") {
    m.coords[0] = {9, 9};
    CHECK(has_err(gcmp::validate(g, m), "off-mesh"));
    m.coords[0] = m.coords[1];
    CHECK(has_err(gcmp::validate(g, m), "share mesh tile"));
    m.coords.pop_back();
    CHECK(has_err(gcmp::validate(g, m), "mapping covers"));
  }
  SUBCASE("adjacency when requested") {
    REQUIRE(m.adjacency_check);
    std::swap(m.coords[0], m.coords[3]);
    CHECK(has_err(gcmp::validate(g, m), "adjacency is required"));
    m.adjacency_check = false;
    std::swap(m.coords[0], m.coords[3]);
    CHECK(gcmp::validate(g, m).empty());
  }
}

TEST_CASE("loop detection matches brute-force enumeration on random graphs") {
  gcmp::SplitMix64 rng(42);
  for (int trial = 0; trial < 80; ++trial) {
    const int n = static_cast<int>(rng.uniform(2, 6));
    const int m = static_cast<int>(rng.uniform(1, 9));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i) {
      edges.push_back({static_cast<int>(rng.uniform(0, n - 1)),
                       static_cast<int>(rng.uniform(0, n - 1))});
    }
    const TaskGraph g = graph_from_edges(n, edges);
    CAPTURE(trial);
    const auto expected = brute_circuits(g);
    const auto got = gcmp::detect_comm_loops(g, 1'000'000);
    REQUIRE(got == expected);
  }
}

TEST_CASE("loop enumeration enforces its explosion bound") {
  // A complete digraph on 4 vertices has exactly 20 elementary circuits.
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) edges.push_back({i, j});
    }
  }
  const TaskGraph g = graph_from_edges(4, edges);
  CHECK(brute_circuits(g).size() == 20);
  CHECK_NOTHROW(gcmp::detect_comm_loops(g, 20));
  CHECK_THROWS_AS(gcmp::detect_comm_loops(g, 19), std::runtime_error);
}

TEST_CASE("feedback removal yields a minimal acyclic cut") {
  gcmp::SplitMix64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = static_cast<int>(rng.uniform(3, 6));
    const int m = static_cast<int>(rng.uniform(4, 10));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i) {
      edges.push_back({static_cast<int>(rng.uniform(0, n - 1)),
                       static_cast<int>(rng.uniform(0, n - 1))});
    }
    const TaskGraph g = graph_from_edges(n, edges);
    CAPTURE(trial);

    auto [acyclic, removed] = gcmp::remove_feedback_channels(g);
    REQUIRE(std::is_sorted(removed.begin(), removed.end()));
    REQUIRE(std::adjacent_find(removed.begin(), removed.end()) ==
            removed.end());

    const std::set<int> gone(removed.begin(), removed.end());
    std::vector<std::pair<int, int>> kept;
    for (const Channel& c : g.channels) {
      if (!gone.count(c.id)) kept.push_back({c.src_node, c.dst_node});
    }
    REQUIRE_FALSE(edges_have_cycle(n, kept));
    REQUIRE(gcmp::detect_comm_loops(acyclic).empty());

    // Minimal in the inclusion sense: every removed channel is needed.
    for (int r : removed) {
      auto restored = kept;
      for (const Channel& c : g.channels) {
        if (c.id == r) restored.push_back({c.src_node, c.dst_node});
      }
      REQUIRE(edges_have_cycle(n, restored));
    }

    // Port surgery keeps the survivor structurally sound.
    const gcmp::Mapping snake = gcmp::snake_mapping(
        n, gcmp::Interconnect::PointToPoint, false);
    REQUIRE(gcmp::validate(acyclic, snake).empty());
    REQUIRE(acyclic.channels.size() + removed.size() == g.channels.size());
  }
}

TEST_CASE("removing the feedback of a loop-shaped chain keeps the sink fed") {
  gcmp::GenParams p;
  p.stages = 3;
  auto [g, m] = gcmp::generate(gcmp::GraphKind::IirFeedback, p, 1);
  REQUIRE(g.channels.size() == 3);
  REQUIRE(gcmp::detect_comm_loops(g).size() == 1);

  auto [acyclic, removed] = gcmp::remove_feedback_channels(g);
  CHECK(removed.size() == 1);
  CHECK(gcmp::detect_comm_loops(acyclic).empty());
  CHECK(acyclic.sinks == g.sinks);
  // The kept channels still reach the sink from a source.
  const gcmp::Mapping snake = gcmp::snake_mapping(
      3, gcmp::Interconnect::PointToPoint, false);
  CHECK(gcmp::validate(acyclic, snake).empty());
}

TEST_CASE("generation is deterministic") {
  gcmp::GenParams p;
  p.stages = 5;
  p.cycles = 12;
  auto a = gcmp::generate(gcmp::GraphKind::FirChain, p, 9);
  auto b = gcmp::generate(gcmp::GraphKind::FirChain, p, 9);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);

  auto c = gcmp::generate(gcmp::GraphKind::FirChain, p, 10);
  CHECK(c.first != a.first);  // node seeds track the graph seed
  CHECK(c.first.channels == a.first.channels);
}

TEST_CASE("generator shapes") {
  SUBCASE("fir chain") {
    gcmp::GenParams p;
    p.stages = 4;
    p.cycles = 10;
    auto [g, m] = gcmp::generate(gcmp::GraphKind::FirChain, p, 1);
    CHECK(g.nodes.size() == 4);
    CHECK(g.channels.size() == 3);
    CHECK(g.sinks == std::vector<int>{3});
    for (const TaskNode& nd : g.nodes) {
      CHECK(nd.compute_min == 10);
      CHECK(nd.fixed_cost());
    }
    CHECK(m.adjacency_check);
  }
  SUBCASE("fft dag") {
    gcmp::GenParams p;
    p.points = 8;
    auto [g, m] = gcmp::generate(gcmp::GraphKind::FftDag, p, 1);
    CHECK(g.nodes.size() == 8);  // source, 4 leaves, 2 combiners, root
    CHECK(g.channels.size() == 10);
    CHECK(g.sinks == std::vector<int>{7});
    CHECK(gcmp::detect_comm_loops(g).empty());
  }
  SUBCASE("codec pair is deliberately unbalanced") {
    gcmp::GenParams p;
    p.cycles = 10;
    auto [g, m] = gcmp::generate(gcmp::GraphKind::AdpcmChain, p, 1);
    REQUIRE(g.nodes.size() == 2);
    CHECK(g.nodes[0].compute_min == 10);
    CHECK(g.nodes[1].compute_min == 5);
    p.cycles = 1;
    auto [g1, m1] = gcmp::generate(gcmp::GraphKind::AdpcmChain, p, 1);
    CHECK(g1.nodes[1].compute_min == 1);
  }
  SUBCASE("variable-cost pipeline") {
    gcmp::GenParams p;
    p.cycles_min = 6;
    p.cycles_max = 14;
    auto [g, m] = gcmp::generate(gcmp::GraphKind::MjpegPipeline, p, 1);
    REQUIRE(g.nodes.size() == 4);
    for (const TaskNode& nd : g.nodes) {
      CHECK_FALSE(nd.fixed_cost());
      CHECK(nd.expected_cost() == 10.0);
    }
  }
  SUBCASE("loop-carried chain seeds its recurrence") {
    gcmp::GenParams p;
    p.stages = 3;
    auto [g, m] = gcmp::generate(gcmp::GraphKind::IirFeedback, p, 1);
    REQUIRE(g.channels.size() == 3);
    CHECK(g.channels[2].src_node == 2);
    CHECK(g.channels[2].dst_node == 0);
    CHECK(g.channels[2].initial_tokens == 1);
  }
  SUBCASE("replication") {
    gcmp::GenParams p;
    p.stages = 3;
    p.copies = 2;
    auto [g, m] = gcmp::generate(gcmp::GraphKind::FirChain, p, 1);
    CHECK(g.nodes.size() == 6);
    CHECK(g.channels.size() == 4);
    CHECK(g.sinks == std::vector<int>{2, 5});
    CHECK(gcmp::validate(g, m).empty());
  }
  SUBCASE("bad parameters are rejected") {
    gcmp::GenParams p;
    p.stages = 0;
    CHECK_THROWS_AS(gcmp::generate(gcmp::GraphKind::FirChain, p, 1),
                    std::invalid_argument);
    p.stages = 1;
    CHECK_THROWS_AS(gcmp::generate(gcmp::GraphKind::IirFeedback, p, 1),
                    std::invalid_argument);
    p = {};
    p.points = 6;
    CHECK_THROWS_AS(gcmp::generate(gcmp::GraphKind::FftDag, p, 1),
                    std::invalid_argument);
    p = {};
    p.copies = 0;
    CHECK_THROWS_AS(gcmp::generate(gcmp::GraphKind::FirChain, p, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(gcmp::generate(gcmp::GraphKind::Explicit, {}, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("bottleneck rates equal the slowest stage on any feeding path") {
  gcmp::GenParams p;
  p.stages = 3;
  p.cycles = 10;
  auto [g, m] = gcmp::generate(gcmp::GraphKind::FirChain, p, 1);
  const auto rates = gcmp::bottleneck_rate(g, {100e6, 50e6, 200e6});
  REQUIRE(rates.size() == 1);
  CHECK(rates[0] == 5e6);
}

TEST_CASE("bottleneck rates match a reachability oracle on random dags") {
  gcmp::SplitMix64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = static_cast<int>(rng.uniform(2, 7));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.uniform(0, 9) < 4) edges.push_back({i, j});
      }
    }
    TaskGraph g = graph_from_edges(n, edges);
    std::vector<double> freqs;
    for (TaskNode& nd : g.nodes) {
      nd.compute_min = rng.uniform(1, 20);
      nd.compute_max = nd.compute_min + rng.uniform(0, 6);
      freqs.push_back(50e6 * static_cast<double>(rng.uniform(1, 8)));
    }
    g.sinks.clear();
    for (const TaskNode& nd : g.nodes) {
      if (nd.produce.empty()) g.sinks.push_back(nd.id);
    }
    REQUIRE_FALSE(g.sinks.empty());
    CAPTURE(trial);

    // Oracle: forward reachability from every node, then a min per sink.
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int v = 0; v < n; ++v) {
      std::vector<int> stack{v};
      reach[v][v] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const Channel& c : g.channels) {
          if (c.src_node == u && !reach[v][c.dst_node]) {
            reach[v][c.dst_node] = 1;
            stack.push_back(c.dst_node);
          }
        }
      }
    }
    std::vector<double> expected;
    for (int s : g.sinks) {
      double rate = std::numeric_limits<double>::infinity();
      for (int v = 0; v < n; ++v) {
        if (reach[v][s]) {
          rate = std::min(rate, freqs[v] / g.nodes[v].expected_cost());
        }
      }
      expected.push_back(rate);
    }
    REQUIRE(gcmp::bottleneck_rate(g, freqs) == expected);
  }
}

TEST_CASE("bottleneck rate rejects graphs it cannot reason about") {
  gcmp::GenParams p;
  p.stages = 3;
  auto [loop, lm] = gcmp::generate(gcmp::GraphKind::IirFeedback, p, 1);
  CHECK_THROWS_AS(gcmp::bottleneck_rate(loop, {1e8, 1e8, 1e8}),
                  std::invalid_argument);

  auto [g, m] = gcmp::generate(gcmp::GraphKind::FirChain, p, 1);
  CHECK_THROWS_AS(gcmp::bottleneck_rate(g, {1e8}), std::invalid_argument);
  g.nodes[1].consume[0] = 2;
  CHECK_THROWS_AS(gcmp::bottleneck_rate(g, {1e8, 1e8, 1e8}),
                  std::invalid_argument);
}

TEST_CASE("kind names round-trip") {
  for (gcmp::GraphKind k :
       {gcmp::GraphKind::FirChain, gcmp::GraphKind::FftDag,
        gcmp::GraphKind::IirFeedback, gcmp::GraphKind::MjpegPipeline,
        gcmp::GraphKind::AdpcmChain, gcmp::GraphKind::Explicit}) {
    CHECK(gcmp::graph_kind_from_name(gcmp::graph_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(gcmp::graph_kind_from_name("fir"), std::invalid_argument);
}

TEST_CASE("serpentine placement is adjacent and on-mesh") {
  for (int n : {1, 2, 5, 9, 12, 16}) {
    const gcmp::Mapping m =
        gcmp::snake_mapping(n, gcmp::Interconnect::PointToPoint, true);
    REQUIRE(static_cast<int>(m.coords.size()) == n);
    std::set<std::pair<int, int>> seen;
    for (int k = 0; k < n; ++k) {
      auto [x, y] = m.coords[k];
      REQUIRE(x >= 0);
      REQUIRE(x < m.mesh_w);
      REQUIRE(y >= 0);
      REQUIRE(y < m.mesh_h);
      REQUIRE(seen.insert({x, y}).second);
      if (k > 0) {
        auto [px, py] = m.coords[k - 1];
        REQUIRE(std::abs(x - px) + std::abs(y - py) == 1);
      }
    }
  }
}
