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

#include "gcmp/taskgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

#include "gcmp/rng.hpp"

namespace gcmp {

namespace {

std::string describe(const Channel& c) {
  return "channel " + std::to_string(c.id);
}

// Vertex-level cycle test; parallel edges collapse but self-loops count.
bool has_cycle(int n, const std::vector<Channel>& channels,
               const std::vector<char>* keep = nullptr) {
  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (keep && !(*keep)[i]) continue;
    const Channel& c = channels[i];
    if (c.src_node == c.dst_node) return true;
    adj[c.src_node].push_back(c.dst_node);
  }
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<char> color(n, 0);
  std::vector<std::pair<int, std::size_t>> stack;
  for (int s = 0; s < n; ++s) {
    if (color[s] != 0) continue;
    color[s] = 1;
    stack.push_back({s, 0});
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < adj[v].size()) {
        int w = adj[v][next++];
        if (color[w] == 1) return true;
        if (color[w] == 0) {
          color[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

// True when every sink is forward-reachable from some node with no inputs.
bool sinks_fed_from_sources(int n, const std::vector<Channel>& channels,
                            const std::vector<char>& keep,
                            const std::vector<int>& sinks) {
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (!keep[i]) continue;
    indeg[channels[i].dst_node]++;
    adj[channels[i].src_node].push_back(channels[i].dst_node);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  for (int v = 0; v < n; ++v) {
    if (indeg[v] == 0) {
      seen[v] = 1;
      q.push(v);
    }
  }
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
    }
  }
  return std::all_of(sinks.begin(), sinks.end(),
                     [&](int s) { return seen[s]; });
}

// Johnson-style elementary circuit enumeration, iterating edges instead of
// neighbor vertices so parallel channels yield distinct circuits.
class CircuitEnumerator {
 public:
  CircuitEnumerator(int n, const std::vector<std::vector<std::pair<int, int>>>& adj,
                    std::size_t max_cycles)
      : n_(n), adj_(adj), max_cycles_(max_cycles), blocked_(n, false),
        b_sets_(n), in_scope_(n, 0) {}

  std::vector<std::vector<int>> run() {
    for (start_ = 0; start_ < n_; ++start_) {
      mark_scc_of_start();
      if (!in_scope_[start_]) continue;
      for (int v = 0; v < n_; ++v) {
        blocked_[v] = false;
        b_sets_[v].clear();
      }
      circuit(start_);
    }
    return std::move(out_);
  }

 private:
  // Restricts the search to the strongly connected component of start_
  // within the subgraph on vertices >= start_; circuits whose least vertex
  // is start_ live entirely inside it.
  void mark_scc_of_start() {
    std::fill(in_scope_.begin(), in_scope_.end(), 0);
    int counter = 0;
    std::vector<int> index(n_, -1), low(n_, 0);
    std::vector<char> on_stack(n_, 0);
    std::vector<int> stack;
    std::vector<int> comp(n_, -1);
    int ncomp = 0;
    std::function<void(int)> strongconnect = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = 1;
      for (const auto& [ch, w] : adj_[v]) {
        if (w < start_) continue;
        if (index[w] < 0) {
          strongconnect(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] == index[v]) {
        while (true) {
          int w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ncomp++;
      }
    };
    for (int v = start_; v < n_; ++v) {
      if (index[v] < 0) strongconnect(v);
    }
    bool nontrivial = false;
    for (int v = start_; v < n_; ++v) {
      if (comp[v] == comp[start_]) {
        in_scope_[v] = 1;
        nontrivial = nontrivial || v != start_;
      }
    }
    if (!nontrivial) {
      bool self_loop = std::any_of(
          adj_[start_].begin(), adj_[start_].end(),
          [&](const std::pair<int, int>& e) { return e.second == start_; });
      if (!self_loop) in_scope_[start_] = 0;
    }
  }

  void unblock(int v) {
    blocked_[v] = false;
    for (int u : b_sets_[v]) {
      if (blocked_[u]) unblock(u);
    }
    b_sets_[v].clear();
  }

  bool circuit(int v) {
    bool found = false;
    blocked_[v] = true;
    for (const auto& [ch, w] : adj_[v]) {
      if (!in_scope_[w]) continue;
      if (w == start_) {
        path_.push_back(ch);
        out_.push_back(path_);
        path_.pop_back();
        if (out_.size() > max_cycles_) {
          throw std::runtime_error(
              "communication loop enumeration exceeded " +
              std::to_string(max_cycles_) + " elementary loops");
        }
        found = true;
      } else if (!blocked_[w]) {
        path_.push_back(ch);
        if (circuit(w)) found = true;
        path_.pop_back();
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (const auto& [ch, w] : adj_[v]) {
        if (!in_scope_[w]) continue;
        auto& b = b_sets_[w];
        if (std::find(b.begin(), b.end(), v) == b.end()) b.push_back(v);
      }
    }
    return found;
  }

  int n_;
  const std::vector<std::vector<std::pair<int, int>>>& adj_;
  std::size_t max_cycles_;
  int start_ = 0;
  std::vector<bool> blocked_;
  std::vector<std::vector<int>> b_sets_;
  std::vector<char> in_scope_;
  std::vector<int> path_;
  std::vector<std::vector<int>> out_;
};

}  // namespace

std::vector<std::string> validate(const TaskGraph& g, const Mapping& m) {
  std::vector<std::string> errs;
  const int n = static_cast<int>(g.nodes.size());
  if (n == 0) {
    errs.push_back("graph has no nodes");
    return errs;
  }
  for (int i = 0; i < n; ++i) {
    const TaskNode& nd = g.nodes[i];
    if (nd.id != i) {
      errs.push_back("node at position " + std::to_string(i) +
                     " has id " + std::to_string(nd.id) +
                     "; node ids must be 0..N-1 in order");
    }
    if (nd.compute_min < 1 || nd.compute_min > nd.compute_max) {
      errs.push_back("node " + std::to_string(nd.id) +
                     ": compute cycles must satisfy 1 <= min <= max");
    }
    for (int r : nd.consume) {
      if (r < 1) {
        errs.push_back("node " + std::to_string(nd.id) +
                       ": consume rates must be >= 1");
        break;
      }
    }
    for (int r : nd.produce) {
      if (r < 1) {
        errs.push_back("node " + std::to_string(nd.id) +
                       ": produce rates must be >= 1");
        break;
      }
    }
  }

  std::set<int> channel_ids;
  std::set<std::pair<int, int>> in_bound, out_bound;
  for (const Channel& c : g.channels) {
    if (!channel_ids.insert(c.id).second) {
      errs.push_back(describe(c) + ": duplicate channel id");
    }
    const bool src_ok = c.src_node >= 0 && c.src_node < n;
    const bool dst_ok = c.dst_node >= 0 && c.dst_node < n;
    if (!src_ok || !dst_ok) {
      errs.push_back(describe(c) + ": endpoint node out of range");
      continue;
    }
    if (c.src_port < 0 ||
        c.src_port >= static_cast<int>(g.nodes[c.src_node].produce.size())) {
      errs.push_back(describe(c) + ": source port out of range");
    } else if (!out_bound.insert({c.src_node, c.src_port}).second) {
      errs.push_back(describe(c) + ": output port of node " +
                     std::to_string(c.src_node) + " bound twice");
    }
    if (c.dst_port < 0 ||
        c.dst_port >= static_cast<int>(g.nodes[c.dst_node].consume.size())) {
      errs.push_back(describe(c) + ": destination port out of range");
    } else if (!in_bound.insert({c.dst_node, c.dst_port}).second) {
      errs.push_back(describe(c) + ": input port of node " +
                     std::to_string(c.dst_node) + " bound twice");
    }
    if (c.capacity < 1) {
      errs.push_back(describe(c) + ": capacity must be >= 1");
    }
    if (c.initial_tokens < 0 || c.initial_tokens > c.capacity) {
      errs.push_back(describe(c) +
                     ": initial tokens must lie in [0, capacity]");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < static_cast<int>(g.nodes[i].consume.size()); ++p) {
      if (!in_bound.count({i, p})) {
        errs.push_back("node " + std::to_string(i) + ": input port " +
                       std::to_string(p) + " has no channel");
      }
    }
    for (int p = 0; p < static_cast<int>(g.nodes[i].produce.size()); ++p) {
      if (!out_bound.count({i, p})) {
        errs.push_back("node " + std::to_string(i) + ": output port " +
                       std::to_string(p) + " has no channel");
      }
    }
  }

  if (g.sinks.empty()) {
    errs.push_back("graph declares no sink nodes");
  }
  std::set<int> sink_set;
  for (int s : g.sinks) {
    if (s < 0 || s >= n) {
      errs.push_back("sink id " + std::to_string(s) + " out of range");
    } else if (!sink_set.insert(s).second) {
      errs.push_back("sink id " + std::to_string(s) + " listed twice");
    }
  }

  if (static_cast<int>(m.coords.size()) != n) {
    errs.push_back("mapping covers " + std::to_string(m.coords.size()) +
                   " nodes, graph has " + std::to_string(n));
    return errs;
  }
  if (m.mesh_w < 1 || m.mesh_h < 1) {
    errs.push_back("mesh dimensions must be positive");
    return errs;
  }
  std::set<std::pair<int, int>> used;
  for (int i = 0; i < n; ++i) {
    auto [x, y] = m.coords[i];
    if (x < 0 || x >= m.mesh_w || y < 0 || y >= m.mesh_h) {
      errs.push_back("node " + std::to_string(i) + " placed off-mesh");
    } else if (!used.insert({x, y}).second) {
      errs.push_back("two nodes share mesh tile (" + std::to_string(x) + "," +
                     std::to_string(y) + ")");
    }
  }
  if (m.adjacency_check) {
    for (const Channel& c : g.channels) {
      if (c.src_node < 0 || c.src_node >= n || c.dst_node < 0 ||
          c.dst_node >= n) {
        continue;
      }
      auto [ax, ay] = m.coords[c.src_node];
      auto [bx, by] = m.coords[c.dst_node];
      const int dist = std::abs(ax - bx) + std::abs(ay - by);
      if (dist > 1) {
        errs.push_back(describe(c) + ": endpoints are " +
                       std::to_string(dist) +
                       " hops apart but adjacency is required");
      }
    }
  }
  return errs;
}

std::vector<std::vector<int>> detect_comm_loops(const TaskGraph& g,
                                                std::size_t max_cycles) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (const Channel& c : g.channels) {
    adj[c.src_node].push_back({c.id, c.dst_node});
  }
  auto out = CircuitEnumerator(n, adj, max_cycles).run();
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Removes the given channels and compacts the freed port indices so every
// remaining port stays bound.
TaskGraph strip_channels(const TaskGraph& g, const std::set<int>& removed) {
  TaskGraph out;
  out.nodes = g.nodes;
  out.sinks = g.sinks;
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> gone_in(n), gone_out(n);
  for (const Channel& c : g.channels) {
    if (removed.count(c.id)) {
      gone_in[c.dst_node].push_back(c.dst_port);
      gone_out[c.src_node].push_back(c.src_port);
    }
  }
  for (int v = 0; v < n; ++v) {
    std::sort(gone_in[v].rbegin(), gone_in[v].rend());
    for (int p : gone_in[v]) {
      out.nodes[v].consume.erase(out.nodes[v].consume.begin() + p);
    }
    std::sort(gone_out[v].rbegin(), gone_out[v].rend());
    for (int p : gone_out[v]) {
      out.nodes[v].produce.erase(out.nodes[v].produce.begin() + p);
    }
  }
  auto shift = [](const std::vector<int>& gone, int port) {
    int below = 0;
    for (int p : gone) {
      if (p < port) below++;
    }
    return port - below;
  };
  for (const Channel& c : g.channels) {
    if (removed.count(c.id)) continue;
    Channel kept = c;
    kept.src_port = shift(gone_out[c.src_node], c.src_port);
    kept.dst_port = shift(gone_in[c.dst_node], c.dst_port);
    out.channels.push_back(kept);
  }
  return out;
}

}  // namespace

std::pair<TaskGraph, std::vector<int>> remove_feedback_channels(
    const TaskGraph& g) {
  const int n = static_cast<int>(g.nodes.size());
  const auto loops = detect_comm_loops(g);
  std::vector<char> keep(g.channels.size(), 1);
  std::map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < g.channels.size(); ++i) {
    index_of[g.channels[i].id] = i;
  }

  std::vector<int> removed;
  std::vector<const std::vector<int>*> live;
  for (const auto& loop : loops) live.push_back(&loop);
  while (!live.empty()) {
    std::map<int, int> count;
    for (const auto* loop : live) {
      for (int ch : *loop) count[ch]++;
    }
    int best = 0;
    for (const auto& [ch, c] : count) best = std::max(best, c);
    std::vector<int> candidates;
    for (const auto& [ch, c] : count) {
      if (c == best) candidates.push_back(ch);
    }
    // Prefer a candidate whose removal keeps every sink fed; if none does,
    // the lowest id wins anyway.
    int pick = candidates.front();
    for (int ch : candidates) {
      keep[index_of[ch]] = 0;
      const bool ok = sinks_fed_from_sources(n, g.channels, keep, g.sinks);
      keep[index_of[ch]] = 1;
      if (ok) {
        pick = ch;
        break;
      }
    }
    keep[index_of[pick]] = 0;
    removed.push_back(pick);
    std::vector<const std::vector<int>*> next;
    for (const auto* loop : live) {
      if (std::find(loop->begin(), loop->end(), pick) == loop->end()) {
        next.push_back(loop);
      }
    }
    live = std::move(next);
  }

  // The greedy cover can overshoot; give back any channel the final
  // acyclicity does not actually need.
  for (auto it = removed.begin(); it != removed.end();) {
    keep[index_of[*it]] = 1;
    if (has_cycle(n, g.channels, &keep)) {
      keep[index_of[*it]] = 0;
      ++it;
    } else {
      it = removed.erase(it);
    }
  }

  std::set<int> removed_set(removed.begin(), removed.end());
  TaskGraph out = strip_channels(g, removed_set);
  std::sort(removed.begin(), removed.end());
  return {std::move(out), std::move(removed)};
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("graph generation: " + what);
}

struct Builder {
  TaskGraph g;

  int add_node(std::int64_t cmin, std::int64_t cmax, std::uint64_t seed) {
    TaskNode nd;
    nd.id = static_cast<int>(g.nodes.size());
    nd.compute_min = cmin;
    nd.compute_max = cmax;
    nd.seed = seed;
    g.nodes.push_back(nd);
    return nd.id;
  }

  void connect(int src, int dst, int capacity, int initial = 0) {
    Channel c;
    c.id = static_cast<int>(g.channels.size());
    c.src_node = src;
    c.src_port = static_cast<int>(g.nodes[src].produce.size());
    c.dst_node = dst;
    c.dst_port = static_cast<int>(g.nodes[dst].consume.size());
    c.capacity = capacity;
    c.initial_tokens = initial;
    g.nodes[src].produce.push_back(1);
    g.nodes[dst].consume.push_back(1);
    g.channels.push_back(c);
  }
};

}  // namespace

Mapping snake_mapping(int n, Interconnect ic, bool adjacency_check) {
  Mapping m;
  m.mesh_w = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  m.mesh_h = (n + m.mesh_w - 1) / m.mesh_w;
  for (int k = 0; k < n; ++k) {
    const int row = k / m.mesh_w;
    int col = k % m.mesh_w;
    if (row % 2 == 1) col = m.mesh_w - 1 - col;
    m.coords.push_back({col, row});
  }
  m.interconnect = ic;
  m.adjacency_check = adjacency_check;
  return m;
}

std::pair<TaskGraph, Mapping> generate(GraphKind kind, const GenParams& p,
                                       std::uint64_t seed) {
  require(p.copies >= 1, "copies must be >= 1");
  require(p.cycles >= 1, "cycles must be >= 1");
  require(p.cycles_min >= 1 && p.cycles_min <= p.cycles_max,
          "cycle range must satisfy 1 <= min <= max");
  require(p.capacity >= 1, "capacity must be >= 1");

  Builder b;
  bool adjacency = false;
  for (int copy = 0; copy < p.copies; ++copy) {
    switch (kind) {
      case GraphKind::FirChain: {
        require(p.stages >= 1, "fir_chain needs stages >= 1");
        adjacency = true;
        int prev = -1;
        for (int s = 0; s < p.stages; ++s) {
          int id = b.add_node(p.cycles, p.cycles, 0);
          if (prev >= 0) b.connect(prev, id, p.capacity);
          prev = id;
        }
        b.g.sinks.push_back(prev);
        break;
      }
      case GraphKind::AdpcmChain: {
        adjacency = true;
        // Encode costs the full budget, decode half: the stages of this
        // codec are deliberately unbalanced so per-PE slack exists.
        const std::int64_t dec = std::max<std::int64_t>(1, p.cycles / 2);
        int a = b.add_node(p.cycles, p.cycles, 0);
        int c = b.add_node(dec, dec, 0);
        b.connect(a, c, p.capacity);
        b.g.sinks.push_back(c);
        break;
      }
      case GraphKind::MjpegPipeline: {
        adjacency = true;
        int prev = -1;
        for (int s = 0; s < 4; ++s) {
          int id = b.add_node(p.cycles_min, p.cycles_max, 0);
          if (prev >= 0) b.connect(prev, id, p.capacity);
          prev = id;
        }
        b.g.sinks.push_back(prev);
        break;
      }
      case GraphKind::IirFeedback: {
        require(p.stages >= 2, "iir_feedback needs stages >= 2");
        int first = -1, prev = -1;
        for (int s = 0; s < p.stages; ++s) {
          int id = b.add_node(p.cycles, p.cycles, 0);
          if (prev >= 0) b.connect(prev, id, p.capacity);
          if (first < 0) first = id;
          prev = id;
        }
        // The loop-carried state: one token seeds the recurrence.
        b.connect(prev, first, p.capacity, 1);
        b.g.sinks.push_back(prev);
        break;
      }
      case GraphKind::FftDag: {
        require(p.points >= 2 && (p.points & (p.points - 1)) == 0,
                "fft_dag needs a power-of-two point count");
        const int source = b.add_node(p.cycles, p.cycles, 0);
        std::vector<int> level;
        for (int i = 0; i < p.points / 2; ++i) {
          int id = b.add_node(p.cycles, p.cycles, 0);
          b.connect(source, id, p.capacity);
          level.push_back(id);
        }
        while (level.size() > 1) {
          std::vector<int> next;
          for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            int id = b.add_node(p.cycles, p.cycles, 0);
            b.connect(level[i], id, p.capacity);
            b.connect(level[i + 1], id, p.capacity);
            next.push_back(id);
          }
          level = std::move(next);
        }
        b.g.sinks.push_back(level.front());
        break;
      }
      case GraphKind::Explicit:
        throw std::invalid_argument(
            "explicit graphs are described in scenario files, not generated");
    }
  }
  for (TaskNode& nd : b.g.nodes) {
    nd.seed = mix_seed(seed, static_cast<std::uint64_t>(nd.id));
  }
  Mapping m = snake_mapping(static_cast<int>(b.g.nodes.size()),
                            Interconnect::PointToPoint, adjacency);
  auto errs = validate(b.g, m);
  if (!errs.empty()) {
    throw std::logic_error("generated graph failed validation: " + errs[0]);
  }
  return {std::move(b.g), std::move(m)};
}

std::vector<double> bottleneck_rate(const TaskGraph& g,
                                    const std::vector<double>& freq_per_node) {
  const int n = static_cast<int>(g.nodes.size());
  if (static_cast<int>(freq_per_node.size()) != n) {
    throw std::invalid_argument("bottleneck_rate: one frequency per node");
  }
  if (has_cycle(n, g.channels)) {
    throw std::invalid_argument(
        "bottleneck_rate is defined for acyclic graphs");
  }
  for (const TaskNode& nd : g.nodes) {
    for (int r : nd.consume) {
      if (r != 1) {
        throw std::invalid_argument("bottleneck_rate needs unit port rates");
      }
    }
    for (int r : nd.produce) {
      if (r != 1) {
        throw std::invalid_argument("bottleneck_rate needs unit port rates");
      }
    }
  }
  std::vector<std::vector<int>> preds(n);
  for (const Channel& c : g.channels) {
    preds[c.dst_node].push_back(c.src_node);
  }
  std::vector<double> out;
  for (int sink : g.sinks) {
    double rate = std::numeric_limits<double>::infinity();
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(sink);
    seen[sink] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      rate = std::min(rate, freq_per_node[v] / g.nodes[v].expected_cost());
      for (int u : preds[v]) {
        if (!seen[u]) {
          seen[u] = 1;
          q.push(u);
        }
      }
    }
    out.push_back(rate);
  }
  return out;
}

const char* graph_kind_name(GraphKind k) {
  switch (k) {
    case GraphKind::FirChain: return "fir_chain";
    case GraphKind::FftDag: return "fft_dag";
    case GraphKind::IirFeedback: return "iir_feedback";
    case GraphKind::MjpegPipeline: return "mjpeg_pipeline";
    case GraphKind::AdpcmChain: return "adpcm_chain";
    case GraphKind::Explicit: return "explicit";
  }
  return "unknown";
}

GraphKind graph_kind_from_name(const std::string& name) {
  for (GraphKind k :
       {GraphKind::FirChain, GraphKind::FftDag, GraphKind::IirFeedback,
        GraphKind::MjpegPipeline, GraphKind::AdpcmChain, GraphKind::Explicit}) {
    if (name == graph_kind_name(k)) return k;
  }
  throw std::invalid_argument("unknown graph kind '" + name + "'");
}

}  // namespace gcmp
