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

#include "gcmp/scenario.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace gcmp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& v) {
  std::istringstream in(v);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& v, int line) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ScenarioError(line, "expected a number, got '" + v + "'");
  }
  return x;
}

std::int64_t parse_int(const std::string& v, int line) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ScenarioError(line, "expected an integer, got '" + v + "'");
  }
  return x;
}

std::uint64_t parse_uint(const std::string& v, int line) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v.front() == '-' || end != v.c_str() + v.size() ||
      errno == ERANGE) {
    throw ScenarioError(line, "expected a non-negative integer, got '" + v +
                                  "'");
  }
  return x;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ScenarioError(line, "expected true or false, got '" + v + "'");
}

// Bare integers are femtoseconds; an s/ms/us/ns suffix switches to seconds.
SimTime parse_time(const std::string& v, int line) {
  static const std::pair<const char*, double> suffixes[] = {
      {"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}};
  for (const auto& [suf, mult] : suffixes) {
    const std::size_t len = std::string(suf).size();
    if (v.size() > len && v.compare(v.size() - len, len, suf) == 0) {
      return from_seconds(parse_double(v.substr(0, v.size() - len), line) *
                          mult);
    }
  }
  return parse_int(v, line);
}

std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  for (const std::string& f : split_fields(v)) {
    out.push_back(parse_double(f, line));
  }
  return out;
}

GraphKind parse_kind(const std::string& v, int line) {
  static const std::map<std::string, GraphKind> m = {
      {"fir_chain", GraphKind::FirChain},
      {"fft_dag", GraphKind::FftDag},
      {"iir_feedback", GraphKind::IirFeedback},
      {"mjpeg_pipeline", GraphKind::MjpegPipeline},
      {"adpcm_chain", GraphKind::AdpcmChain},
      {"explicit", GraphKind::Explicit}};
  auto it = m.find(v);
  if (it == m.end()) throw ScenarioError(line, "unknown graph kind '" + v + "'");
  return it->second;
}

GovernorKind parse_gov_kind(const std::string& v, int line) {
  static const std::map<std::string, GovernorKind> m = {
      {"none", GovernorKind::None},
      {"static", GovernorKind::Static},
      {"pid", GovernorKind::Pid},
      {"ondemand", GovernorKind::OnDemand},
      {"conservative", GovernorKind::Conservative}};
  auto it = m.find(v);
  if (it == m.end()) {
    throw ScenarioError(line, "unknown governor kind '" + v + "'");
  }
  return it->second;
}

const char* gov_kind_name(GovernorKind k) {
  switch (k) {
    case GovernorKind::None: return "none";
    case GovernorKind::Static: return "static";
    case GovernorKind::Pid: return "pid";
    case GovernorKind::OnDemand: return "ondemand";
    case GovernorKind::Conservative: return "conservative";
  }
  return "unknown";
}

InitialLevel parse_initial(const std::string& v, int line) {
  static const std::map<std::string, InitialLevel> m = {
      {"given", InitialLevel::Given},
      {"min", InitialLevel::Min},
      {"max", InitialLevel::Max},
      {"nominal", InitialLevel::Nominal}};
  auto it = m.find(v);
  if (it == m.end()) {
    throw ScenarioError(line, "unknown initial level '" + v + "'");
  }
  return it->second;
}

const char* initial_name(InitialLevel l) {
  switch (l) {
    case InitialLevel::Given: return "given";
    case InitialLevel::Min: return "min";
    case InitialLevel::Max: return "max";
    case InitialLevel::Nominal: return "nominal";
  }
  return "unknown";
}

struct Entry {
  int line = 0;
  std::string section;
  std::string key;
  int suffix = -1;  // -1 = no .N suffix
  std::string value;
};

std::vector<Entry> parse_entries(const std::string& text) {
  static const std::set<std::string> sections = {
      "graph", "mesh", "clocks", "channels", "governor", "power", "sim"};
  std::vector<Entry> out;
  std::istringstream in(text);
  std::string raw;
  std::string cur;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) {
        throw ScenarioError(line, "malformed section header '" + s + "'");
      }
      cur = trim(s.substr(1, s.size() - 2));
      if (!sections.count(cur)) {
        throw ScenarioError(line, "unknown section [" + cur + "]");
      }
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ScenarioError(line, "expected key = value, got '" + s + "'");
    }
    if (cur.empty()) {
      throw ScenarioError(line, "key appears before any [section]");
    }
    Entry e;
    e.line = line;
    e.section = cur;
    e.key = trim(s.substr(0, eq));
    e.value = trim(s.substr(eq + 1));
    if (e.key.empty()) throw ScenarioError(line, "empty key");
    const std::size_t dot = e.key.find('.');
    if (dot != std::string::npos) {
      const std::string idx = e.key.substr(dot + 1);
      e.key.resize(dot);
      e.suffix = static_cast<int>(parse_uint(idx, line));
    }
    out.push_back(std::move(e));
  }
  return out;
}

[[noreturn]] void unknown_key(const Entry& e) {
  throw ScenarioError(e.line,
                      "unknown key '" + e.key + "' in [" + e.section + "]");
}

void require_fields(const Entry& e, std::size_t got, std::size_t a,
                    std::size_t b, const char* usage) {
  if (got != a && got != b) {
    throw ScenarioError(e.line, std::string("expected ") + usage);
  }
}

// ---------------------------------------------------------------- loading

struct GraphLines {
  struct Node {
    int line;
    std::int64_t cmin, cmax;
    std::uint64_t seed;
    bool has_seed;
  };
  struct Chan {
    int line;
    int id, src, src_port, dst, dst_port, capacity, initial;
  };
  struct Rate {
    int line;
    int node, port, rate;
    bool consume;
  };
  std::vector<Node> nodes;
  std::vector<Chan> chans;
  std::vector<Rate> rates;
  std::vector<std::pair<int, int>> sinks;  // line, node
  int first_line = 0;                      // first explicit-only line seen
};

void apply_graph_entry(const Entry& e, GraphSpec& spec, GraphLines& gl,
                       bool& kind_seen) {
  if (e.suffix >= 0) {
    throw ScenarioError(e.line, "[graph] keys take no index suffix");
  }
  GenParams& p = spec.params;
  if (e.key == "kind") {
    spec.kind = parse_kind(e.value, e.line);
    kind_seen = true;
  } else if (e.key == "stages") {
    p.stages = static_cast<int>(parse_int(e.value, e.line));
  } else if (e.key == "points") {
    p.points = static_cast<int>(parse_int(e.value, e.line));
  } else if (e.key == "copies") {
    p.copies = static_cast<int>(parse_int(e.value, e.line));
  } else if (e.key == "cycles") {
    p.cycles = parse_int(e.value, e.line);
  } else if (e.key == "cycles_min") {
    p.cycles_min = parse_int(e.value, e.line);
  } else if (e.key == "cycles_max") {
    p.cycles_max = parse_int(e.value, e.line);
  } else if (e.key == "capacity") {
    p.capacity = static_cast<int>(parse_int(e.value, e.line));
  } else if (e.key == "remove_feedback") {
    spec.remove_feedback = parse_bool(e.value, e.line);
  } else if (e.key == "node") {
    const auto f = split_fields(e.value);
    require_fields(e, f.size(), 2, 3,
                   "node = <compute_min> <compute_max> [<seed>]");
    GraphLines::Node nd{e.line, parse_int(f[0], e.line),
                        parse_int(f[1], e.line), 0, f.size() == 3};
    if (nd.has_seed) nd.seed = parse_uint(f[2], e.line);
    gl.nodes.push_back(nd);
    if (!gl.first_line) gl.first_line = e.line;
  } else if (e.key == "channel") {
    const auto f = split_fields(e.value);
    require_fields(e, f.size(), 5, 7,
                   "channel = <id> <src> <src_port> <dst> <dst_port> "
                   "[<capacity> <initial_tokens>]");
    GraphLines::Chan c{e.line,
                       static_cast<int>(parse_int(f[0], e.line)),
                       static_cast<int>(parse_int(f[1], e.line)),
                       static_cast<int>(parse_int(f[2], e.line)),
                       static_cast<int>(parse_int(f[3], e.line)),
                       static_cast<int>(parse_int(f[4], e.line)),
                       32,
                       0};
    if (f.size() == 7) {
      c.capacity = static_cast<int>(parse_int(f[5], e.line));
      c.initial = static_cast<int>(parse_int(f[6], e.line));
    }
    gl.chans.push_back(c);
    if (!gl.first_line) gl.first_line = e.line;
  } else if (e.key == "sink") {
    gl.sinks.push_back({e.line, static_cast<int>(parse_int(e.value, e.line))});
    if (!gl.first_line) gl.first_line = e.line;
  } else if (e.key == "consume_rate" || e.key == "produce_rate") {
    const auto f = split_fields(e.value);
    require_fields(e, f.size(), 3, 3, "rate = <node> <port> <rate>");
    gl.rates.push_back({e.line, static_cast<int>(parse_int(f[0], e.line)),
                        static_cast<int>(parse_int(f[1], e.line)),
                        static_cast<int>(parse_int(f[2], e.line)),
                        e.key == "consume_rate"});
    if (!gl.first_line) gl.first_line = e.line;
  } else {
    unknown_key(e);
  }
}

TaskGraph build_explicit(const GraphLines& gl) {
  TaskGraph g;
  if (gl.nodes.empty()) {
    throw ScenarioError(0, "an explicit graph needs at least one node line");
  }
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    TaskNode nd;
    nd.id = static_cast<int>(i);
    nd.compute_min = gl.nodes[i].cmin;
    nd.compute_max = gl.nodes[i].cmax;
    nd.seed = gl.nodes[i].has_seed ? gl.nodes[i].seed
                                   : static_cast<std::uint64_t>(i);
    g.nodes.push_back(nd);
  }
  const int n = static_cast<int>(g.nodes.size());
  for (const auto& c : gl.chans) {
    if (c.src < 0 || c.src >= n || c.dst < 0 || c.dst >= n) {
      throw ScenarioError(c.line, "channel endpoint node out of range");
    }
    if (c.src_port < 0 || c.dst_port < 0) {
      throw ScenarioError(c.line, "channel ports must be >= 0");
    }
    Channel ch;
    ch.id = c.id;
    ch.src_node = c.src;
    ch.src_port = c.src_port;
    ch.dst_node = c.dst;
    ch.dst_port = c.dst_port;
    ch.capacity = c.capacity;
    ch.initial_tokens = c.initial;
    g.channels.push_back(ch);
    auto& produce = g.nodes[c.src].produce;
    if (static_cast<int>(produce.size()) <= c.src_port) {
      produce.resize(c.src_port + 1, 1);
    }
    auto& consume = g.nodes[c.dst].consume;
    if (static_cast<int>(consume.size()) <= c.dst_port) {
      consume.resize(c.dst_port + 1, 1);
    }
  }
  for (const auto& r : gl.rates) {
    if (r.node < 0 || r.node >= n) {
      throw ScenarioError(r.line, "rate node out of range");
    }
    auto& ports = r.consume ? g.nodes[r.node].consume : g.nodes[r.node].produce;
    if (r.port < 0 || r.port >= static_cast<int>(ports.size())) {
      throw ScenarioError(r.line, "rate port is not bound by any channel");
    }
    ports[r.port] = r.rate;
  }
  if (gl.sinks.empty()) {
    for (const TaskNode& nd : g.nodes) {
      if (nd.produce.empty()) g.sinks.push_back(nd.id);
    }
  } else {
    for (const auto& [line, sink] : gl.sinks) {
      if (sink < 0 || sink >= n) {
        throw ScenarioError(line, "sink node out of range");
      }
      g.sinks.push_back(sink);
    }
  }
  return g;
}

}  // namespace

Scenario load_scenario(const std::string& text) {
  const std::vector<Entry> entries = parse_entries(text);
  Scenario s;

  // [sim] first: the seed participates in graph generation.
  for (const Entry& e : entries) {
    if (e.section != "sim") continue;
    if (e.suffix >= 0) {
      throw ScenarioError(e.line, "[sim] keys take no index suffix");
    }
    if (e.key == "name") {
      s.name = e.value;
    } else if (e.key == "duration") {
      s.duration = parse_time(e.value, e.line);
    } else if (e.key == "warmup") {
      s.warmup = parse_time(e.value, e.line);
    } else if (e.key == "seed") {
      s.seed = parse_uint(e.value, e.line);
    } else {
      unknown_key(e);
    }
  }

  GraphLines gl;
  bool kind_seen = false;
  for (const Entry& e : entries) {
    if (e.section == "graph") apply_graph_entry(e, s.spec, gl, kind_seen);
  }
  if (s.spec.kind == GraphKind::Explicit) {
    s.graph = build_explicit(gl);
    s.mapping = snake_mapping(static_cast<int>(s.graph.nodes.size()),
                              Interconnect::PointToPoint, false);
  } else {
    if (gl.first_line) {
      throw ScenarioError(gl.first_line,
                          "node/channel/sink lines require kind = explicit");
    }
    try {
      auto [g, m] = generate(s.spec.kind, s.spec.params, s.seed);
      s.graph = std::move(g);
      s.mapping = std::move(m);
    } catch (const std::invalid_argument& ex) {
      throw ScenarioError(0, ex.what());
    }
  }
  if (s.spec.remove_feedback) {
    s.graph = remove_feedback_channels(s.graph).first;
  }
  const int n = static_cast<int>(s.graph.nodes.size());

  // [mesh]
  bool coords_given = false;
  int width = 0, height = 0;
  std::vector<std::tuple<int, int, int, int>> coord_lines;  // line, node, x, y
  for (const Entry& e : entries) {
    if (e.section != "mesh") continue;
    if (e.suffix >= 0) {
      throw ScenarioError(e.line, "[mesh] keys take no index suffix");
    }
    const bool placement =
        e.key == "width" || e.key == "height" || e.key == "coord";
    if (placement && s.spec.kind != GraphKind::Explicit) {
      throw ScenarioError(e.line,
                          "generated graphs define their own placement");
    }
    if (e.key == "interconnect") {
      if (e.value == "p2p") {
        s.mapping.interconnect = Interconnect::PointToPoint;
      } else if (e.value == "bus") {
        s.mapping.interconnect = Interconnect::SharedBus;
      } else {
        throw ScenarioError(e.line, "interconnect must be p2p or bus");
      }
    } else if (e.key == "adjacency_check") {
      s.mapping.adjacency_check = parse_bool(e.value, e.line);
    } else if (e.key == "bus_freq") {
      s.bus.freq = parse_double(e.value, e.line);
    } else if (e.key == "bus_cycles_per_transfer") {
      s.bus.cycles_per_transfer =
          static_cast<int>(parse_int(e.value, e.line));
    } else if (e.key == "width") {
      width = static_cast<int>(parse_int(e.value, e.line));
    } else if (e.key == "height") {
      height = static_cast<int>(parse_int(e.value, e.line));
    } else if (e.key == "coord") {
      const auto f = split_fields(e.value);
      require_fields(e, f.size(), 3, 3, "coord = <node> <x> <y>");
      const int node = static_cast<int>(parse_int(f[0], e.line));
      if (node < 0 || node >= n) {
        throw ScenarioError(e.line, "coord node out of range");
      }
      coord_lines.push_back({e.line, node,
                             static_cast<int>(parse_int(f[1], e.line)),
                             static_cast<int>(parse_int(f[2], e.line))});
      coords_given = true;
    } else {
      unknown_key(e);
    }
  }
  if (width > 0 || height > 0) {
    Mapping m = s.mapping;
    m.mesh_w = width > 0 ? width : m.mesh_w;
    m.mesh_h = height > 0 ? height : (n + m.mesh_w - 1) / m.mesh_w;
    if (!coords_given) {
      Mapping snake = snake_mapping(n, m.interconnect, m.adjacency_check);
      // Recompute the serpentine for the requested width.
      snake.mesh_w = m.mesh_w;
      snake.mesh_h = m.mesh_h;
      snake.coords.clear();
      for (int k = 0; k < n; ++k) {
        const int row = k / m.mesh_w;
        int col = k % m.mesh_w;
        if (row % 2 == 1) col = m.mesh_w - 1 - col;
        snake.coords.push_back({col, row});
      }
      m.coords = snake.coords;
    }
    s.mapping.mesh_w = m.mesh_w;
    s.mapping.mesh_h = m.mesh_h;
    if (!coords_given) s.mapping.coords = m.coords;
  }
  for (const auto& [line, node, x, y] : coord_lines) {
    s.mapping.coords[node] = {x, y};
  }

  // Per-node and per-channel vectors, then the remaining sections.
  s.clocks.assign(n, ClockConfig{});
  s.governors.assign(n, GovernorConfig{});
  s.sync_stages.assign(s.graph.channels.size(), 2);

  std::map<int, int> chan_pos;
  for (std::size_t c = 0; c < s.graph.channels.size(); ++c) {
    chan_pos[s.graph.channels[c].id] = static_cast<int>(c);
  }
  auto chan_at = [&](const Entry& e) {
    auto it = chan_pos.find(e.suffix);
    if (it == chan_pos.end()) {
      throw ScenarioError(e.line,
                          "no channel with id " + std::to_string(e.suffix));
    }
    return it->second;
  };
  auto node_at = [&](const Entry& e) {
    if (e.suffix >= n) {
      throw ScenarioError(e.line,
                          "no node with id " + std::to_string(e.suffix));
    }
    return e.suffix;
  };

  for (const int pass : {0, 1}) {
    for (const Entry& e : entries) {
      if (e.section != "channels") continue;
      if ((e.suffix >= 0 ? 1 : 0) != pass) continue;
      if (e.key == "stages") {
        const int v = static_cast<int>(parse_int(e.value, e.line));
        if (pass == 0) {
          std::fill(s.sync_stages.begin(), s.sync_stages.end(), v);
        } else {
          s.sync_stages[chan_at(e)] = v;
        }
      } else if (e.key == "capacity") {
        const int v = static_cast<int>(parse_int(e.value, e.line));
        if (pass == 0) {
          for (Channel& c : s.graph.channels) c.capacity = v;
        } else {
          s.graph.channels[chan_at(e)].capacity = v;
        }
      } else if (e.key == "initial") {
        const int v = static_cast<int>(parse_int(e.value, e.line));
        if (pass == 0) {
          for (Channel& c : s.graph.channels) c.initial_tokens = v;
        } else {
          s.graph.channels[chan_at(e)].initial_tokens = v;
        }
      } else {
        unknown_key(e);
      }
    }
  }

  for (const int pass : {0, 1}) {
    for (const Entry& e : entries) {
      if (e.section != "clocks") continue;
      if ((e.suffix >= 0 ? 1 : 0) != pass) continue;
      auto set = [&](auto member, auto value) {
        if (pass == 0) {
          for (ClockConfig& c : s.clocks) c.*member = value;
        } else {
          s.clocks[node_at(e)].*member = value;
        }
      };
      if (e.key == "freq") {
        set(&ClockConfig::freq, parse_double(e.value, e.line));
      } else if (e.key == "phase") {
        set(&ClockConfig::phase, parse_time(e.value, e.line));
      } else if (e.key == "levels") {
        set(&ClockConfig::levels, parse_double_list(e.value, e.line));
      } else if (e.key == "f_min") {
        set(&ClockConfig::f_min, parse_double(e.value, e.line));
      } else if (e.key == "f_max") {
        set(&ClockConfig::f_max, parse_double(e.value, e.line));
      } else {
        unknown_key(e);
      }
    }
  }

  for (const int pass : {0, 1}) {
    for (const Entry& e : entries) {
      if (e.section != "governor") continue;
      if ((e.suffix >= 0 ? 1 : 0) != pass) continue;
      auto set = [&](auto member, auto value) {
        if (pass == 0) {
          for (GovernorConfig& g : s.governors) g.*member = value;
        } else {
          s.governors[node_at(e)].*member = value;
        }
      };
      if (e.key == "kind") {
        set(&GovernorConfig::kind, parse_gov_kind(e.value, e.line));
      } else if (e.key == "setpoint") {
        set(&GovernorConfig::setpoint, parse_double(e.value, e.line));
      } else if (e.key == "kp") {
        set(&GovernorConfig::kp, parse_double(e.value, e.line));
      } else if (e.key == "ki") {
        set(&GovernorConfig::ki, parse_double(e.value, e.line));
      } else if (e.key == "kd") {
        set(&GovernorConfig::kd, parse_double(e.value, e.line));
      } else if (e.key == "window") {
        set(&GovernorConfig::window, parse_time(e.value, e.line));
      } else if (e.key == "up_threshold") {
        set(&GovernorConfig::up_threshold, parse_double(e.value, e.line));
      } else if (e.key == "down_threshold") {
        set(&GovernorConfig::down_threshold, parse_double(e.value, e.line));
      } else if (e.key == "f_nominal") {
        set(&GovernorConfig::f_nominal, parse_double(e.value, e.line));
      } else if (e.key == "initial") {
        set(&GovernorConfig::initial, parse_initial(e.value, e.line));
      } else {
        unknown_key(e);
      }
    }
  }

  for (const Entry& e : entries) {
    if (e.section != "power") continue;
    if (e.suffix >= 0) {
      throw ScenarioError(e.line, "[power] keys take no index suffix");
    }
    if (e.key == "alpha_c") {
      s.power.alpha_c = parse_double(e.value, e.line);
    } else if (e.key == "v_min") {
      s.power.v_min = parse_double(e.value, e.line);
    } else if (e.key == "v_max") {
      s.power.v_max = parse_double(e.value, e.line);
    } else if (e.key == "f_min") {
      s.power.f_min = parse_double(e.value, e.line);
    } else if (e.key == "f_max") {
      s.power.f_max = parse_double(e.value, e.line);
    } else if (e.key == "leakage") {
      s.power.leakage = parse_double(e.value, e.line);
    } else {
      unknown_key(e);
    }
  }

  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(0, "cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

namespace {

// ------------------------------------------------------------- serializing

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void kv(std::string& out, const std::string& key, const std::string& value) {
  out += key;
  out += " = ";
  out += value;
  out += "\n";
}

std::string join_g17(const std::vector<double>& xs) {
  std::string v;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) v += ' ';
    v += g17(xs[i]);
  }
  return v;
}

// Emits one uniform line when the projected value is shared by all indices,
// otherwise one suffixed line per index.
template <class T, class Proj, class Fmt>
void emit_field(std::string& out, const std::string& key,
                const std::vector<T>& xs, Proj proj, Fmt fmt) {
  if (xs.empty()) return;
  bool uniform = true;
  for (const T& x : xs) {
    if (!(proj(x) == proj(xs.front()))) {
      uniform = false;
      break;
    }
  }
  if (uniform) {
    kv(out, key, fmt(proj(xs.front())));
  } else {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      kv(out, key + "." + std::to_string(i), fmt(proj(xs[i])));
    }
  }
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  const int n = static_cast<int>(s.graph.nodes.size());
  std::string out;
  auto fmt_d = [](double x) { return g17(x); };
  auto fmt_t = [](SimTime t) { return std::to_string(t); };

  out += "[graph]\n";
  kv(out, "kind", graph_kind_name(s.spec.kind));
  kv(out, "stages", std::to_string(s.spec.params.stages));
  kv(out, "points", std::to_string(s.spec.params.points));
  kv(out, "copies", std::to_string(s.spec.params.copies));
  kv(out, "cycles", std::to_string(s.spec.params.cycles));
  kv(out, "cycles_min", std::to_string(s.spec.params.cycles_min));
  kv(out, "cycles_max", std::to_string(s.spec.params.cycles_max));
  kv(out, "capacity", std::to_string(s.spec.params.capacity));
  kv(out, "remove_feedback", s.spec.remove_feedback ? "true" : "false");

  std::vector<std::pair<int, std::string>> channel_overrides;
  if (s.spec.kind == GraphKind::Explicit) {
    for (const TaskNode& nd : s.graph.nodes) {
      kv(out, "node",
         std::to_string(nd.compute_min) + " " + std::to_string(nd.compute_max) +
             " " + std::to_string(nd.seed));
    }
    for (const Channel& c : s.graph.channels) {
      kv(out, "channel",
         std::to_string(c.id) + " " + std::to_string(c.src_node) + " " +
             std::to_string(c.src_port) + " " + std::to_string(c.dst_node) +
             " " + std::to_string(c.dst_port) + " " +
             std::to_string(c.capacity) + " " +
             std::to_string(c.initial_tokens));
    }
    for (const TaskNode& nd : s.graph.nodes) {
      for (std::size_t p = 0; p < nd.consume.size(); ++p) {
        if (nd.consume[p] != 1) {
          kv(out, "consume_rate",
             std::to_string(nd.id) + " " + std::to_string(p) + " " +
                 std::to_string(nd.consume[p]));
        }
      }
      for (std::size_t p = 0; p < nd.produce.size(); ++p) {
        if (nd.produce[p] != 1) {
          kv(out, "produce_rate",
             std::to_string(nd.id) + " " + std::to_string(p) + " " +
                 std::to_string(nd.produce[p]));
        }
      }
    }
    for (int sink : s.graph.sinks) kv(out, "sink", std::to_string(sink));
  } else {
    TaskGraph base;
    Mapping base_map;
    std::tie(base, base_map) = generate(s.spec.kind, s.spec.params, s.seed);
    if (s.spec.remove_feedback) {
      base = remove_feedback_channels(base).first;
    }
    bool structural_match =
        base.nodes == s.graph.nodes && base.sinks == s.graph.sinks &&
        base.channels.size() == s.graph.channels.size() &&
        base_map.coords == s.mapping.coords &&
        base_map.mesh_w == s.mapping.mesh_w &&
        base_map.mesh_h == s.mapping.mesh_h;
    for (std::size_t c = 0; structural_match && c < base.channels.size();
         ++c) {
      Channel want = s.graph.channels[c];
      want.capacity = base.channels[c].capacity;
      want.initial_tokens = base.channels[c].initial_tokens;
      structural_match = want == base.channels[c];
    }
    if (!structural_match) {
      throw std::logic_error(
          "scenario graph diverged from its generator spec; convert it to "
          "kind = explicit before serializing");
    }
    for (std::size_t c = 0; c < base.channels.size(); ++c) {
      const Channel& have = s.graph.channels[c];
      const Channel& want = base.channels[c];
      if (have.capacity != want.capacity) {
        channel_overrides.push_back(
            {have.id, "capacity." + std::to_string(have.id) + " = " +
                          std::to_string(have.capacity)});
      }
      if (have.initial_tokens != want.initial_tokens) {
        channel_overrides.push_back(
            {have.id, "initial." + std::to_string(have.id) + " = " +
                          std::to_string(have.initial_tokens)});
      }
    }
  }

  out += "\n[mesh]\n";
  kv(out, "interconnect",
     s.mapping.interconnect == Interconnect::SharedBus ? "bus" : "p2p");
  kv(out, "adjacency_check", s.mapping.adjacency_check ? "true" : "false");
  kv(out, "bus_freq", g17(s.bus.freq));
  kv(out, "bus_cycles_per_transfer", std::to_string(s.bus.cycles_per_transfer));
  if (s.spec.kind == GraphKind::Explicit) {
    kv(out, "width", std::to_string(s.mapping.mesh_w));
    kv(out, "height", std::to_string(s.mapping.mesh_h));
    for (int i = 0; i < n; ++i) {
      kv(out, "coord",
         std::to_string(i) + " " + std::to_string(s.mapping.coords[i].first) +
             " " + std::to_string(s.mapping.coords[i].second));
    }
  }

  out += "\n[clocks]\n";
  emit_field(out, "freq", s.clocks,
             [](const ClockConfig& c) { return c.freq; }, fmt_d);
  emit_field(out, "phase", s.clocks,
             [](const ClockConfig& c) { return c.phase; }, fmt_t);
  bool any_levels = false;
  for (const ClockConfig& c : s.clocks) any_levels |= !c.levels.empty();
  if (any_levels) {
    emit_field(out, "levels", s.clocks,
               [](const ClockConfig& c) { return c.levels; },
               [](const std::vector<double>& v) { return join_g17(v); });
  }
  emit_field(out, "f_min", s.clocks,
             [](const ClockConfig& c) { return c.f_min; }, fmt_d);
  emit_field(out, "f_max", s.clocks,
             [](const ClockConfig& c) { return c.f_max; }, fmt_d);

  out += "\n[channels]\n";
  {
    std::vector<int> stages = s.sync_stages;
    emit_field(out, "stages", stages, [](int v) { return v; },
               [](int v) { return std::to_string(v); });
  }
  for (const auto& [id, line] : channel_overrides) {
    out += line;
    out += "\n";
  }

  out += "\n[governor]\n";
  emit_field(out, "kind", s.governors,
             [](const GovernorConfig& g) { return g.kind; },
             [](GovernorKind k) { return std::string(gov_kind_name(k)); });
  emit_field(out, "setpoint", s.governors,
             [](const GovernorConfig& g) { return g.setpoint; }, fmt_d);
  emit_field(out, "kp", s.governors,
             [](const GovernorConfig& g) { return g.kp; }, fmt_d);
  emit_field(out, "ki", s.governors,
             [](const GovernorConfig& g) { return g.ki; }, fmt_d);
  emit_field(out, "kd", s.governors,
             [](const GovernorConfig& g) { return g.kd; }, fmt_d);
  emit_field(out, "window", s.governors,
             [](const GovernorConfig& g) { return g.window; }, fmt_t);
  emit_field(out, "up_threshold", s.governors,
             [](const GovernorConfig& g) { return g.up_threshold; }, fmt_d);
  emit_field(out, "down_threshold", s.governors,
             [](const GovernorConfig& g) { return g.down_threshold; }, fmt_d);
  emit_field(out, "f_nominal", s.governors,
             [](const GovernorConfig& g) { return g.f_nominal; }, fmt_d);
  emit_field(out, "initial", s.governors,
             [](const GovernorConfig& g) { return g.initial; },
             [](InitialLevel l) { return std::string(initial_name(l)); });

  out += "\n[power]\n";
  kv(out, "alpha_c", g17(s.power.alpha_c));
  kv(out, "v_min", g17(s.power.v_min));
  kv(out, "v_max", g17(s.power.v_max));
  kv(out, "f_min", g17(s.power.f_min));
  kv(out, "f_max", g17(s.power.f_max));
  kv(out, "leakage", g17(s.power.leakage));

  out += "\n[sim]\n";
  kv(out, "name", s.name);
  kv(out, "duration", std::to_string(s.duration));
  kv(out, "warmup", std::to_string(s.warmup));
  kv(out, "seed", std::to_string(s.seed));
  return out;
}

SimTime parse_time_value(const std::string& text) {
  return parse_time(trim(text), 0);
}

Scenario scenario_from_generator(GraphKind kind, const GenParams& params,
                                 std::uint64_t seed, int sync_stages,
                                 bool remove_feedback) {
  Scenario s;
  s.spec.kind = kind;
  s.spec.params = params;
  s.spec.remove_feedback = remove_feedback;
  s.seed = seed;
  auto [g, m] = generate(kind, params, seed);
  if (remove_feedback) g = remove_feedback_channels(g).first;
  s.graph = std::move(g);
  s.mapping = std::move(m);
  s.name = graph_kind_name(kind);
  s.clocks.assign(s.graph.nodes.size(), ClockConfig{});
  s.governors.assign(s.graph.nodes.size(), GovernorConfig{});
  s.sync_stages.assign(s.graph.channels.size(), sync_stages);
  return s;
}

}  // namespace gcmp
