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

#include "gcmp/engine.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "gcmp/clock.hpp"
#include "gcmp/fifo.hpp"
#include "gcmp/rng.hpp"

namespace gcmp {

namespace {

struct ResolvedPe {
  std::vector<double> levels;
  double f0 = 0;         // starting frequency
  double f_nominal = 0;  // pid anchor
};

struct Resolution {
  std::vector<ResolvedPe> pes;
  PowerModel power;
  std::vector<std::string> errs;
};

bool is_governed(GovernorKind k) {
  return k == GovernorKind::Pid || k == GovernorKind::OnDemand ||
         k == GovernorKind::Conservative;
}

// Fills every defaulted field so both validation and the run itself see one
// concrete configuration.
Resolution resolve(const Scenario& s) {
  Resolution r;
  r.errs = validate(s.graph, s.mapping);
  const std::size_t n = s.graph.nodes.size();
  if (s.clocks.size() != n) {
    r.errs.push_back("expected one clock config per node");
    return r;
  }
  if (s.governors.size() != n) {
    r.errs.push_back("expected one governor config per node");
    return r;
  }
  if (s.sync_stages.size() != s.graph.channels.size()) {
    r.errs.push_back("expected one synchronizer depth per channel");
    return r;
  }
  for (std::size_t c = 0; c < s.sync_stages.size(); ++c) {
    if (s.sync_stages[c] < 0) {
      r.errs.push_back("channel " + std::to_string(s.graph.channels[c].id) +
                       ": synchronizer stages must be >= 0");
    }
  }
  if (!(s.duration > s.warmup) || s.warmup < 0) {
    r.errs.push_back("simulation needs duration > warmup >= 0");
  }
  if (s.mapping.interconnect == Interconnect::SharedBus) {
    if (!(s.bus.freq > 0)) r.errs.push_back("bus frequency must be positive");
    if (s.bus.cycles_per_transfer < 1) {
      r.errs.push_back("bus cycles_per_transfer must be >= 1");
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const ClockConfig& cc = s.clocks[i];
    const GovernorConfig& gc = s.governors[i];
    const std::string who = "node " + std::to_string(i) + ": ";
    ResolvedPe pe;

    if (!(cc.freq > 0)) {
      r.errs.push_back(who + "clock frequency must be positive");
      r.pes.push_back(pe);
      continue;
    }
    pe.levels = cc.levels;
    if (pe.levels.empty()) {
      if (is_governed(gc.kind)) {
        // 16 evenly spaced settings from f_max/8 up to f_max.
        const double top = cc.f_max > 0 ? cc.f_max : cc.freq;
        for (int k = 0; k < 16; ++k) {
          pe.levels.push_back(top / 8.0 + k * (top - top / 8.0) / 15.0);
        }
      } else {
        pe.levels = {cc.freq};
      }
    }
    std::sort(pe.levels.begin(), pe.levels.end());
    if (!(pe.levels.front() > 0)) {
      r.errs.push_back(who + "frequency levels must be positive");
    }
    if (cc.f_min > 0 && pe.levels.front() < cc.f_min) {
      r.errs.push_back(who + "a level lies below f_min");
    }
    if (cc.f_max > 0 && pe.levels.back() > cc.f_max) {
      r.errs.push_back(who + "a level lies above f_max");
    }

    const double expected = s.graph.nodes[i].expected_cost();
    pe.f_nominal =
        gc.f_nominal > 0 ? gc.f_nominal : expected * gc.setpoint;

    InitialLevel initial = gc.initial;
    switch (initial) {
      case InitialLevel::Given: pe.f0 = cc.freq; break;
      case InitialLevel::Min: pe.f0 = pe.levels.front(); break;
      case InitialLevel::Max: pe.f0 = pe.levels.back(); break;
      case InitialLevel::Nominal:
        if (!(pe.f_nominal > 0)) {
          r.errs.push_back(who + "nominal start needs a resolvable f_nominal");
          pe.f0 = pe.levels.front();
        } else {
          pe.f0 = nearest_level(pe.f_nominal, pe.levels);
        }
        break;
    }
    if (std::find(pe.levels.begin(), pe.levels.end(), pe.f0) ==
        pe.levels.end()) {
      r.errs.push_back(who + "starting frequency is not a level");
    }

    if (is_governed(gc.kind)) {
      if (gc.window <= 0) r.errs.push_back(who + "governor window must be positive");
      if (gc.kind == GovernorKind::Pid) {
        if (!(gc.setpoint > 0)) {
          r.errs.push_back(who + "pid governor needs a positive setpoint");
        }
        if (!(pe.f_nominal > 0)) {
          r.errs.push_back(who + "pid governor needs a resolvable f_nominal");
        }
      } else {
        if (!(gc.up_threshold > gc.down_threshold) || gc.up_threshold >= 1 ||
            gc.down_threshold <= 0) {
          r.errs.push_back(who +
                           "thresholds need 0 < down < up < 1");
        }
      }
    }
    r.pes.push_back(pe);
  }

  r.power = s.power;
  if (!r.pes.empty() && r.errs.empty()) {
    double lo = r.pes[0].levels.front(), hi = r.pes[0].levels.back();
    for (const auto& pe : r.pes) {
      lo = std::min(lo, pe.levels.front());
      hi = std::max(hi, pe.levels.back());
    }
    if (r.power.f_min <= 0) r.power.f_min = lo;
    if (r.power.f_max <= 0) r.power.f_max = hi;
    if (r.power.f_min > lo || r.power.f_max < hi) {
      r.errs.push_back("power model frequency range does not cover the level grids");
    }
    if (!(r.power.v_min > 0) || r.power.v_min > r.power.v_max) {
      r.errs.push_back("power model needs 0 < v_min <= v_max");
    }
    if (r.power.alpha_c < 0 || r.power.leakage < 0) {
      r.errs.push_back("power model coefficients must be non-negative");
    }
  }
  return r;
}

struct Event {
  SimTime t;
  int cls;  // 0 = governor window, 1 = clock edge
  int id;   // PE id, or node count for the bus domain

  bool operator>(const Event& o) const {
    return std::tie(t, cls, id) > std::tie(o.t, o.cls, o.id);
  }
};

enum class Phase { Acquire, Compute, Emit };

struct PeState {
  Phase phase = Phase::Acquire;
  std::vector<int> in_need;
  std::vector<int> out_need;
  std::vector<char> port_waiting;  // bus request in flight, per output port
  std::int64_t remaining = 0;

  std::int64_t edges = 0, compute = 0, acquire = 0, emit = 0;
  std::int64_t read_stall = 0, write_stall = 0, firings = 0;
  // Counter values at the last governor window boundary.
  std::int64_t w_firings = 0, w_busy = 0, w_edges = 0;
  // Counter values at the warmup snapshot.
  std::int64_t b_edges = 0, b_compute = 0, b_acquire = 0, b_emit = 0;
  std::int64_t b_read_stall = 0, b_write_stall = 0, b_firings = 0;

  double cur_freq = 0;
  std::vector<FreqSpan> trace;
  std::vector<GovSample> gov_log;
  SplitMix64 rng{0};
};

struct ChanState {
  std::unique_ptr<DualClockFifo> fifo;
  std::int64_t next_seq = 0;
  std::int64_t cur_occ = 0;

  bool tracking = false;
  std::int64_t pushes_w = 0, pops_w = 0;
  std::int64_t warmup_occ = 0;
  int occ_min = 0, occ_max = 0;
  double occ_accum = 0;
  SimTime last_change = 0;

  void start_tracking(SimTime t) {
    tracking = true;
    warmup_occ = cur_occ;
    occ_min = occ_max = static_cast<int>(cur_occ);
    occ_accum = 0;
    last_change = t;
  }

  void record(SimTime t, int delta, bool is_push) {
    if (tracking) {
      occ_accum +=
          static_cast<double>(cur_occ) * to_seconds(t - last_change);
      last_change = t;
    }
    cur_occ += delta;
    if (tracking) {
      occ_min = std::min(occ_min, static_cast<int>(cur_occ));
      occ_max = std::max(occ_max, static_cast<int>(cur_occ));
      if (is_push) pushes_w++; else pops_w++;
    }
  }
};

struct BusRequest {
  int chan;
  Token tok;
  SimTime enqueued_at;
};

struct Transfer {
  int chan;
  Token tok;
  int countdown;
};

class Sim {
 public:
  Sim(const Scenario& s, const Resolution& r) : s_(s), r_(r) {}

  Metrics run();

 private:
  void pe_edge(int i, SimTime t);
  void bus_edge(SimTime t);
  void governor_window(int i, SimTime t);
  void snapshot(SimTime t);
  void apply_frequency(int i, double f, SimTime t);
  Metrics finalize();

  const Scenario& s_;
  const Resolution& r_;
  int n_ = 0;
  bool shared_bus_ = false;
  std::vector<ClockDomain> domains_;  // one per PE, plus the bus at index n_
  std::vector<PeState> pes_;
  std::vector<std::unique_ptr<PidController>> pids_;  // only for pid PEs
  std::vector<ChanState> chans_;
  std::vector<std::vector<int>> in_ch_, out_ch_;  // node, port -> channel idx
  std::vector<std::deque<BusRequest>> bus_q_;
  std::optional<Transfer> in_flight_;
  int rr_cursor_ = 0;
  bool snapshotted_ = false;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> pq_;
};

void Sim::apply_frequency(int i, double f, SimTime t) {
  PeState& st = pes_[i];
  if (f == st.cur_freq) return;
  const SimTime t_eff = domains_[i].set_frequency(f, t);
  st.cur_freq = f;
  // A command superseding one whose effective edge never fired lands on the
  // same edge; the later command wins.
  if (!st.trace.empty() && st.trace.back().start == t_eff) {
    st.trace.back().freq = f;
  } else {
    st.trace.push_back({t_eff, f});
  }
  for (std::size_t c = 0; c < chans_.size(); ++c) {
    chans_[c].fifo->on_schedule_change(i, t_eff);
  }
}

void Sim::governor_window(int i, SimTime t) {
  PeState& st = pes_[i];
  const GovernorConfig& gc = s_.governors[i];
  const std::int64_t tokens = st.firings - st.w_firings;
  const std::int64_t busy =
      (st.compute + st.acquire + st.emit) - st.w_busy;
  const std::int64_t edges = st.edges - st.w_edges;
  st.w_firings = st.firings;
  st.w_busy = st.compute + st.acquire + st.emit;
  st.w_edges = st.edges;

  double measured = 0;
  double commanded = st.cur_freq;
  if (gc.kind == GovernorKind::Pid) {
    WindowSample sample;
    sample.start = t - gc.window;
    sample.end = t;
    sample.tokens_completed = tokens;
    sample.busy_cycles = busy;
    sample.total_cycles = edges;
    measured = static_cast<double>(tokens) / to_seconds(gc.window);
    commanded = pids_[i]->step(sample, r_.pes[i].levels);
  } else {
    measured = edges > 0 ? static_cast<double>(busy) /
                               static_cast<double>(edges)
                         : 0.0;
    commanded = governor_step(gc.kind, measured, st.cur_freq,
                              r_.pes[i].levels, gc.up_threshold,
                              gc.down_threshold);
  }
  st.gov_log.push_back({t, measured, commanded});
  apply_frequency(i, commanded, t);
}

void Sim::snapshot(SimTime warmup) {
  snapshotted_ = true;
  for (PeState& st : pes_) {
    st.b_edges = st.edges;
    st.b_compute = st.compute;
    st.b_acquire = st.acquire;
    st.b_emit = st.emit;
    st.b_read_stall = st.read_stall;
    st.b_write_stall = st.write_stall;
    st.b_firings = st.firings;
  }
  for (ChanState& cs : chans_) cs.start_tracking(warmup);
}

void Sim::pe_edge(int i, SimTime t) {
  PeState& st = pes_[i];
  const TaskNode& node = s_.graph.nodes[i];
  bool did_pop = false;
  bool compute_edge = false;
  bool emit_work = false;

  if (st.phase == Phase::Acquire) {
    bool all = true;
    for (std::size_t p = 0; p < st.in_need.size(); ++p) {
      if (st.in_need[p] > 0) {
        ChanState& cs = chans_[in_ch_[i][p]];
        if (auto tok = cs.fifo->try_pop(t)) {
          st.in_need[p]--;
          did_pop = true;
          cs.record(t, -1, false);
        }
      }
      all = all && st.in_need[p] == 0;
    }
    if (all) {
      st.remaining = node.fixed_cost()
                         ? node.compute_min
                         : st.rng.uniform(node.compute_min, node.compute_max);
      st.phase = Phase::Compute;
    }
  }

  if (st.phase == Phase::Compute) {
    st.remaining--;
    compute_edge = true;
    if (st.remaining == 0) {
      st.phase = Phase::Emit;
      for (std::size_t p = 0; p < st.out_need.size(); ++p) {
        st.out_need[p] = node.produce[p];
      }
    }
  }

  if (st.phase == Phase::Emit) {
    bool all = true;
    for (std::size_t p = 0; p < st.out_need.size(); ++p) {
      if (st.out_need[p] > 0 && !st.port_waiting[p]) {
        const int c = out_ch_[i][p];
        ChanState& cs = chans_[c];
        if (shared_bus_) {
          bus_q_[i].push_back({c, Token{cs.next_seq, 0, 0}, t});
          cs.next_seq++;
          st.port_waiting[p] = 1;
          emit_work = true;
        } else if (cs.fifo->try_push(Token{cs.next_seq, 0, 0}, t)) {
          cs.next_seq++;
          st.out_need[p]--;
          emit_work = true;
          cs.record(t, 1, true);
        }
      }
      all = all && st.out_need[p] == 0;
    }
    if (all) {
      st.firings++;
      st.phase = Phase::Acquire;
      for (std::size_t p = 0; p < st.in_need.size(); ++p) {
        st.in_need[p] = node.consume[p];
      }
      emit_work = true;
    }
  }

  st.edges++;
  if (compute_edge) {
    st.compute++;
  } else if (did_pop) {
    st.acquire++;
  } else if (emit_work) {
    st.emit++;
  } else if (st.phase == Phase::Acquire) {
    st.read_stall++;
  } else {
    st.write_stall++;
  }
}

void Sim::bus_edge(SimTime t) {
  if (in_flight_) {
    if (in_flight_->countdown > 0) in_flight_->countdown--;
    if (in_flight_->countdown == 0) {
      ChanState& cs = chans_[in_flight_->chan];
      if (cs.fifo->try_push(in_flight_->tok, t)) {
        cs.record(t, 1, true);
        const Channel& ch = s_.graph.channels[in_flight_->chan];
        PeState& writer = pes_[ch.src_node];
        writer.out_need[ch.src_port]--;
        writer.port_waiting[ch.src_port] = 0;
        in_flight_.reset();
      }
      // A full destination keeps the transfer occupying the bus; it retries
      // every bus edge until the FIFO admits it.
    }
  }
  if (!in_flight_) {
    for (int k = 0; k < n_; ++k) {
      const int pe = (rr_cursor_ + k) % n_;
      if (!bus_q_[pe].empty() && bus_q_[pe].front().enqueued_at < t) {
        BusRequest req = bus_q_[pe].front();
        bus_q_[pe].pop_front();
        in_flight_ = Transfer{req.chan, req.tok, s_.bus.cycles_per_transfer};
        rr_cursor_ = (pe + 1) % n_;
        break;
      }
    }
  }
}

Metrics Sim::run() {
  n_ = static_cast<int>(s_.graph.nodes.size());
  shared_bus_ = s_.mapping.interconnect == Interconnect::SharedBus;

  domains_.reserve(n_ + 1);
  for (int i = 0; i < n_; ++i) {
    const auto& pe = r_.pes[i];
    domains_.emplace_back(i, pe.f0, pe.levels, pe.levels.front(),
                          pe.levels.back(), s_.clocks[i].phase);
  }
  if (shared_bus_) {
    domains_.emplace_back(n_, s_.bus.freq);
  }

  in_ch_.assign(n_, {});
  out_ch_.assign(n_, {});
  for (int i = 0; i < n_; ++i) {
    in_ch_[i].assign(s_.graph.nodes[i].consume.size(), -1);
    out_ch_[i].assign(s_.graph.nodes[i].produce.size(), -1);
  }
  chans_.resize(s_.graph.channels.size());
  for (std::size_t c = 0; c < s_.graph.channels.size(); ++c) {
    const Channel& ch = s_.graph.channels[c];
    const ClockDomain* wd =
        shared_bus_ ? &domains_[n_] : &domains_[ch.src_node];
    const ClockDomain* rd = &domains_[ch.dst_node];
    const SyncConfig sync{s_.sync_stages[c]};
    chans_[c].fifo = std::make_unique<DualClockFifo>(
        ch.capacity, wd, rd, sync, sync, ch.initial_tokens);
    chans_[c].fifo->set_auto_compact(true);
    chans_[c].next_seq = ch.initial_tokens;
    chans_[c].cur_occ = ch.initial_tokens;
    in_ch_[ch.dst_node][ch.dst_port] = static_cast<int>(c);
    out_ch_[ch.src_node][ch.src_port] = static_cast<int>(c);
  }

  pes_.resize(n_);
  pids_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    PeState& st = pes_[i];
    const TaskNode& node = s_.graph.nodes[i];
    st.in_need.assign(node.consume.begin(), node.consume.end());
    st.out_need.assign(node.produce.size(), 0);
    st.port_waiting.assign(node.produce.size(), 0);
    st.cur_freq = r_.pes[i].f0;
    st.trace.push_back({0, st.cur_freq});
    st.rng = SplitMix64{mix_seed(s_.seed, node.seed)};
    const GovernorConfig& gc = s_.governors[i];
    if (gc.kind == GovernorKind::Pid) {
      pids_[i] = std::make_unique<PidController>(gc.kp, gc.ki, gc.kd,
                                                 gc.setpoint,
                                                 r_.pes[i].f_nominal);
    }
    if (is_governed(gc.kind) && gc.window < s_.duration) {
      pq_.push({gc.window, 0, i});
    }
  }
  bus_q_.assign(n_, {});

  for (int i = 0; i < n_; ++i) {
    const SimTime first = domains_[i].edge_at(0);
    if (first < s_.duration) pq_.push({first, 1, i});
  }
  if (shared_bus_) {
    const SimTime first = domains_[n_].edge_at(0);
    if (first < s_.duration) pq_.push({first, 1, n_});
  }

  while (!pq_.empty()) {
    const Event ev = pq_.top();
    pq_.pop();
    if (ev.t >= s_.duration) break;
    if (!snapshotted_ && ev.t >= s_.warmup) snapshot(s_.warmup);
    if (ev.cls == 0) {
      governor_window(ev.id, ev.t);
      const SimTime next = ev.t + s_.governors[ev.id].window;
      if (next < s_.duration) pq_.push({next, 0, ev.id});
    } else {
      if (ev.id == n_) {
        bus_edge(ev.t);
      } else {
        pe_edge(ev.id, ev.t);
      }
      const SimTime next = domains_[ev.id].next_edge_after(ev.t, true);
      if (next < s_.duration) pq_.push({next, 1, ev.id});
    }
  }
  if (!snapshotted_) snapshot(s_.warmup);
  return finalize();
}

Metrics Sim::finalize() {
  Metrics m;
  m.measured_duration = s_.duration - s_.warmup;
  const double window_s = to_seconds(m.measured_duration);

  for (int i = 0; i < n_; ++i) {
    PeState& st = pes_[i];
    PeMetrics pm;
    pm.node = i;
    pm.edges = st.edges - st.b_edges;
    pm.compute_cycles = st.compute - st.b_compute;
    pm.acquire_cycles = st.acquire - st.b_acquire;
    pm.emit_cycles = st.emit - st.b_emit;
    pm.read_stall_cycles = st.read_stall - st.b_read_stall;
    pm.write_stall_cycles = st.write_stall - st.b_write_stall;
    pm.firings = st.firings - st.b_firings;
    pm.freq_trace = std::move(st.trace);
    pm.governor_log = std::move(st.gov_log);
    pm.energy =
        trace_energy(pm.freq_trace, s_.warmup, s_.duration, r_.power);
    m.total_energy += pm.energy;
    m.pes.push_back(std::move(pm));
  }

  for (std::size_t c = 0; c < chans_.size(); ++c) {
    ChanState& cs = chans_[c];
    cs.occ_accum +=
        static_cast<double>(cs.cur_occ) * to_seconds(s_.duration - cs.last_change);
    ChannelMetrics cm;
    cm.channel = s_.graph.channels[c].id;
    cm.pushes = cs.pushes_w;
    cm.pops = cs.pops_w;
    cm.warmup_occupancy = cs.warmup_occ;
    cm.final_occupancy = cs.cur_occ;
    cm.occ_min = cs.occ_min;
    cm.occ_max = cs.occ_max;
    cm.occ_mean = cs.occ_accum / window_s;
    m.channels.push_back(cm);
  }

  for (int sink : s_.graph.sinks) {
    SinkMetrics sm;
    sm.node = sink;
    sm.tokens = m.pes[sink].firings;
    sm.throughput = static_cast<double>(sm.tokens) / window_s;
    m.aggregate_throughput += sm.throughput;
    m.sinks.push_back(sm);
  }
  std::int64_t total_tokens = 0;
  for (const auto& sm : m.sinks) total_tokens += sm.tokens;
  m.degenerate = total_tokens == 0;
  return m;
}

}  // namespace

Metrics run(const Scenario& s) {
  Resolution r = resolve(s);
  if (!r.errs.empty()) {
    std::string joined = "invalid scenario:";
    for (const auto& e : r.errs) joined += "\n  " + e;
    throw std::invalid_argument(joined);
  }
  Sim sim(s, r);
  return sim.run();
}

double penalty(const Metrics& gals, const Metrics& sync) {
  if (gals.sinks.size() != sync.sinks.size() || gals.sinks.empty()) {
    throw std::invalid_argument("penalty needs matching sink sets");
  }
  double acc = 0;
  for (std::size_t i = 0; i < gals.sinks.size(); ++i) {
    if (!(sync.sinks[i].throughput > 0)) {
      throw std::domain_error(
          "penalty undefined: baseline sink throughput is zero");
    }
    acc += 1.0 - gals.sinks[i].throughput / sync.sinks[i].throughput;
  }
  return acc / static_cast<double>(gals.sinks.size());
}

Scenario sync_baseline_of(const Scenario& s) {
  Scenario out = s;
  std::fill(out.sync_stages.begin(), out.sync_stages.end(), 0);
  return out;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  return resolve(s).errs;
}

ResolvedScenario resolve_scenario(const Scenario& s) {
  Resolution r = resolve(s);
  if (!r.errs.empty()) {
    std::string joined = "invalid scenario:";
    for (const auto& e : r.errs) joined += "\n  " + e;
    throw std::invalid_argument(joined);
  }
  ResolvedScenario out;
  for (const auto& pe : r.pes) {
    out.levels.push_back(pe.levels);
    out.f0.push_back(pe.f0);
    out.f_nominal.push_back(pe.f_nominal);
  }
  out.power = r.power;
  return out;
}

}  // namespace gcmp
