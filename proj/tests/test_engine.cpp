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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gcmp/engine.hpp"
#include "gcmp/taskgraph.hpp"
#include "ref_sim.hpp"

namespace {

constexpr gcmp::SimTime us = 1'000'000'000;  // 1 us in femtoseconds

gcmp::Scenario gen_scenario(gcmp::GraphKind kind, const gcmp::GenParams& p,
                            double freq, int stages, gcmp::SimTime duration,
                            gcmp::SimTime warmup, std::uint64_t seed) {
  gcmp::Scenario s;
  s.spec.kind = kind;
  s.spec.params = p;
  auto [g, m] = gcmp::generate(kind, p, seed);
  s.graph = std::move(g);
  s.mapping = std::move(m);
  s.clocks.assign(s.graph.nodes.size(), gcmp::ClockConfig{});
  for (gcmp::ClockConfig& c : s.clocks) c.freq = freq;
  s.sync_stages.assign(s.graph.channels.size(), stages);
  s.governors.assign(s.graph.nodes.size(), gcmp::GovernorConfig{});
  s.duration = duration;
  s.warmup = warmup;
  s.seed = seed;
  return s;
}

// One node, no channels: the simplest possible scenario.
gcmp::Scenario isolated_node(std::int64_t cycles, double freq) {
  gcmp::Scenario s;
  gcmp::TaskNode nd;
  nd.id = 0;
  nd.compute_min = cycles;
  nd.compute_max = cycles;
  s.graph.nodes = {nd};
  s.graph.sinks = {0};
  s.mapping =
      gcmp::snake_mapping(1, gcmp::Interconnect::PointToPoint, false);
  s.clocks.assign(1, gcmp::ClockConfig{});
  s.clocks[0].freq = freq;
  s.governors.assign(1, gcmp::GovernorConfig{});
  s.duration = 1000 * us;
  s.warmup = 100 * us;
  return s;
}

void check_accounting(const gcmp::Metrics& m, const gcmp::Scenario& s) {
  for (const gcmp::PeMetrics& pe : m.pes) {
    CHECK(pe.edges == pe.compute_cycles + pe.acquire_cycles + pe.emit_cycles +
                          pe.read_stall_cycles + pe.write_stall_cycles);
  }
  for (std::size_t i = 0; i < m.channels.size(); ++i) {
    const gcmp::ChannelMetrics& ch = m.channels[i];
    CHECK(ch.warmup_occupancy + ch.pushes - ch.pops == ch.final_occupancy);
    CHECK(ch.occ_min >= 0);
    CHECK(ch.occ_max <= s.graph.channels[i].capacity);
    CHECK(ch.occ_mean >= static_cast<double>(ch.occ_min));
    CHECK(ch.occ_mean <= static_cast<double>(ch.occ_max));
  }
}

}  // namespace

TEST_CASE("an isolated fixed-cost node computes on every edge") {
  const gcmp::Metrics m = gcmp::run(isolated_node(10, 100e6));
  REQUIRE(m.pes.size() == 1);
  CHECK(m.pes[0].edges == 90000);  // 0.9 ms of 10 ns edges
  CHECK(m.pes[0].compute_cycles == 90000);
  CHECK(m.pes[0].acquire_cycles == 0);
  CHECK(m.pes[0].emit_cycles == 0);
  CHECK(m.pes[0].read_stall_cycles == 0);
  CHECK(m.pes[0].write_stall_cycles == 0);
  CHECK(m.pes[0].firings == 9000);
  REQUIRE(m.sinks.size() == 1);
  CHECK(m.sinks[0].tokens == 9000);
  CHECK(m.sinks[0].throughput == doctest::Approx(1e7).epsilon(1e-12));
  CHECK(m.aggregate_throughput == m.sinks[0].throughput);
  CHECK_FALSE(m.degenerate);
  CHECK(m.measured_duration == 900 * us);
}

TEST_CASE("a deep pipeline with no synchronizers runs at the node rate") {
  gcmp::GenParams p;
  p.stages = 3;
  p.cycles = 10;
  p.capacity = 1024;
  const gcmp::Scenario s = gen_scenario(gcmp::GraphKind::FirChain, p, 100e6,
                                        0, 1000 * us, 100 * us, 1);
  const gcmp::Metrics m = gcmp::run(s);
  REQUIRE(m.sinks.size() == 1);
  CHECK(m.sinks[0].tokens == 9000);
  check_accounting(m, s);
}

TEST_CASE("ample buffering hides synchronizer latency entirely") {
  gcmp::GenParams p;
  p.stages = 3;
  p.cycles = 10;
  p.capacity = 1024;
  const gcmp::Scenario gals = gen_scenario(gcmp::GraphKind::FirChain, p,
                                           100e6, 2, 1000 * us, 100 * us, 1);
  const gcmp::Metrics mg = gcmp::run(gals);
  const gcmp::Metrics ms = gcmp::run(gcmp::sync_baseline_of(gals));
  CHECK(gcmp::penalty(mg, ms) <= 0.001);
}

TEST_CASE("a tight two-stage loop pays the full round-trip latency") {
  // Two 2-cycle stages over a capacity-1 channel with 2-stage synchronizers:
  // the producer must see the consumer's pop cross back before refilling, so
  // a firing takes 4 edges instead of 2. Counted by hand from the edge
  // schedule: the sink completes at edges 4, 8, ... (sync: 2, 4, ...).
  gcmp::GenParams p;
  p.stages = 2;
  p.cycles = 2;
  p.capacity = 1;
  const gcmp::Scenario gals = gen_scenario(gcmp::GraphKind::FirChain, p,
                                           100e6, 2, 1000 * us, 100 * us, 1);
  const gcmp::Metrics mg = gcmp::run(gals);
  const gcmp::Metrics ms = gcmp::run(gcmp::sync_baseline_of(gals));
  REQUIRE(mg.sinks.size() == 1);
  CHECK(mg.sinks[0].tokens == 22500);
  CHECK(ms.sinks[0].tokens == 45000);
  CHECK(gcmp::penalty(mg, ms) == doctest::Approx(0.5).epsilon(1e-12));
  check_accounting(mg, gals);
}

TEST_CASE("long compute phases absorb the same round trip") {
  // Same shape, but 10-cycle stages: the pop crosses back while the producer
  // is still computing, so the synchronizers cost nothing at steady state.
  gcmp::GenParams p;
  p.stages = 2;
  p.cycles = 10;
  p.capacity = 1;
  const gcmp::Scenario gals = gen_scenario(gcmp::GraphKind::FirChain, p,
                                           100e6, 2, 1000 * us, 100 * us, 1);
  const gcmp::Metrics mg = gcmp::run(gals);
  const gcmp::Metrics ms = gcmp::run(gcmp::sync_baseline_of(gals));
  CHECK(mg.sinks[0].tokens == 9000);
  CHECK(ms.sinks[0].tokens == 9000);
  CHECK(gcmp::penalty(mg, ms) == 0.0);
}

TEST_CASE("a loop-carried recurrence stretches by the synchronizer depth") {
  // 3 stages of 10 cycles in a ring with one seed token. The serial loop
  // fires the sink every 28 edges when synchronizers are free (3 * 10 edges
  // minus overlaps, plus the same-edge handoff order), and every 33 edges
  // with 2-stage synchronizers: each of the three hops adds 2 edges minus
  // the edge the pop already spends in flight.
  gcmp::GenParams p;
  p.stages = 3;
  p.cycles = 10;
  p.capacity = 1024;
  const gcmp::Scenario gals = gen_scenario(gcmp::GraphKind::IirFeedback, p,
                                           100e6, 2, 1000 * us, 100 * us, 1);
  const gcmp::Metrics mg = gcmp::run(gals);
  const gcmp::Metrics ms = gcmp::run(gcmp::sync_baseline_of(gals));
  CHECK(mg.sinks[0].tokens == 2727);   // edges 31 + 33k in the window
  CHECK(ms.sinks[0].tokens == 3214);   // edges 27 + 28k in the window
  CHECK(gcmp::penalty(mg, ms) ==
        doctest::Approx(1.0 - 2727.0 / 3214.0).epsilon(1e-12));
}

TEST_CASE("the engine matches an independent tick-by-tick reference") {
  struct Case {
    gcmp::GraphKind kind;
    gcmp::GenParams p;
    double freq;
    std::uint64_t seed;
  };
  std::vector<Case> cases;
  {
    gcmp::GenParams p;
    p.stages = 4;
    p.cycles = 10;
    p.capacity = 8;
    cases.push_back({gcmp::GraphKind::FirChain, p, 100e6, 1});
  }
  {
    gcmp::GenParams p;
    p.cycles = 7;
    p.capacity = 2;
    cases.push_back({gcmp::GraphKind::AdpcmChain, p, 250e6, 2});
  }
  {
    gcmp::GenParams p;  // variable cost: exercises the per-node rng streams
    p.cycles_min = 6;
    p.cycles_max = 14;
    p.capacity = 4;
    cases.push_back({gcmp::GraphKind::MjpegPipeline, p, 100e6, 3});
  }
  {
    gcmp::GenParams p;
    p.points = 4;
    p.cycles = 5;
    p.capacity = 2;
    cases.push_back({gcmp::GraphKind::FftDag, p, 250e6, 4});
  }
  {
    gcmp::GenParams p;
    p.stages = 3;
    p.cycles = 3;
    p.capacity = 1;
    cases.push_back({gcmp::GraphKind::FirChain, p, 100e6, 5});
  }
  {
    gcmp::GenParams p;
    p.cycles = 9;
    p.capacity = 1;
    p.copies = 2;
    cases.push_back({gcmp::GraphKind::AdpcmChain, p, 250e6, 6});
  }
  for (const Case& c : cases) {
    CAPTURE(static_cast<int>(c.kind));
    CAPTURE(c.seed);
    const gcmp::Scenario s =
        gen_scenario(c.kind, c.p, c.freq, 0, 500 * us, 50 * us, c.seed);
    REQUIRE(gcmp::run(s) == gcmp_test::ref_run(s));
  }
}

TEST_CASE("identical scenarios produce bit-identical metrics") {
  gcmp::GenParams p;
  p.cycles_min = 6;
  p.cycles_max = 14;
  p.capacity = 4;
  gcmp::Scenario s = gen_scenario(gcmp::GraphKind::MjpegPipeline, p, 100e6,
                                  2, 500 * us, 50 * us, 7);
  // Heterogeneous clocks and a pid governor stress the deterministic paths.
  s.clocks[1].freq = 150e6;
  s.clocks[2].freq = 250e6;
  s.clocks[3].phase = 3'000'000;
  for (gcmp::ClockConfig& c : s.clocks) {
    c.levels = {50e6, 100e6, 150e6, 250e6};
  }
  s.governors[2].kind = gcmp::GovernorKind::Pid;
  s.governors[2].setpoint = 5e6;
  const gcmp::Metrics a = gcmp::run(s);
  const gcmp::Metrics b = gcmp::run(s);
  REQUIRE(a == b);
  check_accounting(a, s);
}

TEST_CASE("token and edge accounting balances on a stressed pipeline") {
  gcmp::GenParams p;
  p.cycles_min = 2;
  p.cycles_max = 19;
  p.capacity = 3;
  gcmp::Scenario s = gen_scenario(gcmp::GraphKind::MjpegPipeline, p, 100e6,
                                  3, 1000 * us, 100 * us, 11);
  s.clocks[1].freq = 73e6;   // incommensurate edges
  s.clocks[3].freq = 190e6;
  const gcmp::Metrics m = gcmp::run(s);
  check_accounting(m, s);
  CHECK_FALSE(m.degenerate);
  CHECK(m.pes[0].edges == 90000);
  CHECK(m.pes[1].edges == 65700);  // 0.9 ms at 73 MHz
}

TEST_CASE("a shared bus serializes transfers and arbitrates fairly") {
  gcmp::GenParams p;
  p.cycles = 10;
  p.capacity = 64;
  p.copies = 4;
  gcmp::Scenario s = gen_scenario(gcmp::GraphKind::AdpcmChain, p, 100e6, 2,
                                  1000 * us, 100 * us, 1);
  s.mapping.interconnect = gcmp::Interconnect::SharedBus;
  s.bus.freq = 100e6;
  s.bus.cycles_per_transfer = 4;
  const gcmp::Metrics m = gcmp::run(s);
  REQUIRE(m.sinks.size() == 4);
  // Each encode->decode handoff monopolizes the bus for 4 of its 10-cycle
  // firing, and a blocked writer stretches to a 16-edge period; four copies
  // saturate the bus exactly, at a quarter of the p2p rate each.
  std::int64_t total = 0;
  for (const gcmp::SinkMetrics& sink : m.sinks) {
    CHECK(sink.tokens >= 5624);
    CHECK(sink.tokens <= 5626);
    total += sink.tokens;
  }
  CHECK(m.aggregate_throughput == doctest::Approx(2.5e7).epsilon(1e-3));
  CHECK(total >= 22498);
  CHECK(total <= 22502);
  check_accounting(m, s);
}

TEST_CASE("a pid governor finds the level that meets its setpoint") {
  gcmp::Scenario s = isolated_node(10, 200e6);
  s.clocks[0].levels = {1e8, 2e8};
  s.governors[0].kind = gcmp::GovernorKind::Pid;
  s.governors[0].setpoint = 1e7;  // met exactly at 1e8 with 10-cycle firings
  s.governors[0].initial = gcmp::InitialLevel::Max;
  const gcmp::Metrics m = gcmp::run(s);
  REQUIRE(m.pes.size() == 1);
  const gcmp::PeMetrics& pe = m.pes[0];
  REQUIRE(pe.freq_trace.size() >= 2);
  CHECK(pe.freq_trace[0] == gcmp::FreqSpan{0, 2e8});
  CHECK(pe.freq_trace[1].freq == 1e8);
  CHECK(pe.freq_trace[1].start > 50 * us);  // first retune lands after window 1
  CHECK(pe.freq_trace.back().freq == 1e8);
  REQUIRE_FALSE(pe.governor_log.empty());
  CHECK(pe.governor_log[0].window_end == 50 * us);
  CHECK(pe.governor_log[0].measured == doctest::Approx(2e7));
  CHECK(pe.governor_log[0].commanded == 1e8);
  // Settled: throughput over the measured window is the setpoint.
  CHECK(m.sinks[0].throughput == doctest::Approx(1e7).epsilon(1e-3));
}

TEST_CASE("an ondemand governor jumps to the top level under load") {
  gcmp::Scenario s = isolated_node(10, 100e6);
  s.clocks[0].levels = {1e8, 1.5e8, 2e8};
  s.governors[0].kind = gcmp::GovernorKind::OnDemand;
  s.governors[0].initial = gcmp::InitialLevel::Min;
  const gcmp::Metrics m = gcmp::run(s);
  const gcmp::PeMetrics& pe = m.pes[0];
  REQUIRE(pe.freq_trace.size() >= 2);
  CHECK(pe.freq_trace[0] == gcmp::FreqSpan{0, 1e8});
  CHECK(pe.freq_trace[1].freq == 2e8);  // busy fraction 1.0 > up threshold
  CHECK(pe.freq_trace.back().freq == 2e8);
  CHECK(pe.governor_log[0].measured == doctest::Approx(1.0));
}

TEST_CASE("a starved system is reported as degenerate") {
  gcmp::Scenario s = isolated_node(std::int64_t{1} << 60, 100e6);
  const gcmp::Metrics m = gcmp::run(s);
  CHECK(m.degenerate);
  CHECK(m.sinks[0].tokens == 0);
  CHECK(m.aggregate_throughput == 0.0);
  CHECK_THROWS_AS(gcmp::penalty(m, m), std::domain_error);
}

TEST_CASE("penalty rejects mismatched sink sets") {
  const gcmp::Metrics a = gcmp::run(isolated_node(10, 100e6));
  gcmp::GenParams p;
  p.copies = 2;
  p.cycles = 10;
  const gcmp::Metrics b = gcmp::run(gen_scenario(
      gcmp::GraphKind::AdpcmChain, p, 100e6, 0, 1000 * us, 100 * us, 1));
  CHECK_THROWS_AS(gcmp::penalty(a, b), std::invalid_argument);
}

TEST_CASE("the sync baseline only zeroes synchronizer depths") {
  gcmp::GenParams p;
  p.stages = 3;
  const gcmp::Scenario s = gen_scenario(gcmp::GraphKind::FirChain, p, 100e6,
                                        2, 1000 * us, 100 * us, 1);
  const gcmp::Scenario b = gcmp::sync_baseline_of(s);
  CHECK(b.sync_stages == std::vector<int>(s.graph.channels.size(), 0));
  CHECK(b.graph == s.graph);
  CHECK(b.clocks == s.clocks);
  CHECK(b.duration == s.duration);
}

TEST_CASE("malformed scenarios are rejected up front") {
  gcmp::GenParams p;
  p.stages = 2;
  const gcmp::Scenario good = gen_scenario(gcmp::GraphKind::FirChain, p,
                                           100e6, 2, 1000 * us, 100 * us, 1);
  CHECK(gcmp::validate_scenario(good).empty());
  CHECK_NOTHROW(gcmp::resolve_scenario(good));

  SUBCASE("clock count") {
    gcmp::Scenario s = good;
    s.clocks.pop_back();
    CHECK_FALSE(gcmp::validate_scenario(s).empty());
    CHECK_THROWS_AS(gcmp::run(s), std::invalid_argument);
  }
  SUBCASE("synchronizer depth count") {
    gcmp::Scenario s = good;
    s.sync_stages.push_back(2);
    CHECK_THROWS_AS(gcmp::run(s), std::invalid_argument);
  }
  SUBCASE("negative synchronizer depth") {
    gcmp::Scenario s = good;
    s.sync_stages[0] = -1;
    CHECK_THROWS_AS(gcmp::run(s), std::invalid_argument);
  }
  SUBCASE("governor count") {
    gcmp::Scenario s = good;
    s.governors.push_back(gcmp::GovernorConfig{});
    CHECK_THROWS_AS(gcmp::run(s), std::invalid_argument);
  }
  SUBCASE("window not inside the run") {
    gcmp::Scenario s = good;
    s.warmup = s.duration;
    CHECK_THROWS_AS(gcmp::run(s), std::invalid_argument);
  }
  SUBCASE("pid without a setpoint") {
    gcmp::Scenario s = good;
    s.governors[0].kind = gcmp::GovernorKind::Pid;
    CHECK_THROWS_AS(gcmp::run(s), std::invalid_argument);
  }
  SUBCASE("starting frequency off the level grid") {
    gcmp::Scenario s = good;
    s.clocks[0].levels = {50e6, 200e6};
    CHECK_THROWS_AS(gcmp::run(s), std::invalid_argument);
  }
}
