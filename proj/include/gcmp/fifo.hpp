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

#ifndef GCMP_FIFO_HPP
#define GCMP_FIFO_HPP

#include <cstdint>
#include <deque>
#include <optional>

#include "gcmp/clock.hpp"
#include "gcmp/sim_time.hpp"

namespace gcmp {

enum class FifoSide { writer, reader };

struct Token {
  std::int64_t seq = 0;           // strictly increasing per channel
  std::int32_t payload_cycles = 0;  // optional consumer cost hint
  std::int64_t tag = 0;

  bool operator==(const Token&) const = default;
};

// Dual-clock bounded FIFO. Tokens move instantly; what crosses the boundary
// slowly is knowledge of the other side's pointer. Each pointer update is
// delayed by a synchronizer before the opposite domain can see it, so both
// sides act on stale, strictly conservative occupancy estimates: the writer
// may see a fuller queue than reality and the reader an emptier one, but
// never the other way around.
class DualClockFifo {
 public:
  DualClockFifo(int capacity, const ClockDomain* write_domain,
                const ClockDomain* read_domain, SyncConfig write_to_read,
                SyncConfig read_to_write, int initial_tokens = 0);

  int capacity() const { return capacity_; }

  // Occupancy as estimated from one side at time t. Queries must not predate
  // a compaction horizon (see compact()).
  int observed_occupancy(FifoSide side, SimTime t) const;

  // Pushes at time <= t minus pops at time <= t. Oracle for the stale views.
  int true_occupancy(SimTime t) const;

  // t must be a rising edge of the write (resp. read) domain. Returns false
  // (resp. nullopt) when the side's occupancy estimate forbids the move.
  bool try_push(const Token& tok, SimTime t);
  std::optional<Token> try_pop(SimTime t);

  std::int64_t total_pushes() const { return write_base_ + write_hist_.size(); }
  std::int64_t total_pops() const { return read_base_ + read_hist_.size(); }

  // Drops history entries that cannot affect any view queried at or after
  // `horizon`. Purely a memory optimization: observable behavior for queries
  // at t >= horizon is unchanged.
  void compact(SimTime horizon);

  // When enabled, compacts automatically using the most recent event time as
  // the horizon once histories grow long. Only safe when all future queries
  // use non-decreasing times, which is how the engine drives the FIFO.
  void set_auto_compact(bool on) { auto_compact_ = on; }

  // Re-derives cached synchronization times after the destination domain's
  // schedule changed at t_eff. Must be called by whoever retunes a domain
  // this FIFO crosses into.
  void on_schedule_change(int domain_id, SimTime t_eff);

 private:
  struct HistEvent {
    SimTime t;       // event time in its own domain
    SimTime synced;  // first time the opposite domain can see it
  };

  static std::int64_t count_at_or_before(const std::deque<HistEvent>& hist,
                                         SimTime t);
  static std::int64_t count_synced_at_or_before(
      const std::deque<HistEvent>& hist, SimTime t);
  void maybe_auto_compact(SimTime t);

  int capacity_;
  const ClockDomain* write_dom_;
  const ClockDomain* read_dom_;
  SyncConfig w2r_;
  SyncConfig r2w_;
  std::deque<Token> tokens_;
  std::deque<HistEvent> write_hist_;
  std::deque<HistEvent> read_hist_;
  std::int64_t write_base_ = 0;  // dropped or initial-token push count
  std::int64_t read_base_ = 0;   // dropped pop count
  bool auto_compact_ = false;
};

}  // namespace gcmp

#endif  // GCMP_FIFO_HPP
