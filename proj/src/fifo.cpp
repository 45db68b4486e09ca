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

#include "gcmp/fifo.hpp"

#include <algorithm>
#include <stdexcept>

namespace gcmp {

namespace {
constexpr std::size_t kAutoCompactThreshold = 1 << 14;
}

DualClockFifo::DualClockFifo(int capacity, const ClockDomain* write_domain,
                             const ClockDomain* read_domain,
                             SyncConfig write_to_read, SyncConfig read_to_write,
                             int initial_tokens)
    : capacity_(capacity),
      write_dom_(write_domain),
      read_dom_(read_domain),
      w2r_(write_to_read),
      r2w_(read_to_write) {
  if (capacity_ < 1) {
    throw std::invalid_argument("fifo capacity must be at least 1");
  }
  if (write_dom_ == nullptr || read_dom_ == nullptr) {
    throw std::invalid_argument("fifo requires both clock domains");
  }
  if (initial_tokens < 0 || initial_tokens > capacity_) {
    throw std::invalid_argument("initial tokens must fit the capacity");
  }
  // Initial tokens predate the simulation, so both sides have always seen
  // them; they live in the base counts rather than the event history.
  write_base_ = initial_tokens;
  for (int i = 0; i < initial_tokens; ++i) {
    tokens_.push_back(Token{i, 0, 0});
  }
}

std::int64_t DualClockFifo::count_at_or_before(
    const std::deque<HistEvent>& hist, SimTime t) {
  auto it = std::partition_point(
      hist.begin(), hist.end(),
      [t](const HistEvent& e) { return e.t <= t; });
  return it - hist.begin();
}

std::int64_t DualClockFifo::count_synced_at_or_before(
    const std::deque<HistEvent>& hist, SimTime t) {
  auto it = std::partition_point(
      hist.begin(), hist.end(),
      [t](const HistEvent& e) { return e.synced <= t; });
  return it - hist.begin();
}

int DualClockFifo::observed_occupancy(FifoSide side, SimTime t) const {
  if (side == FifoSide::writer) {
    const std::int64_t pushes = write_base_ + count_at_or_before(write_hist_, t);
    const std::int64_t pops = read_base_ + count_synced_at_or_before(read_hist_, t);
    return static_cast<int>(pushes - pops);
  }
  const std::int64_t pushes = write_base_ + count_synced_at_or_before(write_hist_, t);
  const std::int64_t pops = read_base_ + count_at_or_before(read_hist_, t);
  return static_cast<int>(pushes - pops);
}

int DualClockFifo::true_occupancy(SimTime t) const {
  const std::int64_t pushes = write_base_ + count_at_or_before(write_hist_, t);
  const std::int64_t pops = read_base_ + count_at_or_before(read_hist_, t);
  return static_cast<int>(pushes - pops);
}

bool DualClockFifo::try_push(const Token& tok, SimTime t) {
  if (!write_dom_->is_edge(t)) {
    throw std::invalid_argument("push attempted off a write-domain edge");
  }
  if (observed_occupancy(FifoSide::writer, t) >= capacity_) {
    return false;
  }
  tokens_.push_back(tok);
  write_hist_.push_back(HistEvent{t, read_dom_->sync_observe(t, w2r_)});
  maybe_auto_compact(t);
  return true;
}

std::optional<Token> DualClockFifo::try_pop(SimTime t) {
  if (!read_dom_->is_edge(t)) {
    throw std::invalid_argument("pop attempted off a read-domain edge");
  }
  if (observed_occupancy(FifoSide::reader, t) <= 0) {
    return std::nullopt;
  }
  Token tok = tokens_.front();
  tokens_.pop_front();
  read_hist_.push_back(HistEvent{t, write_dom_->sync_observe(t, r2w_)});
  maybe_auto_compact(t);
  return tok;
}

void DualClockFifo::compact(SimTime horizon) {
  while (!write_hist_.empty() && write_hist_.front().t <= horizon &&
         write_hist_.front().synced <= horizon) {
    write_hist_.pop_front();
    ++write_base_;
  }
  while (!read_hist_.empty() && read_hist_.front().t <= horizon &&
         read_hist_.front().synced <= horizon) {
    read_hist_.pop_front();
    ++read_base_;
  }
}

void DualClockFifo::maybe_auto_compact(SimTime t) {
  if (!auto_compact_) {
    return;
  }
  if (write_hist_.size() > kAutoCompactThreshold ||
      read_hist_.size() > kAutoCompactThreshold) {
    // Every event already happened at or before t and the engine only ever
    // queries at non-decreasing times, so t is a safe horizon.
    compact(t);
  }
}

void DualClockFifo::on_schedule_change(int domain_id, SimTime t_eff) {
  // A schedule change can only move destination edges at or after t_eff, so
  // any cached synchronization time in that range must be re-derived.
  if (domain_id == read_dom_->id()) {
    for (auto it = write_hist_.rbegin();
         it != write_hist_.rend() && it->synced >= t_eff; ++it) {
      it->synced = read_dom_->sync_observe(it->t, w2r_);
    }
  }
  if (domain_id == write_dom_->id()) {
    for (auto it = read_hist_.rbegin();
         it != read_hist_.rend() && it->synced >= t_eff; ++it) {
      it->synced = write_dom_->sync_observe(it->t, r2w_);
    }
  }
}

}  // namespace gcmp
