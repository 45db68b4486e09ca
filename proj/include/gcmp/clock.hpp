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

#ifndef GCMP_CLOCK_HPP
#define GCMP_CLOCK_HPP

#include <cstdint>
#include <vector>

#include "gcmp/sim_time.hpp"

namespace gcmp {

// Synchronizer depth for one crossing direction, counted in destination
// domain cycles. stages == 0 models an ideal synchronous boundary where
// values are visible immediately.
struct SyncConfig {
  int stages = 2;

  bool operator==(const SyncConfig&) const = default;
};

// One processing element's clock. The edge schedule is a list of constant
// frequency segments; set_frequency appends a segment starting at the first
// edge strictly after the command time, so edges that already happened (or
// are about to happen under the old schedule) never move.
class ClockDomain {
 public:
  ClockDomain(int id, double freq_hz, SimTime phase = 0);
  ClockDomain(int id, double freq_hz, std::vector<double> levels,
              double f_min, double f_max, SimTime phase = 0);

  int id() const { return id_; }
  double f_min() const { return f_min_; }
  double f_max() const { return f_max_; }
  const std::vector<double>& levels() const { return levels_; }

  // Time of the n-th rising edge, n >= 0, under the current schedule.
  SimTime edge_at(std::int64_t n) const;

  // Index of the first edge at time >= t (or > t when strict).
  std::int64_t edge_index_after(SimTime t, bool strict) const;

  // Time of the first edge at time >= t (or > t when strict).
  SimTime next_edge_after(SimTime t, bool strict) const;

  bool is_edge(SimTime t) const { return next_edge_after(t, false) == t; }

  // Frequency of the segment whose edges cover time t.
  double frequency_at(SimTime t) const;

  // Retunes the domain to f_new, effective at the first edge strictly after
  // t_cmd under the current schedule. Returns the effective time. f_new must
  // lie within [f_min, f_max]; governors additionally keep it on the level
  // grid, but the domain itself only enforces the range.
  SimTime set_frequency(double f_new, SimTime t_cmd);

  // Time at which a value produced at t_src in another domain becomes
  // observable in this domain: the cfg.stages-th rising edge strictly after
  // t_src. With stages == 0 the value is visible at t_src itself.
  SimTime sync_observe(SimTime t_src, const SyncConfig& cfg) const;

 private:
  struct Segment {
    SimTime first_edge = 0;
    SimTime period = 1;
    double freq = 0;
    std::int64_t base_index = 0;  // global index of first_edge
  };

  int id_ = 0;
  double f_min_ = 0;
  double f_max_ = 0;
  std::vector<double> levels_;
  std::vector<Segment> segments_;
};

}  // namespace gcmp

#endif  // GCMP_CLOCK_HPP
