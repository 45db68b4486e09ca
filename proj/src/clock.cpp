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

#include "gcmp/clock.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gcmp {

namespace {

void check_positive_freq(double hz) {
  if (!(hz > 0)) {
    throw std::invalid_argument("clock frequency must be positive");
  }
}

}  // namespace

ClockDomain::ClockDomain(int id, double freq_hz, SimTime phase)
    : ClockDomain(id, freq_hz, {freq_hz}, freq_hz, freq_hz, phase) {}

ClockDomain::ClockDomain(int id, double freq_hz, std::vector<double> levels,
                         double f_min, double f_max, SimTime phase)
    : id_(id), f_min_(f_min), f_max_(f_max), levels_(std::move(levels)) {
  check_positive_freq(freq_hz);
  if (levels_.empty()) {
    throw std::invalid_argument("clock level set must not be empty");
  }
  std::sort(levels_.begin(), levels_.end());
  for (double f : levels_) {
    check_positive_freq(f);
    if (f < f_min_ || f > f_max_) {
      throw std::invalid_argument("clock level outside [f_min, f_max]");
    }
  }
  if (std::find(levels_.begin(), levels_.end(), freq_hz) == levels_.end()) {
    throw std::invalid_argument("initial frequency is not in the level set");
  }
  segments_.push_back(Segment{phase, period_from_hz(freq_hz), freq_hz, 0});
}

SimTime ClockDomain::edge_at(std::int64_t n) const {
  if (n < 0) {
    throw std::invalid_argument("edge index must be non-negative");
  }
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), n,
      [](std::int64_t v, const Segment& s) { return v < s.base_index; });
  const Segment& s = *std::prev(it);
  return s.first_edge + (n - s.base_index) * s.period;
}

std::int64_t ClockDomain::edge_index_after(SimTime t, bool strict) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](SimTime v, const Segment& s) { return v < s.first_edge; });
  if (it == segments_.begin()) {
    return 0;  // every edge lies at or after the first segment start
  }
  const Segment& s = *std::prev(it);
  const SimTime delta = t - s.first_edge;  // >= 0
  std::int64_t k;
  if (strict) {
    k = delta / s.period + 1;
  } else {
    k = (delta + s.period - 1) / s.period;
  }
  const std::int64_t idx = s.base_index + k;
  // Times past the segment's last edge resolve to the next segment's start.
  if (it != segments_.end() && idx >= it->base_index) {
    return it->base_index;
  }
  return idx;
}

SimTime ClockDomain::next_edge_after(SimTime t, bool strict) const {
  return edge_at(edge_index_after(t, strict));
}

double ClockDomain::frequency_at(SimTime t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](SimTime v, const Segment& s) { return v < s.first_edge; });
  if (it == segments_.begin()) {
    return segments_.front().freq;
  }
  return std::prev(it)->freq;
}

SimTime ClockDomain::set_frequency(double f_new, SimTime t_cmd) {
  check_positive_freq(f_new);
  if (f_new < f_min_ || f_new > f_max_) {
    throw std::invalid_argument("requested frequency " +
                                std::to_string(f_new) +
                                " Hz is outside the supported range");
  }
  const std::int64_t idx = edge_index_after(t_cmd, true);
  const SimTime t_eff = edge_at(idx);
  // Segments that would only start at or after the new one never emitted an
  // edge, so they are superseded outright.
  while (!segments_.empty() && segments_.back().base_index >= idx) {
    segments_.pop_back();
  }
  segments_.push_back(Segment{t_eff, period_from_hz(f_new), f_new, idx});
  return t_eff;
}

SimTime ClockDomain::sync_observe(SimTime t_src, const SyncConfig& cfg) const {
  if (cfg.stages < 0) {
    throw std::invalid_argument("synchronizer stages must be non-negative");
  }
  if (cfg.stages == 0) {
    return t_src;
  }
  const std::int64_t idx = edge_index_after(t_src, true);
  return edge_at(idx + cfg.stages - 1);
}

}  // namespace gcmp
