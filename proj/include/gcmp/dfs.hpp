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

#ifndef GCMP_DFS_HPP
#define GCMP_DFS_HPP

#include <cstdint>
#include <vector>

#include "gcmp/sim_time.hpp"

namespace gcmp {

// One measurement window as seen by a governor.
struct WindowSample {
  SimTime start = 0;
  SimTime end = 0;
  std::int64_t tokens_completed = 0;  // firings finished inside the window
  std::int64_t busy_cycles = 0;       // compute + transfer-progress edges
  std::int64_t total_cycles = 0;      // all local edges in the window
};

// Snaps to the closest level; an exact midpoint resolves to the higher
// level. Input outside the grid clamps to the nearest end.
double nearest_level(double raw, const std::vector<double>& levels);

// Throughput-setpoint controller on normalized error. The output is a
// multiplicative correction around f_nominal, snapped to the level grid.
// Anti-windup is conditional integration: the integral does not accumulate
// while the (pre-clamp) output is saturated in the error's own direction.
class PidController {
 public:
  PidController(double kp, double ki, double kd, double setpoint_tokens_per_s,
                double f_nominal_hz);

  // levels must be sorted ascending and non-empty; the return value is a
  // member of it.
  double step(const WindowSample& sample, const std::vector<double>& levels);

  double integral() const { return integral_; }
  double prev_error() const { return prev_error_; }

 private:
  double kp_, ki_, kd_;
  double setpoint_;
  double f_nominal_;
  double integral_ = 0;
  double prev_error_ = 0;
};

enum class GovernorKind { None, Static, Pid, OnDemand, Conservative };

// Busy-fraction policies. ondemand jumps straight to the top level on load
// and creeps down, conservative moves one level at a time in both
// directions, static holds.
double governor_step(GovernorKind kind, double busy_fraction, double current,
                     const std::vector<double>& levels, double up_threshold,
                     double down_threshold);

struct PowerModel {
  double alpha_c = 1.0;   // switched capacitance coefficient, J*s/V^2
  double v_min = 0.8;     // volts at f_min
  double v_max = 1.3;     // volts at f_max
  double f_min = 0;       // Hz; the V(f) map's domain
  double f_max = 0;
  double leakage = 0.0;   // W/V

  bool operator==(const PowerModel&) const = default;
};

// Linear V(f) map over [f_min, f_max]. Out-of-range f throws.
double voltage_of(double f, const PowerModel& m);

// Instantaneous power at frequency f: alpha_c * V^2 * f + leakage * V.
double power_of(double f, const PowerModel& m);

struct FreqSpan {
  SimTime start = 0;
  double freq = 0;

  bool operator==(const FreqSpan&) const = default;
};

// Integrates power over [t_begin, t_end). Span i covers from its start to
// the next span's start (the last one runs to t_end); spans must be ordered
// with strictly increasing start times and cover t_begin.
double trace_energy(const std::vector<FreqSpan>& trace, SimTime t_begin,
                    SimTime t_end, const PowerModel& m);

}  // namespace gcmp

#endif  // GCMP_DFS_HPP
