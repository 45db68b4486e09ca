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

#include "gcmp/dfs.hpp"

#include <algorithm>
#include <stdexcept>

namespace gcmp {

double nearest_level(double raw, const std::vector<double>& levels) {
  if (levels.empty()) {
    throw std::invalid_argument("frequency level set must not be empty");
  }
  auto it = std::lower_bound(levels.begin(), levels.end(), raw);
  if (it == levels.end()) return levels.back();
  if (it == levels.begin()) return levels.front();
  const double above = *it;
  const double below = *std::prev(it);
  // Ties go up: a controller sitting exactly between two settings should
  // err toward meeting its throughput target.
  return (raw - below < above - raw) ? below : above;
}

PidController::PidController(double kp, double ki, double kd,
                             double setpoint_tokens_per_s,
                             double f_nominal_hz)
    : kp_(kp), ki_(ki), kd_(kd), setpoint_(setpoint_tokens_per_s),
      f_nominal_(f_nominal_hz) {
  if (!(setpoint_ > 0)) {
    throw std::invalid_argument("pid setpoint must be positive");
  }
  if (!(f_nominal_ > 0)) {
    throw std::invalid_argument("pid nominal frequency must be positive");
  }
}

double PidController::step(const WindowSample& sample,
                           const std::vector<double>& levels) {
  if (levels.empty()) {
    throw std::invalid_argument("frequency level set must not be empty");
  }
  if (sample.end <= sample.start) {
    throw std::invalid_argument("window sample must have positive duration");
  }
  const double window_s = to_seconds(sample.end - sample.start);
  const double measured =
      static_cast<double>(sample.tokens_completed) / window_s;
  const double e = (setpoint_ - measured) / setpoint_;

  const double u_min = levels.front() / f_nominal_ - 1.0;
  const double u_max = levels.back() / f_nominal_ - 1.0;
  const double d = kd_ * (e - prev_error_);

  // Conditional integration: accept the new integral only if it does not
  // push an already-saturated output further into saturation.
  const double grown = integral_ + e;
  const double u_grown = kp_ * e + ki_ * grown + d;
  const bool windup_high = u_grown > u_max && e > 0;
  const bool windup_low = u_grown < u_min && e < 0;
  if (!windup_high && !windup_low) {
    integral_ = grown;
  }

  double u = kp_ * e + ki_ * integral_ + d;
  u = std::clamp(u, u_min, u_max);

  prev_error_ = e;
  return nearest_level(f_nominal_ * (1.0 + u), levels);
}

double governor_step(GovernorKind kind, double busy_fraction, double current,
                     const std::vector<double>& levels, double up_threshold,
                     double down_threshold) {
  if (kind == GovernorKind::None || kind == GovernorKind::Static) {
    return current;
  }
  if (levels.empty()) {
    throw std::invalid_argument("frequency level set must not be empty");
  }
  auto it = std::lower_bound(levels.begin(), levels.end(), current);
  std::size_t idx = (it == levels.end())
                        ? levels.size() - 1
                        : static_cast<std::size_t>(it - levels.begin());
  if (kind == GovernorKind::OnDemand) {
    if (busy_fraction > up_threshold) {
      idx = levels.size() - 1;
    } else if (busy_fraction < down_threshold && idx > 0) {
      idx--;
    }
  } else {  // Conservative
    if (busy_fraction > up_threshold && idx + 1 < levels.size()) {
      idx++;
    } else if (busy_fraction < down_threshold && idx > 0) {
      idx--;
    }
  }
  return levels[idx];
}

double voltage_of(double f, const PowerModel& m) {
  if (!(m.v_min <= m.v_max) || !(m.f_min <= m.f_max) || !(m.v_min > 0) ||
      !(m.f_min > 0)) {
    throw std::invalid_argument("power model parameters are inconsistent");
  }
  if (f < m.f_min || f > m.f_max) {
    throw std::out_of_range("frequency outside the voltage map's range");
  }
  if (m.f_max == m.f_min) return m.v_max;
  return m.v_min + (m.v_max - m.v_min) * (f - m.f_min) / (m.f_max - m.f_min);
}

double power_of(double f, const PowerModel& m) {
  const double v = voltage_of(f, m);
  return m.alpha_c * v * v * f + m.leakage * v;
}

double trace_energy(const std::vector<FreqSpan>& trace, SimTime t_begin,
                    SimTime t_end, const PowerModel& m) {
  if (t_end < t_begin) {
    throw std::invalid_argument("energy window must not be reversed");
  }
  if (trace.empty()) {
    throw std::invalid_argument("frequency trace must not be empty");
  }
  if (trace.front().start > t_begin) {
    throw std::invalid_argument("frequency trace does not cover the window");
  }
  double joules = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i + 1 < trace.size() && trace[i + 1].start <= trace[i].start) {
      throw std::invalid_argument(
          "frequency trace spans must strictly increase");
    }
    const SimTime span_begin = std::max(trace[i].start, t_begin);
    const SimTime span_end =
        std::min(i + 1 < trace.size() ? trace[i + 1].start : t_end, t_end);
    if (span_end <= span_begin) continue;
    joules += power_of(trace[i].freq, m) * to_seconds(span_end - span_begin);
  }
  return joules;
}

}  // namespace gcmp
