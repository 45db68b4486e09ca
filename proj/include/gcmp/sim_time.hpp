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

#ifndef GCMP_SIM_TIME_HPP
#define GCMP_SIM_TIME_HPP

#include <cmath>
#include <cstdint>

namespace gcmp {

// All simulation time is kept in integer femtoseconds, so unrelated clock
// frequencies never accumulate floating-point drift. 2^63 fs is roughly
// 2.5 hours of simulated time, far beyond any scenario this tool runs.
using SimTime = std::int64_t;

inline constexpr SimTime kFsPerSecond = 1'000'000'000'000'000LL;

inline SimTime from_seconds(double s) {
  return static_cast<SimTime>(
      std::llround(s * static_cast<double>(kFsPerSecond)));
}

inline double to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kFsPerSecond);
}

// Clock period in femtoseconds for a frequency in Hz, rounded to the
// nearest integer femtosecond.
inline SimTime period_from_hz(double hz) {
  return static_cast<SimTime>(
      std::llround(static_cast<double>(kFsPerSecond) / hz));
}

}  // namespace gcmp

#endif  // GCMP_SIM_TIME_HPP
