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

#ifndef GCMP_TESTS_REF_SIM_HPP
#define GCMP_TESTS_REF_SIM_HPP

#include "gcmp/engine.hpp"

namespace gcmp_test {

// Reference single-clock model: every node ticks on one shared clock and
// channels are plain bounded queues read and written in the same instant,
// with no event queue, no clock-domain objects, and no staleness machinery.
// Only supports what it is an oracle for: uniform static clocks at phase 0,
// zero synchronizer stages everywhere, point-to-point links. The engine must
// produce bit-identical Metrics on such scenarios.
gcmp::Metrics ref_run(const gcmp::Scenario& s);

}  // namespace gcmp_test

#endif  // GCMP_TESTS_REF_SIM_HPP
