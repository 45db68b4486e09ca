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

#ifndef GCMP_SCENARIO_HPP
#define GCMP_SCENARIO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "gcmp/engine.hpp"
#include "gcmp/taskgraph.hpp"

namespace gcmp {

// Parse failure tied to a 1-based line of the scenario text; line == 0 for
// problems that span the whole file.
struct ScenarioError : std::runtime_error {
  ScenarioError(int line_no, const std::string& msg)
      : std::runtime_error(line_no > 0
                               ? "line " + std::to_string(line_no) + ": " + msg
                               : msg),
        line(line_no) {}

  int line = 0;
};

// Parses the INI-like scenario format documented in the README. Unknown
// sections and keys are rejected with their line number; structural
// references (node and channel indices) are range-checked. Semantic checks
// beyond that are validate_scenario()'s job.
Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

// Canonical text for a scenario; load_scenario(serialize_scenario(s)) == s.
// Scenarios with a generated graph are written as their generator spec plus
// per-channel deviations; throws std::logic_error if the graph no longer
// matches what its spec generates (convert such graphs to kind = explicit).
std::string serialize_scenario(const Scenario& s);

// Convenience constructor: generated graph and mapping, default clocks and
// governors, uniform synchronizer depth.
Scenario scenario_from_generator(GraphKind kind, const GenParams& params,
                                 std::uint64_t seed, int sync_stages = 2,
                                 bool remove_feedback = false);

// Parses a duration: bare integer femtoseconds, or a number suffixed with
// s/ms/us/ns. Throws ScenarioError on malformed input.
SimTime parse_time_value(const std::string& text);

}  // namespace gcmp

#endif  // GCMP_SCENARIO_HPP
