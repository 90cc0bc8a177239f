#pragma once

#include <iosfwd>
#include <string>

#include "ponsim/topo.hpp"

namespace ponsim {

// Scenario document layout (JSON):
//   {
//     "nodes": [{"id", "kind", "rack"?, "cell"?, "processing_delay_us"?}, ...],
//     "links": [{"id", "a", "b", "length_km", "rate_gbps", "medium"}, ...],
//     "interconnect_mode": "Tdm" | "Awgr",
//     "seed": <uint64>,
//     "probe": {"iterations", "probes_per_run", "probe_size_bytes",
//               "inter_probe_gap_us"},
//     "jitter": {"kind": "None"|"Uniform", "half_width_us"}
//   }
// Unknown keys are rejected. Times are microseconds, distances km, rates
// Gbps, written with full round-trip precision.

// Throws IoError (unreadable file), ParseError (syntax or schema trouble,
// with position info), or ValidationError (well-formed but invariant-
// breaking content).
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& text);

void save_scenario(const ScenarioConfig& c, const std::string& path);
std::string serialize_scenario(const ScenarioConfig& c);

// Accepts a filesystem path or a builtin name: "builtin:ref8" for the
// reference testbed, "builtin:prior5" for the earlier five-node one.
ScenarioConfig load_scenario_or_builtin(const std::string& spec);

} // namespace ponsim
