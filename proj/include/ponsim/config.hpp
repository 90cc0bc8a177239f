#pragma once

#include <compare>

namespace ponsim {

// Probe campaign shape. Defaults mirror the reference measurement method:
// ten independent runs of 150 probes per hop, 64-byte echo payloads, one
// probe per millisecond.
struct ProbeConfig {
    int iterations = 10;
    int probes_per_run = 150;
    int probe_size_bytes = 64;
    double inter_probe_gap_us = 1000.0;

    bool operator==(const ProbeConfig&) const = default;
};

enum class JitterKind { None, Uniform };

// Per-forwarding-node latency noise. Uniform draws lie in
// [-half_width_us, +half_width_us]; None must keep half_width_us at zero.
struct JitterModel {
    JitterKind kind = JitterKind::Uniform;
    double half_width_us = 30.0;

    static JitterModel none() { return {JitterKind::None, 0.0}; }

    bool operator==(const JitterModel&) const = default;
};

} // namespace ponsim
