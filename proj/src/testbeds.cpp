#include "ponsim/probes.hpp"
#include "ponsim/topo.hpp"

namespace ponsim {

namespace {

void merge_into(Topology& t, const Topology& part) {
    for (const auto& [id, n] : part.nodes) t.add_node(n);
    for (const auto& [id, l] : part.links) t.add_link(l);
}

// Common frame of both builtin testbeds: processing cell A with a camera on
// its first rack, an OLT behind a passive splitting stage, and a single-rack
// far cell B fed by the ONU. The caller wires cell A's uplink gateway to the
// core chain or straight into the OLT.
ScenarioConfig assemble(InterconnectMode mode, bool with_core) {
    Topology t;
    t.interconnect_mode = mode;

    merge_into(t, build_cell("A", 3));
    t.add_node({"CAM1", NodeKind::Camera, "A-R1", "A", 0.0});
    t.add_link({"CAM1--A-R1-SW", "CAM1", "A-R1-SW", 0.0, 1.0, Medium::Copper});

    const char* splitter = mode == InterconnectMode::Tdm ? "CPL1" : "AWG1";
    t.add_node({"OLT1", NodeKind::Olt, "", "PON", 0.0});
    t.add_node({splitter,
                mode == InterconnectMode::Tdm ? NodeKind::Coupler : NodeKind::Awgr,
                "", "PON", 0.0});
    t.add_node({"ONU1", NodeKind::Onu, "", "PON", 0.0});
    t.add_link({std::string("OLT1--") + splitter, "OLT1", splitter, 0.0, 10.0,
                Medium::Fibre});
    t.add_link({std::string(splitter) + "--ONU1", splitter, "ONU1", 0.0, 10.0,
                Medium::Fibre});

    if (with_core) {
        // Metro chain: 40 km of inter-node spans plus a 75 km haul to the
        // OLT. The long final span carries most of the published extra
        // core-to-OLT latency as propagation.
        t.add_node({"CORE1", NodeKind::CoreNode, "", "", 0.0});
        t.add_node({"CORE2", NodeKind::CoreNode, "", "", 0.0});
        t.add_node({"CORE3", NodeKind::CoreNode, "", "", 0.0});
        t.add_link({"A-R3-G1--CORE1", "A-R3-G1", "CORE1", 0.0, 10.0, Medium::Fibre});
        t.add_link({"CORE1--CORE2", "CORE1", "CORE2", 20.0, 100.0, Medium::Fibre});
        t.add_link({"CORE2--CORE3", "CORE2", "CORE3", 20.0, 100.0, Medium::Fibre});
        t.add_link({"CORE3--OLT1", "CORE3", "OLT1", 75.0, 100.0, Medium::Fibre});
    } else {
        t.add_link({"A-R3-G1--OLT1", "A-R3-G1", "OLT1", 0.0, 10.0, Medium::Fibre});
    }

    merge_into(t, build_cell("B", 1));
    t.add_link({"ONU1--B-R1-SW", "ONU1", "B-R1-SW", 0.0, 10.0, Medium::Copper});

    ScenarioConfig cfg;
    cfg.topology = std::move(t);
    cfg.seed = 1;

    for (const auto& [id, proc] : calibrate_processing_delays(cfg.topology))
        cfg.topology.nodes.at(id).processing_delay_us = proc;
    return cfg;
}

} // namespace

ScenarioConfig build_reference_testbed(InterconnectMode mode) {
    return assemble(mode, true);
}

ScenarioConfig build_prior_testbed(InterconnectMode mode) {
    return assemble(mode, false);
}

} // namespace ponsim
