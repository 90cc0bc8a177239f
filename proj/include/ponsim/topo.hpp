#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ponsim/config.hpp"

namespace ponsim {

enum class NodeKind {
    Server,
    GatewayServer,
    RackSwitch,
    OpticalBackplane,
    Olt,
    Onu,
    Coupler,
    Awgr,
    CoreNode,
    Camera,
};

enum class Medium { Copper, Fibre };

enum class InterconnectMode { Tdm, Awgr };

const char* to_string(NodeKind k);
const char* to_string(Medium m);
const char* to_string(InterconnectMode m);

// Empty rack_id / cell_id mean "not a member of any rack / cell".
struct Node {
    std::string id;
    NodeKind kind = NodeKind::Server;
    std::string rack_id;
    std::string cell_id;
    double processing_delay_us = 0.0;
    // C-band wavelength capability of optical-core elements. Not part of the
    // scenario file format; builders leave it at the default.
    int wavelengths = 80;

    bool operator==(const Node&) const = default;
};

// Bidirectional point-to-point link. rate_gbps applies per direction.
struct Link {
    std::string id;
    std::string a;
    std::string b;
    double length_km = 0.0;
    double rate_gbps = 10.0;
    Medium medium = Medium::Fibre;

    bool operator==(const Link&) const = default;
};

class Topology {
public:
    std::map<std::string, Node> nodes;
    std::map<std::string, Link> links;
    InterconnectMode interconnect_mode = InterconnectMode::Tdm;

    // Both throw InvalidArgument on duplicate ids; add_link also requires
    // both endpoints to exist and to be distinct.
    void add_node(Node n);
    void add_link(Link l);

    const Node& node(const std::string& id) const;
    const Link& link(const std::string& id) const;
    bool has_node(const std::string& id) const { return nodes.count(id) != 0; }

    // Link ids incident to a node, sorted.
    const std::vector<std::string>& adjacent_links(const std::string& node_id) const;
    // Neighbour node ids, sorted and deduplicated.
    std::vector<std::string> neighbors(const std::string& node_id) const;
    std::string other_end(const Link& l, const std::string& from) const;
    // Sorted (neighbor, link id) pairs, one per incident link. Parallel links
    // appear once each; ordering is (neighbor id, link id).
    std::vector<std::pair<std::string, std::string>> neighbor_links(const std::string& node_id) const;

    bool operator==(const Topology& rhs) const {
        return nodes == rhs.nodes && links == rhs.links &&
               interconnect_mode == rhs.interconnect_mode;
    }

private:
    std::map<std::string, std::vector<std::string>> adjacency_;
};

struct ScenarioConfig {
    Topology topology;
    std::uint64_t seed = 1;
    ProbeConfig probe;
    JitterModel jitter;

    bool operator==(const ScenarioConfig&) const = default;
};

enum class ViolationKind {
    UnknownEndpoint,
    SelfLoop,
    NegativeLength,
    NonPositiveRate,
    NegativeDelay,
    MissingRackId,
    ForbiddenRackId,
    MissingCellId,
    Connectivity,
    MissingRackSwitch,
    MultipleRackSwitches,
    MissingGateway,
    BadProbeConfig,
    BadJitterModel,
};

const char* to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string entity_id;
    std::string detail;
};

// Structural checks, reported as values. Empty result means valid.
std::vector<Violation> validate_topology(const Topology& t);
// Topology checks plus probe/jitter sanity for a full scenario.
std::vector<Violation> validate_scenario(const ScenarioConfig& c);

// One rack star: a rack switch plus n_servers servers, the first n_gateways
// of which are gateway servers. Node ids are <rack>-SW, <rack>-G1..,
// <rack>-S<k+1>..; every server links to the switch over copper at
// link_rate_gbps. Throws InvalidArgument on nonsensical counts.
Topology build_rack(const std::string& rack_id, int n_servers, int n_gateways,
                    double link_rate_gbps);

// A processing cell: `racks` three-server racks named <cell>-R1.. with one
// gateway each, gateways fully meshed over zero-length fibre transit links.
Topology build_cell(const std::string& cell_id, int racks,
                    int servers_per_rack = 3, double link_rate_gbps = 10.0);

// Reference end-to-end testbed: processing cell A (3 racks x 3 servers plus
// a camera), a three-node core chain over 115 km of fibre, an
// OLT-coupler-ONU segment, and a single-rack far cell B. Processing delays
// come back calibrated so the designated end-to-end path reproduces the
// published per-hop round-trip pattern. Defined in testbeds.cpp.
ScenarioConfig build_reference_testbed(InterconnectMode mode = InterconnectMode::Tdm);

// The earlier, smaller testbed: identical construction minus the core chain
// (cell A uplinks straight into the OLT). Five tested nodes end to end.
ScenarioConfig build_prior_testbed(InterconnectMode mode = InterconnectMode::Tdm);

// Designated measurement endpoints of a scenario: lexicographically first
// and last plain Server node. Throws InvalidArgument if there are fewer
// than two plain servers.
std::pair<std::string, std::string> reference_endpoints(const Topology& t);

} // namespace ponsim
