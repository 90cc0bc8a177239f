#include "ponsim/topo.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "ponsim/error.hpp"

namespace ponsim {

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Server: return "Server";
        case NodeKind::GatewayServer: return "GatewayServer";
        case NodeKind::RackSwitch: return "RackSwitch";
        case NodeKind::OpticalBackplane: return "OpticalBackplane";
        case NodeKind::Olt: return "Olt";
        case NodeKind::Onu: return "Onu";
        case NodeKind::Coupler: return "Coupler";
        case NodeKind::Awgr: return "Awgr";
        case NodeKind::CoreNode: return "CoreNode";
        case NodeKind::Camera: return "Camera";
    }
    return "?";
}

const char* to_string(Medium m) {
    return m == Medium::Copper ? "Copper" : "Fibre";
}

const char* to_string(InterconnectMode m) {
    return m == InterconnectMode::Tdm ? "Tdm" : "Awgr";
}

const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::UnknownEndpoint: return "UnknownEndpoint";
        case ViolationKind::SelfLoop: return "SelfLoop";
        case ViolationKind::NegativeLength: return "NegativeLength";
        case ViolationKind::NonPositiveRate: return "NonPositiveRate";
        case ViolationKind::NegativeDelay: return "NegativeDelay";
        case ViolationKind::MissingRackId: return "MissingRackId";
        case ViolationKind::ForbiddenRackId: return "ForbiddenRackId";
        case ViolationKind::MissingCellId: return "MissingCellId";
        case ViolationKind::Connectivity: return "Connectivity";
        case ViolationKind::MissingRackSwitch: return "MissingRackSwitch";
        case ViolationKind::MultipleRackSwitches: return "MultipleRackSwitches";
        case ViolationKind::MissingGateway: return "MissingGateway";
        case ViolationKind::BadProbeConfig: return "BadProbeConfig";
        case ViolationKind::BadJitterModel: return "BadJitterModel";
    }
    return "?";
}

void Topology::add_node(Node n) {
    if (n.id.empty()) throw InvalidArgument("node id must not be empty");
    if (nodes.count(n.id)) throw InvalidArgument("duplicate node id: " + n.id);
    adjacency_.emplace(n.id, std::vector<std::string>{});
    nodes.emplace(n.id, std::move(n));
}

void Topology::add_link(Link l) {
    if (l.id.empty()) throw InvalidArgument("link id must not be empty");
    if (links.count(l.id)) throw InvalidArgument("duplicate link id: " + l.id);
    if (!nodes.count(l.a)) throw InvalidArgument("link " + l.id + ": unknown endpoint " + l.a);
    if (!nodes.count(l.b)) throw InvalidArgument("link " + l.id + ": unknown endpoint " + l.b);
    if (l.a == l.b) throw InvalidArgument("link " + l.id + ": endpoints must differ");
    auto& la = adjacency_[l.a];
    la.insert(std::lower_bound(la.begin(), la.end(), l.id), l.id);
    auto& lb = adjacency_[l.b];
    lb.insert(std::lower_bound(lb.begin(), lb.end(), l.id), l.id);
    links.emplace(l.id, std::move(l));
}

const Node& Topology::node(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw InvalidArgument("unknown node: " + id);
    return it->second;
}

const Link& Topology::link(const std::string& id) const {
    auto it = links.find(id);
    if (it == links.end()) throw InvalidArgument("unknown link: " + id);
    return it->second;
}

const std::vector<std::string>& Topology::adjacent_links(const std::string& node_id) const {
    auto it = adjacency_.find(node_id);
    if (it == adjacency_.end()) throw InvalidArgument("unknown node: " + node_id);
    return it->second;
}

std::string Topology::other_end(const Link& l, const std::string& from) const {
    if (l.a == from) return l.b;
    if (l.b == from) return l.a;
    throw InvalidArgument("node " + from + " is not an endpoint of link " + l.id);
}

std::vector<std::string> Topology::neighbors(const std::string& node_id) const {
    std::set<std::string> out;
    for (const auto& lid : adjacent_links(node_id))
        out.insert(other_end(link(lid), node_id));
    return {out.begin(), out.end()};
}

std::vector<std::pair<std::string, std::string>> Topology::neighbor_links(
    const std::string& node_id) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& lid : adjacent_links(node_id))
        out.emplace_back(other_end(link(lid), node_id), lid);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

bool rack_member_kind(NodeKind k) {
    return k == NodeKind::Server || k == NodeKind::GatewayServer ||
           k == NodeKind::RackSwitch || k == NodeKind::OpticalBackplane;
}

bool cell_element_kind(NodeKind k) {
    return k == NodeKind::Coupler || k == NodeKind::Awgr || k == NodeKind::Olt;
}

} // namespace

std::vector<Violation> validate_topology(const Topology& t) {
    std::vector<Violation> out;

    for (const auto& [id, n] : t.nodes) {
        if (n.processing_delay_us < 0.0)
            out.push_back({ViolationKind::NegativeDelay, id,
                           "processing delay must be >= 0"});
        if (rack_member_kind(n.kind) && n.rack_id.empty())
            out.push_back({ViolationKind::MissingRackId, id,
                           std::string(to_string(n.kind)) + " requires a rack"});
        if (n.kind == NodeKind::CoreNode && !n.rack_id.empty())
            out.push_back({ViolationKind::ForbiddenRackId, id,
                           "core nodes belong to no rack"});
        if (cell_element_kind(n.kind) && n.cell_id.empty())
            out.push_back({ViolationKind::MissingCellId, id,
                           std::string(to_string(n.kind)) + " requires a cell"});
    }

    for (const auto& [id, l] : t.links) {
        if (!t.nodes.count(l.a))
            out.push_back({ViolationKind::UnknownEndpoint, id, "endpoint " + l.a});
        if (!t.nodes.count(l.b))
            out.push_back({ViolationKind::UnknownEndpoint, id, "endpoint " + l.b});
        if (l.a == l.b)
            out.push_back({ViolationKind::SelfLoop, id, "endpoints are equal"});
        if (l.length_km < 0.0)
            out.push_back({ViolationKind::NegativeLength, id, "length must be >= 0"});
        if (l.rate_gbps <= 0.0)
            out.push_back({ViolationKind::NonPositiveRate, id, "rate must be > 0"});
    }

    // Rack composition: exactly one switching element, at least one gateway.
    std::map<std::string, std::pair<int, int>> racks; // rack -> (switches, gateways)
    for (const auto& [id, n] : t.nodes) {
        if (n.rack_id.empty()) continue;
        auto& [switches, gateways] = racks[n.rack_id];
        if (n.kind == NodeKind::RackSwitch || n.kind == NodeKind::OpticalBackplane)
            ++switches;
        if (n.kind == NodeKind::GatewayServer) ++gateways;
    }
    for (const auto& [rack, counts] : racks) {
        if (counts.first == 0)
            out.push_back({ViolationKind::MissingRackSwitch, rack,
                           "rack has no switching element"});
        if (counts.first > 1)
            out.push_back({ViolationKind::MultipleRackSwitches, rack,
                           "rack has more than one switching element"});
        if (counts.second == 0)
            out.push_back({ViolationKind::MissingGateway, rack,
                           "rack has no gateway server"});
    }

    // Connectivity over the undirected graph.
    if (!t.nodes.empty()) {
        std::set<std::string> seen;
        std::queue<std::string> frontier;
        frontier.push(t.nodes.begin()->first);
        seen.insert(t.nodes.begin()->first);
        while (!frontier.empty()) {
            auto cur = frontier.front();
            frontier.pop();
            for (const auto& lid : t.adjacent_links(cur)) {
                const auto& l = t.link(lid);
                for (const auto& nb : {l.a, l.b}) {
                    if (t.nodes.count(nb) && seen.insert(nb).second) frontier.push(nb);
                }
            }
        }
        for (const auto& [id, n] : t.nodes) {
            if (!seen.count(id))
                out.push_back({ViolationKind::Connectivity, id,
                               "node unreachable from " + t.nodes.begin()->first});
        }
    }

    return out;
}

std::vector<Violation> validate_scenario(const ScenarioConfig& c) {
    std::vector<Violation> out = validate_topology(c.topology);
    const auto& p = c.probe;
    if (p.iterations <= 0 || p.probes_per_run <= 0 || p.probe_size_bytes <= 0 ||
        p.inter_probe_gap_us <= 0.0)
        out.push_back({ViolationKind::BadProbeConfig, "probe",
                       "iterations, probes, size and gap must all be positive"});
    if (c.jitter.kind == JitterKind::None && c.jitter.half_width_us != 0.0)
        out.push_back({ViolationKind::BadJitterModel, "jitter",
                       "half width must be zero when jitter is off"});
    if (c.jitter.half_width_us < 0.0)
        out.push_back({ViolationKind::BadJitterModel, "jitter",
                       "half width must be >= 0"});
    return out;
}

Topology build_rack(const std::string& rack_id, int n_servers, int n_gateways,
                    double link_rate_gbps) {
    if (rack_id.empty()) throw InvalidArgument("rack id must not be empty");
    if (n_servers < 1) throw InvalidArgument("a rack needs at least one server");
    if (n_gateways < 1 || n_gateways > n_servers)
        throw InvalidArgument("gateway count must be in [1, n_servers]");
    if (link_rate_gbps <= 0.0) throw InvalidArgument("link rate must be positive");

    Topology t;
    const std::string sw = rack_id + "-SW";
    t.add_node({sw, NodeKind::RackSwitch, rack_id, "", 0.0});
    for (int i = 1; i <= n_servers; ++i) {
        const bool gateway = i <= n_gateways;
        const std::string id =
            rack_id + (gateway ? "-G" : "-S") + std::to_string(i);
        t.add_node({id, gateway ? NodeKind::GatewayServer : NodeKind::Server,
                    rack_id, "", 0.0});
        t.add_link({id + "--" + sw, id, sw, 0.0, link_rate_gbps, Medium::Copper});
    }
    return t;
}

Topology build_cell(const std::string& cell_id, int racks, int servers_per_rack,
                    double link_rate_gbps) {
    if (racks < 1) throw InvalidArgument("a cell needs at least one rack");

    Topology t;
    std::vector<std::string> gateways;
    for (int r = 1; r <= racks; ++r) {
        const std::string rack_id = cell_id + "-R" + std::to_string(r);
        Topology rack = build_rack(rack_id, servers_per_rack, 1, link_rate_gbps);
        for (auto& [id, n] : rack.nodes) {
            n.cell_id = cell_id;
            t.add_node(n);
        }
        for (auto& [id, l] : rack.links) t.add_link(l);
        gateways.push_back(rack_id + "-G1");
    }
    // Transit mesh between rack gateways, zero-length optical patch links.
    for (std::size_t i = 0; i < gateways.size(); ++i)
        for (std::size_t j = i + 1; j < gateways.size(); ++j)
            t.add_link({gateways[i] + "--" + gateways[j], gateways[i], gateways[j],
                        0.0, link_rate_gbps, Medium::Fibre});
    return t;
}

std::pair<std::string, std::string> reference_endpoints(const Topology& t) {
    std::string first, last;
    for (const auto& [id, n] : t.nodes) {
        if (n.kind != NodeKind::Server) continue;
        if (first.empty()) first = id;
        last = id;
    }
    if (first.empty() || first == last)
        throw InvalidArgument("scenario needs at least two plain servers");
    return {first, last};
}

} // namespace ponsim
