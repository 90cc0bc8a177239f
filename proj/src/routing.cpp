#include "ponsim/routing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ponsim/error.hpp"

namespace ponsim {

bool is_ip_forwarder(NodeKind k) {
    return k == NodeKind::GatewayServer || k == NodeKind::CoreNode ||
           k == NodeKind::Olt || k == NodeKind::Onu;
}

bool can_transit(NodeKind k) {
    return is_ip_forwarder(k) || k == NodeKind::RackSwitch ||
           k == NodeKind::OpticalBackplane || k == NodeKind::Coupler ||
           k == NodeKind::Awgr;
}

const NextHop& ForwardingTables::lookup(const std::string& at,
                                        const std::string& dst) const {
    auto node_it = next_hop.find(at);
    if (node_it == next_hop.end())
        throw UnreachableError("no forwarding table for node " + at);
    auto it = node_it->second.find(dst);
    if (it == node_it->second.end())
        throw UnreachableError("no route from " + at + " to " + dst);
    return it->second;
}

bool ForwardingTables::has_entry(const std::string& at, const std::string& dst) const {
    auto node_it = next_hop.find(at);
    return node_it != next_hop.end() && node_it->second.count(dst) != 0;
}

namespace {

// Reverse BFS from dst over the relay graph: only transit-capable nodes may
// sit in the interior. Fills hops[v] and toward[v] = (next node, link) for
// every node that can reach dst. Tie-break per layer: smallest next-hop
// node id, then smallest link id.
void shortest_toward(const Topology& t, const std::string& dst,
                     std::map<std::string, NextHop>& toward) {
    std::map<std::string, int> hops;
    hops[dst] = 0;
    std::vector<std::string> frontier{dst};
    while (!frontier.empty()) {
        std::map<std::string, NextHop> best; // candidate next hops this layer
        for (const auto& w : frontier) {
            if (w != dst && !can_transit(t.node(w).kind)) continue;
            for (const auto& [nb, lid] : t.neighbor_links(w)) {
                if (hops.count(nb)) continue;
                NextHop cand{w, lid};
                auto it = best.find(nb);
                if (it == best.end() || std::tie(cand.node, cand.link) <
                                            std::tie(it->second.node, it->second.link))
                    best[nb] = cand;
            }
        }
        const int layer = hops[frontier.front()] + 1;
        frontier.clear();
        for (auto& [v, nh] : best) {
            hops[v] = layer;
            toward[v] = nh;
            frontier.push_back(v);
        }
    }
}

const std::string* first_gateway_of_rack(const Topology& t, const std::string& rack) {
    for (const auto& [id, n] : t.nodes)
        if (n.kind == NodeKind::GatewayServer && n.rack_id == rack) return &id;
    return nullptr;
}

} // namespace

ForwardingTables compute_forwarding_tables(const Topology& t, const AddressPlan&) {
    ForwardingTables tables;

    // toward[d][v] = next hop at v on the shortest relay path v -> d.
    std::map<std::string, std::map<std::string, NextHop>> toward;
    for (const auto& [d, nd] : t.nodes) shortest_toward(t, d, toward[d]);

    for (const auto& [u, nu] : t.nodes) {
        auto& row = tables.next_hop[u];
        const bool plain_host =
            nu.kind == NodeKind::Server || nu.kind == NodeKind::Camera;
        const std::string* gw =
            plain_host && !nu.rack_id.empty() ? first_gateway_of_rack(t, nu.rack_id)
                                              : nullptr;
        for (const auto& [d, ndn] : t.nodes) {
            if (d == u) continue;
            // Hosts send everything bound outside their rack through the
            // rack gateway, whatever shortcut links exist.
            if (gw && *gw != u && ndn.rack_id != nu.rack_id) {
                auto it = toward[*gw].find(u);
                if (it != toward[*gw].end()) {
                    row[d] = it->second;
                    continue;
                }
            }
            auto it = toward[d].find(u);
            if (it != toward[d].end()) row[d] = it->second;
        }
    }

    // Every server pair must be connected.
    std::vector<std::string> servers;
    for (const auto& [id, n] : t.nodes)
        if (n.kind == NodeKind::Server || n.kind == NodeKind::GatewayServer)
            servers.push_back(id);
    for (const auto& a : servers)
        for (const auto& b : servers)
            if (a != b && !tables.has_entry(a, b))
                throw UnreachableError("no policy-compliant route from " + a + " to " + b);

    return tables;
}

Route route(const ForwardingTables& tables, const std::string& src,
            const std::string& dst) {
    Route r;
    r.nodes.push_back(src);
    if (src == dst) return r;

    std::string at = src;
    // A well-formed table never revisits a node; bound the walk anyway.
    const std::size_t limit = tables.next_hop.size() + 1;
    while (at != dst) {
        if (r.nodes.size() > limit)
            throw UnreachableError("forwarding loop between " + src + " and " + dst);
        const NextHop& nh = tables.lookup(at, dst);
        r.nodes.push_back(nh.node);
        r.links.push_back(nh.link);
        at = nh.node;
    }
    return r;
}

std::vector<std::string> traced_hops(const Topology& t, const Route& r) {
    std::vector<std::string> hops;
    if (r.nodes.size() < 2) return hops;
    for (std::size_t i = 1; i + 1 < r.nodes.size(); ++i)
        if (is_ip_forwarder(t.node(r.nodes[i]).kind)) hops.push_back(r.nodes[i]);
    hops.push_back(r.nodes.back());
    return hops;
}

int awgr_output_port(int input_port, int wavelength, int n_ports) {
    if (n_ports < 1) throw InvalidArgument("AWGR needs at least one port");
    if (input_port < 0 || input_port >= n_ports)
        throw InvalidArgument("input port " + std::to_string(input_port) +
                              " out of range for " + std::to_string(n_ports) + " ports");
    if (wavelength < 0)
        throw InvalidArgument("wavelength index must be non-negative");
    return (input_port + wavelength) % n_ports;
}

WavelengthAssignment assign_wavelengths(const Topology& t,
                                        const std::vector<Flow>& flows) {
    if (t.interconnect_mode != InterconnectMode::Awgr)
        throw InvalidArgument("wavelength assignment requires Awgr interconnect mode");
    const Node* awgr = nullptr;
    for (const auto& [id, n] : t.nodes) {
        if (n.kind != NodeKind::Awgr) continue;
        if (awgr) throw InvalidArgument("topology has more than one AWGR");
        awgr = &n;
    }
    if (!awgr) throw InvalidArgument("topology has no AWGR node");

    const std::vector<std::string> ports = t.neighbors(awgr->id);
    const int n_ports = static_cast<int>(ports.size());
    if (n_ports < 1) throw InvalidArgument("AWGR has no attached ports");
    const int wavelengths = awgr->wavelengths;

    auto port_of = [&ports](const std::string& node) {
        auto it = std::lower_bound(ports.begin(), ports.end(), node);
        return static_cast<int>(it - ports.begin());
    };

    const AddressPlan plan = derive_address_plan(t);
    const ForwardingTables tables = compute_forwarding_tables(t, plan);

    WavelengthAssignment wa;
    std::map<int, std::vector<bool>> in_use; // input port -> wavelength taken
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const Route r = route(tables, flows[i].src, flows[i].dst);
        auto pos = std::find(r.nodes.begin(), r.nodes.end(), awgr->id);
        if (pos == r.nodes.begin() || pos == r.nodes.end() || pos + 1 == r.nodes.end())
            continue; // flow does not cross the AWGR
        const int in_port = port_of(*(pos - 1));
        const int out_port = port_of(*(pos + 1));

        auto& used = in_use[in_port];
        used.resize(wavelengths, false);
        // The cyclic grating fixes the residue class; first-fit inside it.
        const int base = ((out_port - in_port) % n_ports + n_ports) % n_ports;
        int chosen = -1;
        for (int w = base; w < wavelengths; w += n_ports) {
            if (!used[w]) {
                chosen = w;
                break;
            }
        }
        if (chosen < 0)
            throw ExhaustedError("no free wavelength on AWGR input port " +
                                 std::to_string(in_port) + " for flow " +
                                 std::to_string(i));
        used[chosen] = true;
        wa.by_flow[i] = chosen;
        wa.per_input_port[in_port].push_back(i);
    }
    return wa;
}

double TdmSchedule::wait_us(const std::string& sender, double arrival_us) const {
    const TdmGrant* grant = nullptr;
    for (const auto& g : grants)
        if (g.sender == sender) {
            grant = &g;
            break;
        }
    if (!grant) throw InvalidArgument("sender " + sender + " holds no grant");
    double phase = std::fmod(arrival_us, frame_us);
    if (phase < 0.0) phase += frame_us;
    if (phase >= grant->start_us && phase < grant->start_us + grant->length_us)
        return 0.0;
    double wait = grant->start_us - phase;
    if (wait < 0.0) wait += frame_us;
    return wait;
}

double TdmSchedule::mean_wait_us(const std::string& sender) const {
    const TdmGrant* grant = nullptr;
    for (const auto& g : grants)
        if (g.sender == sender) {
            grant = &g;
            break;
        }
    if (!grant) throw InvalidArgument("sender " + sender + " holds no grant");
    // Uniform arrival phase: zero inside the grant, a linear ramp over the
    // remaining frame; integrates to gap^2 / (2 * frame).
    const double gap = frame_us - grant->length_us;
    return gap * gap / (2.0 * frame_us);
}

TdmSchedule build_tdm_schedule(const std::vector<std::string>& senders,
                               double frame_us, double slot_us) {
    if (senders.empty()) throw InvalidArgument("schedule needs at least one sender");
    if (frame_us <= 0.0 || slot_us <= 0.0)
        throw InvalidArgument("frame and slot lengths must be positive");
    if (static_cast<double>(senders.size()) * slot_us > frame_us + 1e-9)
        throw InvalidArgument("slots do not fit into the frame");

    TdmSchedule s;
    s.frame_us = frame_us;
    for (std::size_t i = 0; i < senders.size(); ++i)
        s.grants.push_back({senders[i], static_cast<double>(i) * slot_us, slot_us});
    return s;
}

void export_route_csv(const Route& r, std::ostream& out) {
    out << "src,dst,hop_index,node_id,link_id\n";
    if (r.nodes.empty()) return;
    const std::string& src = r.nodes.front();
    const std::string& dst = r.nodes.back();
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        out << src << ',' << dst << ',' << i << ',' << r.nodes[i] << ','
            << (i == 0 ? std::string() : r.links[i - 1]) << '\n';
    }
}

void export_wavelengths_csv(const std::vector<Flow>& flows,
                            const WavelengthAssignment& wa, std::ostream& out) {
    out << "flow_id,src,dst,wavelength\n";
    for (const auto& [idx, w] : wa.by_flow)
        out << 'f' << idx << ',' << flows[idx].src << ',' << flows[idx].dst << ','
            << w << '\n';
}

} // namespace ponsim
