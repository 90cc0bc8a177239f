#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ponsim/addressing.hpp"
#include "ponsim/topo.hpp"

namespace ponsim {

// Materialized path: nodes front() = src .. back() = dst, links[i] joins
// nodes[i] and nodes[i+1].
struct Route {
    std::vector<std::string> nodes;
    std::vector<std::string> links;

    bool operator==(const Route&) const = default;
};

struct NextHop {
    std::string node;
    std::string link;

    bool operator==(const NextHop&) const = default;
};

// Per-node destination map. Tables are complete for every reachable
// (node, destination) pair.
struct ForwardingTables {
    std::map<std::string, std::map<std::string, NextHop>> next_hop;

    const NextHop& lookup(const std::string& at, const std::string& dst) const;
    bool has_entry(const std::string& at, const std::string& dst) const;
};

// Nodes that make an IP forwarding decision and therefore consume TTL and
// answer traceroute probes. Everything else either terminates traffic
// (Server, Camera) or relays transparently (switches, couplers, AWGRs).
bool is_ip_forwarder(NodeKind k);
// Transit-capable at all: IP forwarders plus transparent relays.
bool can_transit(NodeKind k);

// Hop-count shortest paths under the relay policy: plain hosts never carry
// transit traffic, traffic leaving a rack goes through that rack's first
// gateway, and cross-segment reachability follows the backbone structure.
// Ties break on the smallest next-hop node id, then smallest link id.
// Throws UnreachableError if some server pair has no route.
ForwardingTables compute_forwarding_tables(const Topology& t, const AddressPlan& p);

// Walk the tables from src to dst. Throws UnreachableError when no entry
// leads there (unknown nodes included). route(x, x) is a single node and
// zero links.
Route route(const ForwardingTables& tables, const std::string& src,
            const std::string& dst);

// The nodes a TTL sweep would report, in order: every IP forwarder along the
// route plus the destination.
std::vector<std::string> traced_hops(const Topology& t, const Route& r);

// Cyclic arrayed-waveguide-grating port map. Ports and wavelengths are
// zero-based; throws InvalidArgument when any argument is out of range.
int awgr_output_port(int input_port, int wavelength, int n_ports);

struct Flow {
    std::string src;
    std::string dst;
};

// flow list position -> assigned wavelength; flows that do not cross the
// AWGR carry no entry.
struct WavelengthAssignment {
    std::map<std::size_t, int> by_flow;
    // input port -> flow indices, for inspection
    std::map<int, std::vector<std::size_t>> per_input_port;
};

// First-fit (lowest feasible wavelength) assignment for concurrent flows
// routed through the topology's AWGR, honouring the cyclic port map and
// never reusing a wavelength on one input port. Requires interconnect_mode
// Awgr and exactly one Awgr node; throws ExhaustedError when a flow finds
// no free wavelength.
WavelengthAssignment assign_wavelengths(const Topology& t, const std::vector<Flow>& flows);

struct TdmGrant {
    std::string sender;
    double start_us = 0.0;
    double length_us = 0.0;
};

struct TdmSchedule {
    double frame_us = 125.0;
    std::vector<TdmGrant> grants;

    // Microseconds until `sender` may transmit a packet arriving at
    // arrival_us. Zero inside the sender's own grant.
    double wait_us(const std::string& sender, double arrival_us) const;
    // Mean wait over a frame of uniformly distributed arrivals.
    double mean_wait_us(const std::string& sender) const;
};

// Round-robin: sender i owns [i*slot, (i+1)*slot) each frame. Throws
// InvalidArgument when the grants do not fit the frame or any length is not
// positive.
TdmSchedule build_tdm_schedule(const std::vector<std::string>& senders,
                               double frame_us, double slot_us);

// Default upstream frame length when a scenario does not override it.
inline constexpr double kTdmFrameUs = 125.0;

// CSV: src, dst, hop_index, node_id, link_id (link that led into the node;
// empty for the source row).
void export_route_csv(const Route& r, std::ostream& out);
// CSV: flow_id, src, dst, wavelength
void export_wavelengths_csv(const std::vector<Flow>& flows,
                            const WavelengthAssignment& wa, std::ostream& out);

} // namespace ponsim
