#include "ponsim/addressing.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "ponsim/error.hpp"

namespace ponsim {

Ipv4Address Ipv4Address::from_string(const std::string& s) {
    Ipv4Address a;
    std::istringstream in(s);
    int value;
    char dot;
    for (int i = 0; i < 4; ++i) {
        if (!(in >> value) || value < 0 || value > 255)
            throw InvalidArgument("bad IPv4 address: " + s);
        a.octets[i] = static_cast<std::uint8_t>(value);
        if (i < 3 && (!(in >> dot) || dot != '.'))
            throw InvalidArgument("bad IPv4 address: " + s);
    }
    if (in >> dot) throw InvalidArgument("bad IPv4 address: " + s);
    return a;
}

Ipv4Address Ipv4Address::from_uint32(std::uint32_t v) {
    return {{static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
             static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)}};
}

std::uint32_t Ipv4Address::to_uint32() const {
    return (std::uint32_t(octets[0]) << 24) | (std::uint32_t(octets[1]) << 16) |
           (std::uint32_t(octets[2]) << 8) | std::uint32_t(octets[3]);
}

std::string Ipv4Address::to_string() const {
    std::ostringstream out;
    out << int(octets[0]) << '.' << int(octets[1]) << '.' << int(octets[2]) << '.'
        << int(octets[3]);
    return out.str();
}

bool Subnet::contains(const Ipv4Address& a) const {
    if (prefix_len <= 0) return true;
    const std::uint32_t mask = prefix_len >= 32
                                   ? 0xffffffffu
                                   : ~((1u << (32 - prefix_len)) - 1);
    return (a.to_uint32() & mask) == (base.to_uint32() & mask);
}

std::string Subnet::to_string() const {
    return base.to_string() + "/" + std::to_string(prefix_len);
}

const std::string& AddressPlan::node_of(const Ipv4Address& a) const {
    auto it = address_owners.find(a.to_uint32());
    if (it == address_owners.end())
        throw UnknownAddress("address " + a.to_string() + " is not assigned");
    return it->second;
}

bool AddressPlan::has_address(const Ipv4Address& a) const {
    return address_owners.count(a.to_uint32()) != 0;
}

const Ipv4Address* AddressPlan::address_in(const std::string& node,
                                           const Subnet& s) const {
    auto it = interfaces.find(node);
    if (it == interfaces.end()) return nullptr;
    for (const auto& iface : it->second)
        if (iface.subnet == s) return &iface.address;
    return nullptr;
}

namespace {

bool host_kind(NodeKind k) {
    return k == NodeKind::Server || k == NodeKind::Camera;
}

bool core_side_kind(NodeKind k) {
    return k == NodeKind::CoreNode || k == NodeKind::Olt || k == NodeKind::Onu;
}

// Racks in id order; within a rack, addressable members in id order.
std::map<std::string, std::vector<std::string>> rack_members(const Topology& t) {
    std::map<std::string, std::vector<std::string>> racks;
    for (const auto& [id, n] : t.nodes) {
        if (n.rack_id.empty()) continue;
        if (host_kind(n.kind) || n.kind == NodeKind::GatewayServer)
            racks[n.rack_id].push_back(id);
    }
    return racks;
}

} // namespace

AddressPlan derive_address_plan(const Topology& t) {
    AddressPlan p;
    p.transit_subnet = {Ipv4Address{{10, 0, 0, 0}}, 24};
    p.core_subnet = {Ipv4Address{{10, 1, 0, 0}}, 16};

    auto racks = rack_members(t);
    if (racks.size() > 254)
        throw CapacityError("rack numbering overflows 10.0.x.0/24 (max 254 racks)");

    auto assign = [&p](const std::string& node, const Subnet& s, std::uint32_t host) {
        Ipv4Address addr = Ipv4Address::from_uint32(s.base.to_uint32() + host);
        p.interfaces[node].push_back({s, addr});
        p.address_owners.emplace(addr.to_uint32(), node);
    };

    int k = 0;
    std::uint32_t transit_host = 0;
    for (const auto& [rack, members] : racks) {
        ++k;
        Subnet subnet{Ipv4Address{{10, 0, static_cast<std::uint8_t>(k), 0}}, 24};
        p.rack_subnets[rack] = subnet;
        if (members.size() > 253)
            throw CapacityError("rack " + rack + " exceeds 253 addressable hosts");

        std::string first_gateway;
        std::uint32_t host = 0;
        for (const auto& id : members) {
            assign(id, subnet, ++host);
            if (t.node(id).kind == NodeKind::GatewayServer) {
                assign(id, p.transit_subnet, ++transit_host);
                if (transit_host > 253)
                    throw CapacityError("transit subnet exceeds 253 gateways");
                if (first_gateway.empty()) first_gateway = id;
            }
        }
        // Hosts route off-subnet traffic through the rack's first gateway;
        // the gateway's own default route is itself.
        const Ipv4Address* gw = p.address_in(first_gateway, subnet);
        for (const auto& id : members) {
            if (t.node(id).kind == NodeKind::GatewayServer)
                p.default_gateways[id] = *p.address_in(id, subnet);
            else
                p.default_gateways[id] = *gw;
        }
    }

    std::uint32_t core_host = 0;
    for (const auto& [id, n] : t.nodes) {
        if (!core_side_kind(n.kind)) continue;
        if (++core_host > 65533)
            throw CapacityError("core subnet exceeds its host capacity");
        assign(id, p.core_subnet, core_host);
    }

    return p;
}

const char* to_string(PlanViolationKind k) {
    switch (k) {
        case PlanViolationKind::DuplicateAddress: return "DuplicateAddress";
        case PlanViolationKind::OverlappingSubnets: return "OverlappingSubnets";
        case PlanViolationKind::WrongInterfaceCount: return "WrongInterfaceCount";
        case PlanViolationKind::UnreachableGateway: return "UnreachableGateway";
    }
    return "?";
}

std::vector<PlanViolation> validate_plan(const AddressPlan& p, const Topology& t) {
    std::vector<PlanViolation> out;

    // Address uniqueness across all interfaces.
    std::map<std::uint32_t, std::string> seen;
    for (const auto& [node, ifaces] : p.interfaces) {
        for (const auto& iface : ifaces) {
            auto [it, inserted] = seen.emplace(iface.address.to_uint32(), node);
            if (!inserted)
                out.push_back({PlanViolationKind::DuplicateAddress, node,
                               iface.address.to_string() + " also assigned to " +
                                   it->second});
        }
    }

    // Pairwise disjoint subnets (racks against each other and the transit
    // range; the core block must not swallow either).
    std::vector<std::pair<std::string, Subnet>> subnets(p.rack_subnets.begin(),
                                                        p.rack_subnets.end());
    subnets.emplace_back("transit", p.transit_subnet);
    subnets.emplace_back("core", p.core_subnet);
    for (std::size_t i = 0; i < subnets.size(); ++i) {
        for (std::size_t j = i + 1; j < subnets.size(); ++j) {
            const auto& [ni, si] = subnets[i];
            const auto& [nj, sj] = subnets[j];
            if (si.contains(sj.base) || sj.contains(si.base))
                out.push_back({PlanViolationKind::OverlappingSubnets, ni,
                               si.to_string() + " overlaps " + nj + " " + sj.to_string()});
        }
    }

    for (const auto& [id, n] : t.nodes) {
        auto it = p.interfaces.find(id);
        const std::size_t count = it == p.interfaces.end() ? 0 : it->second.size();
        if (n.kind == NodeKind::GatewayServer) {
            if (count != 2) {
                out.push_back({PlanViolationKind::WrongInterfaceCount, id,
                               "gateway must hold exactly 2 addresses, has " +
                                   std::to_string(count)});
                continue;
            }
            const auto& a = it->second[0];
            const auto& b = it->second[1];
            if (a.subnet == b.subnet)
                out.push_back({PlanViolationKind::WrongInterfaceCount, id,
                               "gateway addresses must sit in two distinct subnets"});
        } else if (host_kind(n.kind) && !n.rack_id.empty()) {
            if (count != 1) {
                out.push_back({PlanViolationKind::WrongInterfaceCount, id,
                               "host must hold exactly 1 address, has " +
                                   std::to_string(count)});
                continue;
            }
            auto gw = p.default_gateways.find(id);
            if (gw == p.default_gateways.end()) {
                out.push_back({PlanViolationKind::UnreachableGateway, id,
                               "host has no default gateway"});
                continue;
            }
            const Subnet& home = it->second[0].subnet;
            if (!home.contains(gw->second)) {
                out.push_back({PlanViolationKind::UnreachableGateway, id,
                               "default gateway " + gw->second.to_string() +
                                   " lies outside " + home.to_string()});
                continue;
            }
            if (!p.has_address(gw->second)) {
                out.push_back({PlanViolationKind::UnreachableGateway, id,
                               "default gateway " + gw->second.to_string() +
                                   " is not assigned to any node"});
                continue;
            }
            const auto& owner = p.node_of(gw->second);
            if (t.node(owner).kind != NodeKind::GatewayServer)
                out.push_back({PlanViolationKind::UnreachableGateway, id,
                               "default gateway " + gw->second.to_string() +
                                   " belongs to non-gateway " + owner});
        }
    }

    return out;
}

std::string resolve_next_hop(const AddressPlan& p, const Topology& t,
                             const std::string& src_node, const Ipv4Address& dst) {
    const std::string& dst_node = p.node_of(dst); // throws on unassigned

    auto it = p.interfaces.find(src_node);
    if (it == p.interfaces.end())
        throw UnknownAddress("node " + src_node + " holds no addresses");

    // Shared subnet: deliver directly.
    for (const auto& iface : it->second)
        if (iface.subnet.contains(dst)) return dst_node;

    const Node& src = t.node(src_node);
    if (src.kind != NodeKind::GatewayServer) {
        auto gw = p.default_gateways.find(src_node);
        if (gw == p.default_gateways.end())
            throw UnknownAddress("node " + src_node + " has no default gateway");
        return p.node_of(gw->second);
    }

    // Gateway relaying toward another rack: hand over to that rack's first
    // gateway across the transit subnet.
    const Node& target = t.node(dst_node);
    if (!target.rack_id.empty()) {
        auto subnet = p.rack_subnets.find(target.rack_id);
        if (subnet != p.rack_subnets.end()) {
            for (const auto& [node, ifaces] : p.interfaces) {
                if (t.node(node).kind != NodeKind::GatewayServer) continue;
                if (t.node(node).rack_id != target.rack_id) continue;
                return node; // maps iterate in id order: first gateway wins
            }
        }
    }
    throw UnknownAddress("destination " + dst.to_string() +
                         " is not resolvable at the addressing layer from " + src_node);
}

void export_plan_csv(const AddressPlan& p, const Topology& t, std::ostream& out) {
    out << "node_id,subnet,address,role,default_gateway\n";
    for (const auto& [node, ifaces] : p.interfaces) {
        const bool gateway = t.node(node).kind == NodeKind::GatewayServer;
        for (const auto& iface : ifaces) {
            out << node << ',' << iface.subnet.to_string() << ','
                << iface.address.to_string() << ',' << (gateway ? "gateway" : "host")
                << ',';
            auto gw = p.default_gateways.find(node);
            if (gw != p.default_gateways.end()) out << gw->second.to_string();
            out << '\n';
        }
    }
}

} // namespace ponsim
