#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ponsim/topo.hpp"

namespace ponsim {

struct Ipv4Address {
    std::array<std::uint8_t, 4> octets{0, 0, 0, 0};

    static Ipv4Address from_string(const std::string& s); // throws InvalidArgument
    static Ipv4Address from_uint32(std::uint32_t v);
    std::uint32_t to_uint32() const;
    std::string to_string() const;

    auto operator<=>(const Ipv4Address&) const = default;
};

struct Subnet {
    Ipv4Address base;
    int prefix_len = 24;

    bool contains(const Ipv4Address& a) const;
    std::string to_string() const; // "10.0.1.0/24"

    auto operator<=>(const Subnet&) const = default;
};

struct Interface {
    Subnet subnet;
    Ipv4Address address;

    auto operator<=>(const Interface&) const = default;
};

// Address layout of one scenario:
//   rack k (racks in id order, k = 1..)  -> 10.0.k.0/24, hosts from .1 in
//   node-id order; gateway transit        -> 10.0.0.0/24, gateways in rack
//   order; core-side elements (CoreNode, Olt, Onu) -> 10.1.0.0/16 in node-id
//   order. Gateways are dual-homed (rack + transit); plain servers and
//   cameras get one rack address plus their rack gateway as default route;
//   a gateway's default route is itself.
struct AddressPlan {
    std::map<std::string, Subnet> rack_subnets;           // rack id -> subnet
    Subnet transit_subnet;
    Subnet core_subnet;
    std::map<std::string, std::vector<Interface>> interfaces; // node -> addrs
    std::map<std::string, Ipv4Address> default_gateways;   // node -> gateway

    const std::string& node_of(const Ipv4Address& a) const; // UnknownAddress
    bool has_address(const Ipv4Address& a) const;
    // First address of the node inside `s`, if any.
    const Ipv4Address* address_in(const std::string& node, const Subnet& s) const;

    std::map<std::uint32_t, std::string> address_owners; // derived index
};

// Deterministic plan for a validated topology. Throws CapacityError when a
// rack holds more than 253 hosts or the rack/core numbering overflows.
AddressPlan derive_address_plan(const Topology& t);

enum class PlanViolationKind {
    DuplicateAddress,
    OverlappingSubnets,
    WrongInterfaceCount,
    UnreachableGateway,
};

const char* to_string(PlanViolationKind k);

struct PlanViolation {
    PlanViolationKind kind;
    std::string entity_id;
    std::string detail;
};

std::vector<PlanViolation> validate_plan(const AddressPlan& p, const Topology& t);

// Cell-local relay semantics, one hop at a time:
//   destination on a shared subnet -> the destination node;
//   plain host otherwise           -> its default gateway;
//   gateway otherwise              -> the destination rack's first gateway.
// Throws UnknownAddress for unassigned addresses or destinations that this
// layer cannot resolve (core-side targets are the routing module's job).
std::string resolve_next_hop(const AddressPlan& p, const Topology& t,
                             const std::string& src_node, const Ipv4Address& dst);

// CSV: node_id, subnet, address, role(gateway|host), default_gateway
void export_plan_csv(const AddressPlan& p, const Topology& t, std::ostream& out);

} // namespace ponsim
