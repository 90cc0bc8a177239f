#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "ponsim/addressing.hpp"
#include "ponsim/error.hpp"
#include "ponsim/topo.hpp"

using namespace ponsim;

namespace {

bool has_violation(const std::vector<PlanViolation>& vs, PlanViolationKind k) {
    return std::any_of(vs.begin(), vs.end(),
                       [k](const PlanViolation& v) { return v.kind == k; });
}

Ipv4Address addr(const std::string& s) { return Ipv4Address::from_string(s); }

const Ipv4Address& only_rack_address(const AddressPlan& p, const std::string& node,
                                     const std::string& rack) {
    const Ipv4Address* a = p.address_in(node, p.rack_subnets.at(rack));
    REQUIRE(a != nullptr);
    return *a;
}

} // namespace

TEST_SUITE("addressing") {

TEST_CASE("ipv4 text form round-trips") {
    CHECK(addr("10.0.3.7").to_string() == "10.0.3.7");
    CHECK(addr("0.0.0.0").to_uint32() == 0u);
    CHECK(addr("255.255.255.255").to_uint32() == 0xffffffffu);
    CHECK(Ipv4Address::from_uint32(0x0a000107u).to_string() == "10.0.1.7");
    CHECK(addr("10.0.1.2") < addr("10.0.1.10"));

    CHECK_THROWS_AS(addr("10.0.1"), InvalidArgument);
    CHECK_THROWS_AS(addr("10.0.1.256"), InvalidArgument);
    CHECK_THROWS_AS(addr("10.0.1.2.3"), InvalidArgument);
    CHECK_THROWS_AS(addr("ten.zero.one.two"), InvalidArgument);
    CHECK_THROWS_AS(addr(""), InvalidArgument);
}

TEST_CASE("subnet membership honours the prefix") {
    const Subnet s{addr("10.0.2.0"), 24};
    CHECK(s.contains(addr("10.0.2.1")));
    CHECK(s.contains(addr("10.0.2.254")));
    CHECK_FALSE(s.contains(addr("10.0.3.1")));
    CHECK(s.to_string() == "10.0.2.0/24");

    const Subnet wide{addr("10.1.0.0"), 16};
    CHECK(wide.contains(addr("10.1.200.9")));
    CHECK_FALSE(wide.contains(addr("10.2.0.1")));
}

TEST_CASE("cell plan lays racks, transit and defaults out deterministically") {
    const Topology t = build_cell("A", 3);
    const AddressPlan p = derive_address_plan(t);

    CHECK(p.rack_subnets.at("A-R1").to_string() == "10.0.1.0/24");
    CHECK(p.rack_subnets.at("A-R2").to_string() == "10.0.2.0/24");
    CHECK(p.rack_subnets.at("A-R3").to_string() == "10.0.3.0/24");
    CHECK(p.transit_subnet.to_string() == "10.0.0.0/24");

    // Hosts take .1.. in node-id order; the gateway sorts first in each rack.
    CHECK(only_rack_address(p, "A-R1-G1", "A-R1") == addr("10.0.1.1"));
    CHECK(only_rack_address(p, "A-R1-S2", "A-R1") == addr("10.0.1.2"));
    CHECK(only_rack_address(p, "A-R1-S3", "A-R1") == addr("10.0.1.3"));
    CHECK(only_rack_address(p, "A-R2-G1", "A-R2") == addr("10.0.2.1"));

    // Gateways are dual-homed: rack address plus a transit address in rack order.
    const Ipv4Address* t1 = p.address_in("A-R1-G1", p.transit_subnet);
    const Ipv4Address* t2 = p.address_in("A-R2-G1", p.transit_subnet);
    const Ipv4Address* t3 = p.address_in("A-R3-G1", p.transit_subnet);
    REQUIRE(t1 != nullptr);
    REQUIRE(t2 != nullptr);
    REQUIRE(t3 != nullptr);
    CHECK(*t1 == addr("10.0.0.1"));
    CHECK(*t2 == addr("10.0.0.2"));
    CHECK(*t3 == addr("10.0.0.3"));
    CHECK(p.interfaces.at("A-R1-G1").size() == 2);
    CHECK(p.interfaces.at("A-R1-S2").size() == 1);

    // Plain hosts route through their rack gateway; the gateway is its own.
    CHECK(p.default_gateways.at("A-R1-S2") == addr("10.0.1.1"));
    CHECK(p.default_gateways.at("A-R1-S3") == addr("10.0.1.1"));
    CHECK(p.default_gateways.at("A-R1-G1") == addr("10.0.1.1"));
    CHECK(p.default_gateways.at("A-R2-S2") == addr("10.0.2.1"));

    // Switches carry no addresses.
    CHECK(p.interfaces.count("A-R1-SW") == 0);

    CHECK(p.node_of(addr("10.0.1.2")) == "A-R1-S2");
    CHECK(p.has_address(addr("10.0.0.3")));
    CHECK_FALSE(p.has_address(addr("10.9.9.9")));
    CHECK_THROWS_AS(p.node_of(addr("10.9.9.9")), UnknownAddress);
}

TEST_CASE("reference testbed addresses camera and core side") {
    const ScenarioConfig cfg = build_reference_testbed();
    const AddressPlan p = derive_address_plan(cfg.topology);

    // The camera is a rack host like any server, numbered after them.
    CHECK(only_rack_address(p, "CAM1", "A-R1") == addr("10.0.1.4"));
    CHECK(p.default_gateways.at("CAM1") == addr("10.0.1.1"));

    // Core-side elements share one /16 in node-id order.
    CHECK(p.core_subnet.to_string() == "10.1.0.0/16");
    const Ipv4Address* c1 = p.address_in("CORE1", p.core_subnet);
    const Ipv4Address* onu = p.address_in("ONU1", p.core_subnet);
    REQUIRE(c1 != nullptr);
    REQUIRE(onu != nullptr);
    CHECK(*c1 == addr("10.1.0.1"));
    CHECK(*onu == addr("10.1.0.5")); // CORE1..3, OLT1, ONU1

    CHECK(validate_plan(p, cfg.topology).empty());
    const ScenarioConfig prior = build_prior_testbed();
    CHECK(validate_plan(derive_address_plan(prior.topology), prior.topology).empty());
}

TEST_CASE("validate_plan catches corrupted plans") {
    const Topology t = build_cell("A", 2);
    AddressPlan p = derive_address_plan(t);
    CHECK(validate_plan(p, t).empty());

    SUBCASE("duplicate address") {
        p.interfaces.at("A-R1-S2")[0].address = addr("10.0.1.3"); // S3's address
        CHECK(has_violation(validate_plan(p, t), PlanViolationKind::DuplicateAddress));
    }
    SUBCASE("overlapping subnets") {
        p.rack_subnets.at("A-R2") = Subnet{addr("10.0.1.0"), 24};
        CHECK(has_violation(validate_plan(p, t), PlanViolationKind::OverlappingSubnets));
    }
    SUBCASE("gateway must be dual-homed") {
        p.interfaces.at("A-R1-G1").pop_back();
        CHECK(has_violation(validate_plan(p, t), PlanViolationKind::WrongInterfaceCount));
    }
    SUBCASE("host default gateway must exist in its subnet") {
        p.default_gateways.at("A-R1-S2") = addr("10.0.2.1"); // other rack
        CHECK(has_violation(validate_plan(p, t), PlanViolationKind::UnreachableGateway));
    }
}

TEST_CASE("plan capacity is bounded by the host octet") {
    const Topology big = build_rack("R1", 300, 1, 10.0);
    CHECK_THROWS_AS(derive_address_plan(big), CapacityError);
}

TEST_CASE("resolve_next_hop walks subnet, gateway, relay order") {
    const Topology t = build_cell("A", 3);
    const AddressPlan p = derive_address_plan(t);

    // Same subnet: hand straight to the destination node.
    CHECK(resolve_next_hop(p, t, "A-R1-S2", addr("10.0.1.3")) == "A-R1-S3");
    CHECK(resolve_next_hop(p, t, "A-R1-S2", addr("10.0.1.1")) == "A-R1-G1");
    // Off-rack from a plain host: the default gateway decides.
    CHECK(resolve_next_hop(p, t, "A-R1-S2", addr("10.0.2.2")) == "A-R1-G1");
    // A gateway relays toward the destination rack's gateway.
    CHECK(resolve_next_hop(p, t, "A-R1-G1", addr("10.0.3.2")) == "A-R3-G1");
    // Gateways reach each other over the shared transit subnet.
    CHECK(resolve_next_hop(p, t, "A-R1-G1", addr("10.0.0.3")) == "A-R3-G1");

    CHECK_THROWS_AS(resolve_next_hop(p, t, "A-R1-S2", addr("10.250.0.1")),
                    UnknownAddress);
}

TEST_CASE("plan csv lists every interface with its role") {
    const Topology t = build_cell("A", 2);
    const AddressPlan p = derive_address_plan(t);
    std::ostringstream out;
    export_plan_csv(p, t, out);
    const std::string csv = out.str();

    CHECK(csv.rfind("node_id,subnet,address,role,default_gateway\n", 0) == 0);
    CHECK(csv.find("A-R1-G1,10.0.0.0/24,10.0.0.1,gateway,") != std::string::npos);
    CHECK(csv.find("A-R1-S2,10.0.1.0/24,10.0.1.2,host,10.0.1.1") != std::string::npos);

    // One line per interface plus the header.
    std::size_t rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    std::size_t want = 1;
    for (const auto& [node, ifaces] : p.interfaces) want += ifaces.size();
    CHECK(rows == want);
}

} // TEST_SUITE
