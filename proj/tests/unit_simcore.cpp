#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ponsim/error.hpp"
#include "ponsim/simcore.hpp"
#include "ponsim/topo.hpp"

using namespace ponsim;

namespace {

// One rack, no noise, optional per-node processing latency. Small enough to
// hand-compute every timestamp.
ScenarioConfig rack_scenario(double s3_proc_us = 0.0, double sw_proc_us = 0.0) {
    ScenarioConfig cfg;
    cfg.topology = build_rack("R1", 3, 1, 10.0);
    cfg.topology.nodes.at("R1-S3").processing_delay_us = s3_proc_us;
    cfg.topology.nodes.at("R1-SW").processing_delay_us = sw_proc_us;
    cfg.jitter = JitterModel::none();
    return cfg;
}

ScenarioConfig zero_jitter_reference() {
    ScenarioConfig cfg = build_reference_testbed();
    cfg.jitter = JitterModel::none();
    return cfg;
}

// Cell A uplinked through an OLT and a splitter to two ONUs with a rack
// behind each. Exercises the upstream slot schedule with two contenders.
ScenarioConfig two_onu_scenario() {
    Topology t;
    auto rack = [&t](const std::string& r) {
        t.add_node({r + "-SW", NodeKind::RackSwitch, r, "", 0.0});
        t.add_node({r + "-G1", NodeKind::GatewayServer, r, "", 0.0});
        t.add_node({r + "-S2", NodeKind::Server, r, "", 0.0});
        t.add_link({r + "-G1--" + r + "-SW", r + "-G1", r + "-SW", 0.0, 10.0,
                    Medium::Copper});
        t.add_link({r + "-S2--" + r + "-SW", r + "-S2", r + "-SW", 0.0, 10.0,
                    Medium::Copper});
    };
    rack("A-R1");
    rack("B1");
    rack("B2");
    t.add_node({"OLT1", NodeKind::Olt, "", "PON", 0.0});
    t.add_node({"CPL1", NodeKind::Coupler, "", "PON", 0.0});
    t.add_node({"ONU1", NodeKind::Onu, "", "PON", 0.0});
    t.add_node({"ONU2", NodeKind::Onu, "", "PON", 0.0});
    t.add_link({"A-R1-G1--OLT1", "A-R1-G1", "OLT1", 0.0, 10.0, Medium::Fibre});
    t.add_link({"OLT1--CPL1", "OLT1", "CPL1", 0.0, 10.0, Medium::Fibre});
    t.add_link({"CPL1--ONU1", "CPL1", "ONU1", 0.0, 10.0, Medium::Fibre});
    t.add_link({"CPL1--ONU2", "CPL1", "ONU2", 0.0, 10.0, Medium::Fibre});
    t.add_link({"ONU1--B1-SW", "ONU1", "B1-SW", 0.0, 10.0, Medium::Copper});
    t.add_link({"ONU2--B2-SW", "ONU2", "B2-SW", 0.0, 10.0, Medium::Copper});

    ScenarioConfig cfg;
    cfg.topology = std::move(t);
    cfg.jitter = JitterModel::none();
    return cfg;
}

// Round trip measured by the engine: inject one echo, return the time the
// reply reaches the source.
double engine_rtt(const CompiledScenario& sc, const std::string& src,
                  const std::string& dst) {
    Engine e(sc);
    e.inject(PacketKind::EchoRequest, src, dst, 64, 64, 0.0);
    e.run();
    for (const auto& p : e.deliveries())
        if (p.kind == PacketKind::EchoReply) return p.received_at_us;
    return -1.0;
}

} // namespace

TEST_SUITE("simcore") {

TEST_CASE("delay primitives") {
    CHECK(propagation_delay_us({"l", "a", "b", 110.0, 100.0, Medium::Fibre}) ==
          doctest::Approx(539.0));
    CHECK(propagation_delay_us({"l", "a", "b", 40.0, 100.0, Medium::Fibre}) ==
          doctest::Approx(196.0));
    CHECK(propagation_delay_us({"l", "a", "b", 1.0, 1.0, Medium::Copper}) ==
          doctest::Approx(5.4));
    CHECK(propagation_delay_us({"l", "a", "b", 0.0, 10.0, Medium::Fibre}) == 0.0);

    CHECK(transmission_delay_us(1500, 10.0) == doctest::Approx(1.2));
    CHECK(transmission_delay_us(64, 100.0) == doctest::Approx(0.00512));
    CHECK(transmission_delay_us(64, 10.0) == doctest::Approx(0.0512));
    CHECK(transmission_delay_us(0, 10.0) == 0.0);
    CHECK_THROWS_AS(transmission_delay_us(64, 0.0), InvalidArgument);
    CHECK_THROWS_AS(transmission_delay_us(64, -1.0), InvalidArgument);
    CHECK_THROWS_AS(transmission_delay_us(-1, 10.0), InvalidArgument);
}

TEST_CASE("compile derives schedules and rejects invalid scenarios") {
    const CompiledScenario ref = CompiledScenario::compile(build_reference_testbed());
    REQUIRE(ref.couplers.count("CPL1") == 1);
    const auto& [schedule, olt_side] = ref.couplers.at("CPL1");
    CHECK(olt_side == "OLT1");
    REQUIRE(schedule.grants.size() == 1); // single ONU owns the whole frame
    CHECK(schedule.grants[0].sender == "ONU1");
    CHECK(schedule.frame_us == doctest::Approx(125.0));
    CHECK(schedule.grants[0].length_us == doctest::Approx(125.0));

    // The wavelength-routed variant has no splitter to schedule.
    const CompiledScenario awgr =
        CompiledScenario::compile(build_reference_testbed(InterconnectMode::Awgr));
    CHECK(awgr.couplers.empty());

    ScenarioConfig bad = build_reference_testbed();
    bad.topology.nodes.at("CORE1").processing_delay_us = -1.0;
    CHECK_THROWS_AS(CompiledScenario::compile(bad), ValidationError);

    ScenarioConfig bad_probe = build_reference_testbed();
    bad_probe.probe.iterations = 0;
    CHECK_THROWS_AS(CompiledScenario::compile(bad_probe), ValidationError);
}

TEST_CASE("closed form round trip matches a hand sum") {
    // R1-S2 -> R1-SW -> R1-S3, 64 B on 10 Gbps copper: 0.0512 us per leg.
    // Forward: 0.0512 + (1.5 + 0.0512); echo turnaround charges the
    // destination twice: + 2*7.0; reverse mirrors the forward legs.
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario(7.0, 1.5));
    const Route r = route(sc.tables, "R1-S2", "R1-S3");
    CHECK(closed_form_rtt_us(sc, r, 64) == doctest::Approx(17.2048));

    CHECK(engine_rtt(sc, "R1-S2", "R1-S3") == doctest::Approx(17.2048));
}

TEST_CASE("echo replies mirror the request") {
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario());
    Engine e(sc);
    const std::uint64_t id =
        e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 256, 64, 0.0);
    e.run();
    REQUIRE(e.deliveries().size() == 2);
    const Packet& request = e.deliveries()[0];
    const Packet& reply = e.deliveries()[1];
    CHECK(request.kind == PacketKind::EchoRequest);
    CHECK(reply.kind == PacketKind::EchoReply);
    CHECK(reply.answers_id == id);
    CHECK(reply.size_bytes == 256);
    CHECK(reply.reporter == "R1-S3");
    CHECK(reply.src == "R1-S3");
    CHECK(reply.dst == "R1-S2");
}

TEST_CASE("identical seeds replay identical runs") {
    const CompiledScenario sc =
        CompiledScenario::compile(build_reference_testbed());
    const auto [src, dst] = reference_endpoints(sc.cfg.topology);

    auto rtts = [&](std::uint64_t seed) {
        Engine e(sc, seed);
        for (int i = 0; i < 5; ++i)
            e.inject(PacketKind::EchoRequest, src, dst, 64, 64, i * 1000.0);
        e.run();
        std::vector<double> out;
        for (const auto& p : e.deliveries())
            if (p.kind == PacketKind::EchoReply) out.push_back(p.received_at_us);
        return out;
    };

    const std::vector<double> a = rtts(42);
    const std::vector<double> b = rtts(42);
    const std::vector<double> c = rtts(43);
    REQUIRE(a.size() == 5);
    CHECK(a == b); // bitwise identical replay
    CHECK(a != c);
}

TEST_CASE("packet conservation across expiry and delivery") {
    const CompiledScenario sc = CompiledScenario::compile(zero_jitter_reference());
    Engine e(sc);
    e.inject(PacketKind::EchoRequest, "A-R1-S2", "B-R1-S3", 64, 3, 0.0);
    e.inject(PacketKind::EchoRequest, "A-R1-S2", "B-R1-S3", 64, 64, 10000.0);
    e.run();

    // The short-lived request dies at the third forwarder, which answers
    // with its own packet; the long-lived one completes a full round trip.
    const EngineStats& s = e.stats();
    CHECK(s.injected == 4);
    CHECK(s.delivered == 3);
    CHECK(s.dropped == 1);
    CHECK(s.in_flight() == 0);

    // A plain data packet that expires generates no notification.
    Engine e2(sc);
    e2.inject(PacketKind::Data, "A-R1-S2", "B-R1-S3", 1200, 2, 0.0);
    e2.run();
    CHECK(e2.stats().injected == 1);
    CHECK(e2.stats().delivered == 0);
    CHECK(e2.stats().dropped == 1);
    CHECK(e2.deliveries().empty());
}

TEST_CASE("hop traces are ordered and ttl drops only at forwarders") {
    const CompiledScenario sc = CompiledScenario::compile(zero_jitter_reference());
    Engine e(sc);
    e.inject(PacketKind::EchoRequest, "A-R1-S2", "B-R1-S3", 64, 64, 0.0);
    e.run();

    const Packet* request = nullptr;
    for (const auto& p : e.deliveries())
        if (p.kind == PacketKind::EchoRequest) request = &p;
    REQUIRE(request != nullptr);

    // Full touched-node sequence, including the transparent elements.
    REQUIRE(request->hop_trace.size() == 12);
    CHECK(request->hop_trace.front().first == "A-R1-S2");
    CHECK(request->hop_trace.back().first == "B-R1-S3");
    for (std::size_t i = 1; i < request->hop_trace.size(); ++i)
        CHECK(request->hop_trace[i].second > request->hop_trace[i - 1].second);

    // Seven forwarding decisions between the endpoints.
    CHECK(request->ttl == 57);

    // A same-rack path crosses only its switch, which never touches TTL.
    const CompiledScenario rack = CompiledScenario::compile(rack_scenario());
    Engine er(rack);
    er.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 64, 64, 0.0);
    er.run();
    CHECK(er.deliveries().at(0).ttl == 64);
}

TEST_CASE("ttl expiry walks the forwarder ladder") {
    const CompiledScenario sc = CompiledScenario::compile(zero_jitter_reference());
    const Route r = route(sc.tables, "A-R1-S2", "B-R1-S3");
    const std::vector<std::string> hops = traced_hops(sc.cfg.topology, r);
    REQUIRE(hops.size() == 8);

    for (int k = 1; k <= 8; ++k) {
        Engine e(sc);
        const std::uint64_t id =
            e.inject(PacketKind::EchoRequest, "A-R1-S2", "B-R1-S3", 64, k, 0.0);
        e.run();

        const Packet* answer = nullptr;
        for (const auto& p : e.deliveries())
            if (p.answers_id == id) answer = &p;
        REQUIRE(answer != nullptr);
        if (k < 8) {
            CHECK(answer->kind == PacketKind::TimeExceeded);
            CHECK(e.stats().dropped == 1);
        } else {
            CHECK(answer->kind == PacketKind::EchoReply);
            CHECK(e.stats().dropped == 0);
        }
        CHECK(answer->reporter == hops[static_cast<std::size_t>(k) - 1]);
        CHECK(answer->dst == "A-R1-S2");
    }
}

TEST_CASE("simultaneous sends serialize on the link") {
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario());
    Engine e(sc);
    for (int i = 0; i < 3; ++i)
        e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 64, 64, 0.0);
    e.run();

    std::vector<double> rtts;
    for (const auto& p : e.deliveries())
        if (p.kind == PacketKind::EchoReply) rtts.push_back(p.received_at_us);
    std::sort(rtts.begin(), rtts.end());
    REQUIRE(rtts.size() == 3);
    // Each round trip is four 0.0512 us store-and-forward legs; every later
    // packet waits one extra transmission slot at each contended link.
    CHECK(rtts[0] == doctest::Approx(0.2048));
    CHECK(rtts[1] == doctest::Approx(0.2560));
    CHECK(rtts[2] == doctest::Approx(0.3072));
    CHECK(e.max_queue_depth() >= 2);
    CHECK(e.stats().in_flight() == 0);
}

TEST_CASE("queue capacity turns the overflow into drops") {
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario());
    Engine e(sc);
    e.set_queue_capacity(0); // no waiting room behind the packet in service
    for (int i = 0; i < 3; ++i)
        e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 64, 64, 0.0);
    e.run();

    // One request and its reply survive; the two requests behind it are shed.
    CHECK(e.stats().injected == 4);
    CHECK(e.stats().delivered == 2);
    CHECK(e.stats().dropped == 2);
    CHECK(e.stats().in_flight() == 0);
}

TEST_CASE("run horizon holds back later events") {
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario());
    Engine e(sc);
    e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 64, 64, 0.0);
    e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 64, 64, 5000.0);
    const std::size_t first = e.run(100.0);
    CHECK(first > 0);
    CHECK(e.now_us() <= 100.0);
    CHECK(e.stats().delivered == 2);
    CHECK(e.stats().in_flight() == 1); // second probe still pending

    e.run();
    CHECK(e.stats().delivered == 4);
    CHECK(e.stats().in_flight() == 0);
    CHECK(e.now_us() > 5000.0);
}

TEST_CASE("inject validates its arguments") {
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario());
    Engine e(sc);
    CHECK_THROWS_AS(e.inject(PacketKind::Data, "nope", "R1-S3", 64, 64, 0.0),
                    InvalidArgument);
    CHECK_THROWS_AS(e.inject(PacketKind::Data, "R1-S2", "nope", 64, 64, 0.0),
                    InvalidArgument);
    CHECK_THROWS_AS(e.inject(PacketKind::Data, "R1-S2", "R1-S3", 0, 64, 0.0),
                    InvalidArgument);
    CHECK_THROWS_AS(e.inject(PacketKind::Data, "R1-S2", "R1-S3", 64, -1, 0.0),
                    InvalidArgument);

    e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 64, 64, 10.0);
    e.run();
    CHECK(e.now_us() > 10.0);
    CHECK_THROWS_AS(e.inject(PacketKind::Data, "R1-S2", "R1-S3", 64, 64, 1.0),
                    InvalidArgument); // scheduling into the past
}

TEST_CASE("event trace is ordered and exports cleanly") {
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario());
    Engine e(sc);
    e.enable_trace(true);
    e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S3", 64, 64, 0.0);
    e.run();

    const std::vector<TraceRow>& rows = e.trace();
    REQUIRE(!rows.empty());
    CHECK(rows.front().kind == EventKind::ProbeDispatch);
    CHECK(rows.front().node_id == "R1-S2");
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].time_us >= rows[i - 1].time_us);

    std::ostringstream out;
    export_trace_csv(rows, out);
    const std::string csv = out.str();
    CHECK(csv.rfind("time_us,event_kind,node_id,packet_id\n", 0) == 0);
    CHECK(csv.find("0.000,probe_dispatch,R1-S2,1\n") != std::string::npos);
    CHECK(csv.find("packet_arrival") != std::string::npos);
}

TEST_CASE("upstream slot schedule gates the second onu") {
    const CompiledScenario sc = CompiledScenario::compile(two_onu_scenario());
    REQUIRE(sc.couplers.count("CPL1") == 1);
    const TdmSchedule& schedule = sc.couplers.at("CPL1").first;
    REQUIRE(schedule.grants.size() == 2);
    CHECK(schedule.grants[0].sender == "ONU1");
    CHECK(schedule.grants[1].sender == "ONU2");
    CHECK(schedule.grants[1].start_us == doctest::Approx(62.5));

    // Seven 0.0512 us legs each way. The reply re-enters the splitter
    // upstream at t = 0.5120: inside ONU1's grant, so the B1 round trip pays
    // no wait, while the B2 reply stalls until ONU2's grant opens at 62.5.
    const double via1 = engine_rtt(sc, "A-R1-S2", "B1-S2");
    const double via2 = engine_rtt(sc, "A-R1-S2", "B2-S2");
    CHECK(via1 == doctest::Approx(0.7168));
    CHECK(via2 - via1 == doctest::Approx(62.5 - 0.5120));

    const Route r1 = route(sc.tables, "A-R1-S2", "B1-S2");
    const Route r2 = route(sc.tables, "A-R1-S2", "B2-S2");
    CHECK(closed_form_rtt_us(sc, r1, 64) == doctest::Approx(via1).epsilon(1e-12));
    CHECK(closed_form_rtt_us(sc, r2, 64) == doctest::Approx(via2).epsilon(1e-12));
}

TEST_CASE("self ping delivers immediately") {
    const CompiledScenario sc = CompiledScenario::compile(rack_scenario());
    Engine e(sc);
    e.inject(PacketKind::EchoRequest, "R1-S2", "R1-S2", 64, 64, 0.0);
    e.run();
    REQUIRE(e.stats().delivered >= 1);
    CHECK(e.deliveries().front().received_at_us == 0.0);
}

} // TEST_SUITE
