#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "ponsim/routing.hpp"

namespace ponsim {

// One-way medium latency. Fibre: 4.9 us/km, copper: 5.4 us/km.
struct DelayConstants {
    double fibre_us_per_km = 4.9;
    double copper_us_per_km = 5.4;
};

double propagation_delay_us(const Link& l, const DelayConstants& c = {});
// size_bytes * 8 / (rate_gbps * 1000) microseconds; rate must be positive.
double transmission_delay_us(int size_bytes, double rate_gbps);

enum class PacketKind { EchoRequest, EchoReply, TimeExceeded, Data };

const char* to_string(PacketKind k);

struct Packet {
    std::uint64_t id = 0;
    PacketKind kind = PacketKind::Data;
    int size_bytes = 64;
    int ttl = 64;
    std::string src;
    std::string dst;
    double sent_at_us = 0.0;
    double received_at_us = 0.0;
    // (node id, arrival time) per node the packet touched, strictly
    // increasing in time.
    std::vector<std::pair<std::string, double>> hop_trace;
    // For replies: id of the packet being answered and the answering node.
    std::uint64_t answers_id = 0;
    std::string reporter;
};

enum class EventKind { ProbeDispatch, PacketArrival };

struct TraceRow {
    double time_us;
    EventKind kind;
    std::string node_id;
    std::uint64_t packet_id;
};

struct EngineStats {
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;

    std::uint64_t in_flight() const { return injected - delivered - dropped; }
};

// Everything derived from a scenario that engines share read-only: the
// validated topology, its address plan, forwarding tables, and per-coupler
// upstream slot schedules.
struct CompiledScenario {
    ScenarioConfig cfg;
    AddressPlan plan;
    ForwardingTables tables;
    DelayConstants constants;
    // coupler node id -> (schedule, id of its OLT-side neighbour)
    std::map<std::string, std::pair<TdmSchedule, std::string>> couplers;

    static CompiledScenario compile(const ScenarioConfig& cfg,
                                    const DelayConstants& constants = {});
};

// Deterministic single-threaded discrete-event engine. Events execute in
// (time, sequence) order; the clock never moves backwards; identical seeds
// replay identical traces. Instances never share mutable state, so
// independent engines may run on separate threads.
class Engine {
public:
    explicit Engine(const CompiledScenario& scenario);
    Engine(const CompiledScenario& scenario, std::uint64_t seed_override);

    // Schedule a fresh packet to leave src at `at_us`. Returns its id.
    std::uint64_t inject(PacketKind kind, const std::string& src,
                         const std::string& dst, int size_bytes, int ttl,
                         double at_us);

    // Run until the queue drains or the next event would pass `until_us`.
    // Returns the number of events processed.
    std::size_t run(double until_us = -1.0);

    double now_us() const { return now_; }
    const EngineStats& stats() const { return stats_; }
    // Packets that reached their final destination, in delivery order.
    const std::vector<Packet>& deliveries() const { return deliveries_; }
    std::vector<Packet> take_deliveries();

    // Highest queue occupancy seen on any single link direction.
    int max_queue_depth() const { return max_queue_depth_; }
    // Per-direction cap on queued packets; exceeding it drops the packet.
    void set_queue_capacity(int packets) { queue_capacity_ = packets; }

    void enable_trace(bool on) { trace_enabled_ = on; }
    const std::vector<TraceRow>& trace() const { return trace_; }

private:
    struct Event {
        double time_us;
        std::uint64_t seq;
        EventKind kind;
        Packet packet;       // in flight toward `node`
        std::string node;    // arrival node, or dispatch source

        bool operator>(const Event& rhs) const {
            if (time_us != rhs.time_us) return time_us > rhs.time_us;
            return seq > rhs.seq;
        }
    };

    void dispatch(Event& ev);
    void arrive(Event& ev);
    // Queue the packet onto the link toward next, applying the sender-side
    // delay budget (processing happens before this call).
    void transmit(Packet p, const std::string& from, const NextHop& next,
                  double ready_us);
    void deliver(Packet p, double at_us);
    void drop(const Packet& p, const std::string& at, const std::string& why);
    void reply(const Packet& request, PacketKind kind, const std::string& from,
               double ready_us);
    double jitter_draw();
    double tdm_wait(const std::string& node, const std::string& via_link,
                    const std::string& prev, double at_us) const;
    void record(double t, EventKind k, const std::string& node, std::uint64_t packet);

    const CompiledScenario& sc_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_packet_id_ = 1;
    double now_ = 0.0;
    std::mt19937_64 rng_;
    EngineStats stats_;
    std::vector<Packet> deliveries_;
    std::vector<TraceRow> trace_;
    bool trace_enabled_ = false;
    int queue_capacity_ = -1; // unbounded
    int max_queue_depth_ = 0;
    // (link id, direction key) -> departure times already committed
    std::map<std::string, std::vector<double>> link_busy_;
};

// CSV: time_us, event_kind, node_id, packet_id
void export_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out);

// Closed-form zero-jitter round trip along a concrete route: twice the sum
// of propagation, transmission and processing over the path (the sender's
// own processing excluded), plus any coupler waits for the given start time.
double closed_form_rtt_us(const CompiledScenario& sc, const Route& r,
                          int size_bytes, double start_us = 0.0);

} // namespace ponsim
