#include "ponsim/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ponsim/error.hpp"

namespace ponsim {

const char* to_string(PacketKind k) {
    switch (k) {
        case PacketKind::EchoRequest: return "EchoRequest";
        case PacketKind::EchoReply: return "EchoReply";
        case PacketKind::TimeExceeded: return "TimeExceeded";
        case PacketKind::Data: return "Data";
    }
    return "?";
}

double propagation_delay_us(const Link& l, const DelayConstants& c) {
    const double per_km =
        l.medium == Medium::Fibre ? c.fibre_us_per_km : c.copper_us_per_km;
    return l.length_km * per_km;
}

double transmission_delay_us(int size_bytes, double rate_gbps) {
    if (rate_gbps <= 0.0) throw InvalidArgument("link rate must be positive");
    if (size_bytes < 0) throw InvalidArgument("packet size must be >= 0");
    // bits / (Gbps * 1000 bits per us)
    return static_cast<double>(size_bytes) * 8.0 / (rate_gbps * 1000.0);
}

CompiledScenario CompiledScenario::compile(const ScenarioConfig& cfg,
                                           const DelayConstants& constants) {
    if (auto vs = validate_scenario(cfg); !vs.empty()) {
        std::string msg = "scenario is not valid:";
        for (const auto& v : vs)
            msg += "\n  " + std::string(to_string(v.kind)) + " " + v.entity_id + ": " +
                   v.detail;
        throw ValidationError(msg);
    }

    CompiledScenario sc;
    sc.cfg = cfg;
    sc.constants = constants;
    sc.plan = derive_address_plan(cfg.topology);
    sc.tables = compute_forwarding_tables(cfg.topology, sc.plan);

    // Upstream slotting: every coupler grants its non-OLT neighbours equal
    // round-robin slots toward the OLT side.
    for (const auto& [id, n] : cfg.topology.nodes) {
        if (n.kind != NodeKind::Coupler) continue;
        std::string olt_side;
        std::vector<std::string> senders;
        for (const auto& nb : cfg.topology.neighbors(id)) {
            if (cfg.topology.node(nb).kind == NodeKind::Olt && olt_side.empty())
                olt_side = nb;
            else
                senders.push_back(nb);
        }
        if (olt_side.empty() || senders.empty()) continue; // nothing to slot
        sc.couplers.emplace(
            id, std::make_pair(build_tdm_schedule(senders, kTdmFrameUs,
                                                  kTdmFrameUs / senders.size()),
                               olt_side));
    }
    return sc;
}

Engine::Engine(const CompiledScenario& scenario)
    : Engine(scenario, scenario.cfg.seed) {}

Engine::Engine(const CompiledScenario& scenario, std::uint64_t seed_override)
    : sc_(scenario), rng_(seed_override) {}

std::uint64_t Engine::inject(PacketKind kind, const std::string& src,
                             const std::string& dst, int size_bytes, int ttl,
                             double at_us) {
    if (!sc_.cfg.topology.has_node(src)) throw InvalidArgument("unknown source " + src);
    if (!sc_.cfg.topology.has_node(dst)) throw InvalidArgument("unknown destination " + dst);
    if (size_bytes <= 0) throw InvalidArgument("packet size must be positive");
    if (ttl < 0) throw InvalidArgument("ttl must be >= 0");
    if (at_us < now_) throw InvalidArgument("cannot schedule a send in the past");

    const std::uint64_t id = next_packet_id_++;
    Packet p;
    p.id = id;
    p.kind = kind;
    p.size_bytes = size_bytes;
    p.ttl = ttl;
    p.src = src;
    p.dst = dst;
    ++stats_.injected;
    queue_.push(Event{at_us, next_seq_++, EventKind::ProbeDispatch, std::move(p), src});
    return id;
}

std::size_t Engine::run(double until_us) {
    std::size_t processed = 0;
    while (!queue_.empty()) {
        if (until_us >= 0.0 && queue_.top().time_us > until_us) break;
        Event ev = queue_.top();
        queue_.pop();
        // The queue orders by (time, sequence); time can never step back.
        now_ = ev.time_us;
        record(now_, ev.kind, ev.node, ev.packet.id);
        if (ev.kind == EventKind::ProbeDispatch)
            dispatch(ev);
        else
            arrive(ev);
        ++processed;
    }
    return processed;
}

double Engine::jitter_draw() {
    if (sc_.cfg.jitter.kind != JitterKind::Uniform || sc_.cfg.jitter.half_width_us <= 0.0)
        return 0.0;
    // mt19937_64 output scaled to [0, 1); stable across standard libraries,
    // unlike the distribution adaptors.
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * sc_.cfg.jitter.half_width_us;
}

double Engine::tdm_wait(const std::string& node, const std::string& via_link,
                        const std::string& prev, double at_us) const {
    auto it = sc_.couplers.find(node);
    if (it == sc_.couplers.end()) return 0.0;
    const auto& [schedule, olt_side] = it->second;
    // Slotted access applies to the upstream direction only.
    const Link& l = sc_.cfg.topology.link(via_link);
    if (sc_.cfg.topology.other_end(l, node) != olt_side) return 0.0;
    return schedule.wait_us(prev, at_us);
}

void Engine::record(double t, EventKind k, const std::string& node,
                    std::uint64_t packet) {
    if (trace_enabled_) trace_.push_back({t, k, node, packet});
}

void Engine::dispatch(Event& ev) {
    Packet& p = ev.packet;
    p.sent_at_us = ev.time_us;
    p.hop_trace.emplace_back(p.src, ev.time_us);
    if (p.src == p.dst) {
        deliver(std::move(p), ev.time_us);
        return;
    }
    if (!sc_.tables.has_entry(p.src, p.dst)) {
        drop(p, p.src, "no forwarding entry");
        return;
    }
    // The sender only serializes the packet; its own stack cost is not part
    // of the measured path.
    const std::string from = p.src;
    const NextHop next = sc_.tables.lookup(p.src, p.dst);
    transmit(std::move(p), from, next, ev.time_us);
}

void Engine::arrive(Event& ev) {
    Packet& p = ev.packet;
    const std::string node = ev.node;
    const Node& n = sc_.cfg.topology.node(node);
    p.hop_trace.emplace_back(node, ev.time_us);

    if (node == p.dst) {
        const PacketKind kind = p.kind;
        const Packet delivered = std::move(p);
        deliver(delivered, ev.time_us);
        if (kind == PacketKind::EchoRequest)
            reply(delivered, PacketKind::EchoReply, node, ev.time_us);
        return;
    }

    if (!sc_.tables.has_entry(node, p.dst)) {
        drop(p, node, "no forwarding entry");
        return;
    }

    if (is_ip_forwarder(n.kind)) {
        if (p.ttl <= 1) {
            // Hop limit exhausted: the packet dies here and the node names
            // itself in the notification sent back.
            p.ttl = 0;
            drop(p, node, "ttl exceeded");
            if (p.kind == PacketKind::EchoRequest)
                reply(p, PacketKind::TimeExceeded, node, ev.time_us);
            return;
        }
        p.ttl -= 1;
        const NextHop next = sc_.tables.lookup(node, p.dst);
        const double delay = std::max(0.0, n.processing_delay_us + jitter_draw());
        transmit(std::move(p), node, next, ev.time_us + delay);
        return;
    }

    // Transparent relay: adds its configured latency, never touches TTL.
    const NextHop next = sc_.tables.lookup(node, p.dst);
    double ready = ev.time_us + n.processing_delay_us;
    if (n.kind == NodeKind::Coupler) {
        const std::string& prev = p.hop_trace[p.hop_trace.size() - 2].first;
        ready += tdm_wait(node, next.link, prev, ready);
    }
    transmit(std::move(p), node, next, ready);
}

void Engine::transmit(Packet p, const std::string& from, const NextHop& next,
                      double ready_us) {
    const Link& l = sc_.cfg.topology.link(next.link);
    const double tx = transmission_delay_us(p.size_bytes, l.rate_gbps);
    const double prop = propagation_delay_us(l, sc_.constants);

    // One FIFO per link direction; a busy transmitter queues the packet.
    auto& pending = link_busy_[next.link + "|" + from];
    std::erase_if(pending, [ready_us](double dep) { return dep <= ready_us; });
    const double start =
        pending.empty() ? ready_us : std::max(ready_us, *std::max_element(pending.begin(), pending.end()));
    if (queue_capacity_ >= 0 && static_cast<int>(pending.size()) > queue_capacity_) {
        drop(p, from, "queue overflow");
        return;
    }
    const double depart = start + tx;
    pending.push_back(depart);
    max_queue_depth_ = std::max(max_queue_depth_, static_cast<int>(pending.size()));

    queue_.push(Event{depart + prop, next_seq_++, EventKind::PacketArrival,
                      std::move(p), next.node});
}

void Engine::deliver(Packet p, double at_us) {
    p.received_at_us = at_us;
    ++stats_.delivered;
    deliveries_.push_back(std::move(p));
}

void Engine::drop(const Packet&, const std::string&, const std::string&) {
    ++stats_.dropped;
}

void Engine::reply(const Packet& request, PacketKind kind, const std::string& from,
                   double ready_us) {
    Packet r;
    r.id = next_packet_id_++;
    r.kind = kind;
    r.size_bytes = request.size_bytes;
    r.ttl = 64;
    r.src = from;
    r.dst = request.src;
    r.answers_id = request.id;
    r.reporter = from;
    ++stats_.injected;

    if (!sc_.tables.has_entry(from, r.dst)) {
        drop(r, from, "no forwarding entry");
        return;
    }
    // Terminating the packet and originating the answer are two forwarding
    // decisions, so the node's processing delay is charged twice.
    const double proc = sc_.cfg.topology.node(from).processing_delay_us;
    const double delay = std::max(0.0, 2.0 * proc + jitter_draw());
    r.sent_at_us = ready_us + delay;
    r.hop_trace.emplace_back(from, r.sent_at_us);
    const NextHop next = sc_.tables.lookup(from, r.dst);
    const double at = r.sent_at_us;
    transmit(std::move(r), from, next, at);
}

std::vector<Packet> Engine::take_deliveries() {
    std::vector<Packet> out;
    out.swap(deliveries_);
    return out;
}

void export_trace_csv(const std::vector<TraceRow>& rows, std::ostream& out) {
    out << "time_us,event_kind,node_id,packet_id\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.3f", r.time_us);
        out << buf << ','
            << (r.kind == EventKind::ProbeDispatch ? "probe_dispatch" : "packet_arrival")
            << ',' << r.node_id << ',' << r.packet_id << '\n';
    }
}

double closed_form_rtt_us(const CompiledScenario& sc, const Route& r,
                          int size_bytes, double start_us) {
    if (r.nodes.size() < 2) return 0.0;
    const Topology& t = sc.cfg.topology;

    auto coupler_wait = [&](const std::string& node, const std::string& link,
                            const std::string& prev, double at) {
        auto it = sc.couplers.find(node);
        if (it == sc.couplers.end()) return 0.0;
        const auto& [schedule, olt_side] = it->second;
        if (t.other_end(t.link(link), node) != olt_side) return 0.0;
        return schedule.wait_us(prev, at);
    };

    double now = start_us;
    auto walk = [&](const std::vector<std::string>& nodes,
                    const std::vector<std::string>& links) {
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            if (i > 0) {
                now += t.node(nodes[i]).processing_delay_us;
                if (t.node(nodes[i]).kind == NodeKind::Coupler)
                    now += coupler_wait(nodes[i], links[i], nodes[i - 1], now);
            }
            const Link& l = t.link(links[i]);
            now += transmission_delay_us(size_bytes, l.rate_gbps);
            now += propagation_delay_us(l, sc.constants);
        }
    };

    walk(r.nodes, r.links);
    // Turnaround at the destination: terminate plus originate.
    now += 2.0 * t.node(r.nodes.back()).processing_delay_us;

    std::vector<std::string> back_nodes(r.nodes.rbegin(), r.nodes.rend());
    std::vector<std::string> back_links(r.links.rbegin(), r.links.rend());
    walk(back_nodes, back_links);
    return now - start_us;
}

} // namespace ponsim
