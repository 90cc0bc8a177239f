#include "ponsim/probes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "ponsim/error.hpp"

namespace ponsim {

namespace {

// Calibration and probing assume the standard echo payload.
constexpr int kEchoBytes = 64;
constexpr int kDefaultTtl = 64;
constexpr int kCbrBytes = 1200;

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

void require_node(const Topology& t, const std::string& id) {
    if (!t.has_node(id)) throw InvalidArgument("unknown node " + id);
}

struct Summary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

Summary summarize(const std::vector<double>& xs) {
    Summary s;
    if (xs.empty()) return s;
    double total = 0.0;
    s.min = xs.front();
    s.max = xs.front();
    for (double x : xs) {
        total += x;
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.mean = total / static_cast<double>(xs.size());
    return s;
}

} // namespace

PingResult ping(const CompiledScenario& sc, const std::string& src,
                const std::string& dst, int count) {
    require_node(sc.cfg.topology, src);
    require_node(sc.cfg.topology, dst);
    if (count <= 0) throw InvalidArgument("ping count must be positive");

    PingResult res;
    res.sent = count;
    if (src == dst) {
        res.received = count;
        return res;
    }
    if (!sc.tables.has_entry(src, dst))
        throw UnreachableError("no route from " + src + " to " + dst);

    Engine engine(sc);
    const double gap = sc.cfg.probe.inter_probe_gap_us;
    std::map<std::uint64_t, double> sent_at; // request id -> dispatch time
    for (int i = 0; i < count; ++i) {
        const double at = static_cast<double>(i) * gap;
        sent_at.emplace(engine.inject(PacketKind::EchoRequest, src, dst,
                                      sc.cfg.probe.probe_size_bytes, kDefaultTtl, at),
                        at);
    }
    engine.run();

    std::vector<double> rtts;
    for (const Packet& p : engine.deliveries()) {
        if (p.kind != PacketKind::EchoReply) continue;
        auto it = sent_at.find(p.answers_id);
        if (it == sent_at.end()) continue;
        rtts.push_back(p.received_at_us - it->second);
    }
    res.received = static_cast<int>(rtts.size());
    res.loss_fraction =
        static_cast<double>(count - res.received) / static_cast<double>(count);
    const Summary s = summarize(rtts);
    res.mean_rtt_us = s.mean;
    res.min_rtt_us = s.min;
    res.max_rtt_us = s.max;
    return res;
}

LatencyReport traceroute(const CompiledScenario& sc, const std::string& src,
                         const std::string& dst, const ProbeConfig& cfg,
                         ExecMode mode) {
    require_node(sc.cfg.topology, src);
    require_node(sc.cfg.topology, dst);
    if (src == dst) throw InvalidArgument("traceroute needs distinct endpoints");
    if (cfg.iterations <= 0 || cfg.probes_per_run <= 0 ||
        cfg.probe_size_bytes <= 0 || cfg.inter_probe_gap_us <= 0.0)
        throw InvalidArgument("probe settings must be positive");

    const Route path = route(sc.tables, src, dst);
    const std::vector<std::string> hops = traced_hops(sc.cfg.topology, path);
    const int n_hops = static_cast<int>(hops.size());
    const int probes = cfg.probes_per_run;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // One TTL sweep per iteration on its own engine; slot-indexed results
    // keep aggregation order independent of scheduling.
    std::vector<std::vector<std::vector<double>>> slots(
        cfg.iterations,
        std::vector<std::vector<double>>(n_hops, std::vector<double>(probes, nan)));

    for_each_index(cfg.iterations, mode, [&](std::size_t slot) {
        Engine engine(sc, slot_seed(sc.cfg.seed, slot));
        std::map<std::uint64_t, std::pair<int, int>> outstanding; // id -> (hop, probe)
        int counter = 0;
        for (int k = 1; k <= n_hops; ++k) {
            for (int j = 0; j < probes; ++j) {
                const double at = counter++ * cfg.inter_probe_gap_us;
                const std::uint64_t id = engine.inject(
                    PacketKind::EchoRequest, src, dst, cfg.probe_size_bytes, k, at);
                outstanding.emplace(id, std::make_pair(k - 1, j));
            }
        }
        engine.run();
        auto& mine = slots[slot];
        for (const Packet& p : engine.deliveries()) {
            if (p.kind != PacketKind::EchoReply && p.kind != PacketKind::TimeExceeded)
                continue;
            auto it = outstanding.find(p.answers_id);
            if (it == outstanding.end()) continue;
            const auto [hop, probe] = it->second;
            const double dispatched =
                (hop * probes + probe) * cfg.inter_probe_gap_us;
            mine[hop][probe] = p.received_at_us - dispatched;
        }
    });

    LatencyReport rep;
    rep.src = src;
    rep.dst = dst;
    rep.iterations = cfg.iterations;
    rep.probes_per_run = probes;
    rep.iteration_hop_means.assign(cfg.iterations, std::vector<double>(n_hops, 0.0));

    std::size_t lost = 0;
    for (int k = 0; k < n_hops; ++k) {
        HopStats hs;
        hs.hop_index = k + 1;
        hs.node_id = hops[k];
        for (int i = 0; i < cfg.iterations; ++i) {
            double total = 0.0;
            int answered = 0;
            for (int j = 0; j < probes; ++j) {
                const double rtt = slots[i][k][j];
                if (std::isnan(rtt)) {
                    ++lost;
                    continue;
                }
                hs.samples.push_back(rtt);
                total += rtt;
                ++answered;
            }
            rep.iteration_hop_means[i][k] = answered ? total / answered : 0.0;
        }
        const Summary s = summarize(hs.samples);
        hs.mean_us = s.mean;
        hs.min_us = s.min;
        hs.max_us = s.max;
        rep.hops.push_back(std::move(hs));
    }

    // Flat sample list in send order: iteration, then hop, then probe.
    for (int i = 0; i < cfg.iterations; ++i)
        for (int k = 0; k < n_hops; ++k)
            for (int j = 0; j < probes; ++j) {
                const double rtt = slots[i][k][j];
                if (std::isnan(rtt)) continue;
                rep.samples.push_back({i + 1, j + 1, k + 1, hops[k], rtt});
            }

    const HopStats& last = rep.hops.back();
    rep.end_to_end_mean_us = last.mean_us;
    rep.end_to_end_min_us = last.min_us;
    rep.end_to_end_max_us = last.max_us;
    rep.loss_fraction = static_cast<double>(lost) /
                        static_cast<double>(static_cast<std::size_t>(n_hops) *
                                            cfg.iterations * probes);
    return rep;
}

std::map<std::string, double> calibrate_processing_delays(
    const Topology& t, const CalibrationTargets& targets) {
    if (auto vs = validate_topology(t); !vs.empty())
        throw ValidationError("cannot calibrate an invalid topology (" +
                              std::to_string(vs.size()) + " violations)");

    const AddressPlan plan = derive_address_plan(t);
    const ForwardingTables tables = compute_forwarding_tables(t, plan);
    const auto [src, dst] = reference_endpoints(t);
    const Route path = route(tables, src, dst);
    const std::vector<std::string> visible = traced_hops(t, path);

    auto transparent = [](NodeKind k) {
        return k == NodeKind::RackSwitch || k == NodeKind::OpticalBackplane ||
               k == NodeKind::Coupler || k == NodeKind::Awgr;
    };

    // Mean upstream slot wait a reply or request pays when the segment
    // crosses a coupler toward its OLT.
    auto coupler_mean_wait = [&](const std::string& coupler, const std::string& prev,
                                 const std::string& next) {
        std::string olt_side;
        std::vector<std::string> senders;
        for (const auto& nb : t.neighbors(coupler)) {
            if (t.node(nb).kind == NodeKind::Olt && olt_side.empty())
                olt_side = nb;
            else
                senders.push_back(nb);
        }
        if (olt_side.empty() || senders.empty()) return 0.0;
        const TdmSchedule sched = build_tdm_schedule(
            senders, kTdmFrameUs, kTdmFrameUs / senders.size());
        // Exactly one leg of the round trip heads upstream through here.
        if (next == olt_side) return sched.mean_wait_us(prev);
        if (prev == olt_side) return sched.mean_wait_us(next);
        return 0.0;
    };

    std::map<std::string, double> out;
    for (const auto& [id, n] : t.nodes)
        out[id] = transparent(n.kind) ? 0.0 : targets.per_node_rtt_us / 2.0;

    std::size_t prev_idx = 0; // index into path.nodes of the previous tested hop
    std::string prev_kind_id = src;
    for (const std::string& hop : visible) {
        const std::size_t hop_idx =
            std::find(path.nodes.begin(), path.nodes.end(), hop) - path.nodes.begin();

        double irreducible = 0.0;
        for (std::size_t i = prev_idx; i < hop_idx; ++i) {
            const Link& l = t.link(path.links[i]);
            irreducible += 2.0 * (propagation_delay_us(l) +
                                  transmission_delay_us(kEchoBytes, l.rate_gbps));
            const std::string& mid = path.nodes[i];
            if (i > prev_idx && t.node(mid).kind == NodeKind::Coupler)
                irreducible +=
                    coupler_mean_wait(mid, path.nodes[i - 1], path.nodes[i + 1]);
        }

        double target = targets.per_node_rtt_us;
        if (t.node(hop).kind == NodeKind::Olt &&
            t.node(prev_kind_id).kind == NodeKind::CoreNode)
            target += targets.core_to_olt_extra_us;

        const double residual = irreducible - target;
        if (residual > 1.0)
            throw InfeasibleError("hop at " + hop + " cannot meet its target: " +
                                      fmt3(irreducible) + " us of fixed delay against " +
                                      fmt3(target) + " us",
                                  residual);
        out[hop] = std::max(0.0, (target - irreducible) / 2.0);
        prev_idx = hop_idx;
        prev_kind_id = hop;
    }
    return out;
}

CbrResult run_cbr_flow(const CompiledScenario& sc, const std::string& src,
                       const std::string& dst, double rate_mbps,
                       double duration_us) {
    require_node(sc.cfg.topology, src);
    require_node(sc.cfg.topology, dst);
    if (rate_mbps <= 0.0) throw InvalidArgument("flow rate must be positive");
    if (duration_us < 0.0) throw InvalidArgument("flow duration must be >= 0");

    const Route path = route(sc.tables, src, dst);
    double bottleneck_mbps = std::numeric_limits<double>::infinity();
    for (const auto& lid : path.links)
        bottleneck_mbps =
            std::min(bottleneck_mbps, sc.cfg.topology.link(lid).rate_gbps * 1000.0);
    if (rate_mbps > bottleneck_mbps)
        throw InvalidArgument("flow rate " + fmt3(rate_mbps) +
                              " Mbps exceeds the slowest route link (" +
                              fmt3(bottleneck_mbps) + " Mbps)");

    CbrResult res;
    if (duration_us == 0.0) return res;

    // Mbps is bits per microsecond, so the packet interval falls out directly.
    const double interval_us = kCbrBytes * 8.0 / rate_mbps;
    Engine engine(sc);
    for (int i = 0; static_cast<double>(i) * interval_us < duration_us; ++i) {
        engine.inject(PacketKind::Data, src, dst, kCbrBytes, kDefaultTtl,
                      static_cast<double>(i) * interval_us);
        ++res.sent;
    }
    engine.run();
    for (const Packet& p : engine.deliveries())
        if (p.kind == PacketKind::Data) ++res.delivered;
    res.delivered_fraction =
        static_cast<double>(res.delivered) / static_cast<double>(res.sent);
    res.max_queue_depth = engine.max_queue_depth();
    return res;
}

namespace {

std::vector<double> increments(const LatencyReport& r) {
    std::vector<double> inc;
    double prev = 0.0;
    for (const auto& h : r.hops) {
        inc.push_back(h.mean_us - prev);
        prev = h.mean_us;
    }
    return inc;
}

} // namespace

ScalingComparison compare_scaling(const LatencyReport& baseline,
                                  const LatencyReport& variant) {
    const std::vector<double> b_inc = increments(baseline);
    const std::vector<double> v_inc = increments(variant);

    std::size_t shared = 0;
    while (shared < baseline.hops.size() && shared < variant.hops.size() &&
           baseline.hops[shared].node_id == variant.hops[shared].node_id)
        ++shared;
    if (shared == 0)
        throw InvalidArgument("reports do not share a route prefix");

    ScalingComparison c;
    c.shared_prefix_hops = static_cast<int>(shared);
    for (std::size_t k = 0; k < shared; ++k) {
        c.shared.push_back({static_cast<int>(k) + 1, baseline.hops[k].node_id,
                            b_inc[k], v_inc[k]});
        c.max_shared_delta_us =
            std::max(c.max_shared_delta_us, std::abs(v_inc[k] - b_inc[k]));
    }
    for (std::size_t k = shared; k < variant.hops.size(); ++k) {
        const std::string& id = variant.hops[k].node_id;
        const bool known = std::any_of(
            baseline.hops.begin(), baseline.hops.end(),
            [&](const HopStats& h) { return h.node_id == id; });
        if (!known)
            c.added.push_back({static_cast<int>(k) + 1, id, 0.0, v_inc[k]});
    }
    c.baseline_end_to_end_us = baseline.end_to_end_mean_us;
    c.variant_end_to_end_us = variant.end_to_end_mean_us;
    c.end_to_end_delta_us = c.variant_end_to_end_us - c.baseline_end_to_end_us;
    return c;
}

void export_report_csv(const LatencyReport& r, std::ostream& out) {
    out << "iteration,probe_index,hop_index,node_id,rtt_us\n";
    for (const auto& s : r.samples)
        out << s.iteration << ',' << s.probe_index << ',' << s.hop_index << ','
            << s.node_id << ',' << fmt3(s.rtt_us) << '\n';
}

void export_aggregate_csv(const LatencyReport& r, std::ostream& out) {
    out << "hop_index,node_id,mean_us,min_us,max_us,samples\n";
    for (const auto& h : r.hops)
        out << h.hop_index << ',' << h.node_id << ',' << fmt3(h.mean_us) << ','
            << fmt3(h.min_us) << ',' << fmt3(h.max_us) << ',' << h.samples.size()
            << '\n';
}

void export_iteration_series_csv(const LatencyReport& r, std::ostream& out) {
    out << "iteration,hop_index,node_id,mean_us\n";
    for (std::size_t i = 0; i < r.iteration_hop_means.size(); ++i)
        for (std::size_t k = 0; k < r.iteration_hop_means[i].size(); ++k)
            out << i + 1 << ',' << k + 1 << ',' << r.hops[k].node_id << ','
                << fmt3(r.iteration_hop_means[i][k]) << '\n';
}

void export_hop_means_csv(const LatencyReport& r, std::ostream& out) {
    out << "hop_index,node_id,mean_us,increment_us\n";
    double prev = 0.0;
    for (const auto& h : r.hops) {
        out << h.hop_index << ',' << h.node_id << ',' << fmt3(h.mean_us) << ','
            << fmt3(h.mean_us - prev) << '\n';
        prev = h.mean_us;
    }
}

void export_comparison_csv(const ScalingComparison& c, std::ostream& out) {
    out << "hop_index,node_id,baseline_inc_us,variant_inc_us,delta_us\n";
    for (const auto& d : c.shared)
        out << d.hop_index << ',' << d.node_id << ',' << fmt3(d.baseline_inc_us)
            << ',' << fmt3(d.variant_inc_us) << ','
            << fmt3(d.variant_inc_us - d.baseline_inc_us) << '\n';
    for (const auto& d : c.added)
        out << d.hop_index << ',' << d.node_id << ",," << fmt3(d.variant_inc_us)
            << ",\n";
}

} // namespace ponsim
