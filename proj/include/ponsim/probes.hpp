#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ponsim/campaign.hpp"
#include "ponsim/simcore.hpp"

namespace ponsim {

struct HopStats {
    int hop_index = 0;          // 1-based TTL
    std::string node_id;
    std::vector<double> samples; // cumulative RTT per answered probe, us
    double mean_us = 0.0;
    double min_us = 0.0;
    double max_us = 0.0;
};

// One answered probe: (iteration, probe, hop) -> cumulative RTT.
struct ProbeSample {
    int iteration = 0;    // 1-based
    int probe_index = 0;  // 1-based
    int hop_index = 0;    // 1-based
    std::string node_id;
    double rtt_us = 0.0;
};

// Per-hop values are cumulative to that hop, standard TTL-sweep semantics.
struct LatencyReport {
    std::string src;
    std::string dst;
    int iterations = 0;
    int probes_per_run = 0;
    std::vector<HopStats> hops;
    // [iteration][hop] mean, for per-iteration series output
    std::vector<std::vector<double>> iteration_hop_means;
    std::vector<ProbeSample> samples; // every answered probe, export order
    double end_to_end_mean_us = 0.0;
    double end_to_end_min_us = 0.0;
    double end_to_end_max_us = 0.0;
    double loss_fraction = 0.0;
};

struct PingResult {
    int sent = 0;
    int received = 0;
    double loss_fraction = 0.0;  // a result, not an error
    double mean_rtt_us = 0.0;
    double min_rtt_us = 0.0;
    double max_rtt_us = 0.0;
};

struct CalibrationTargets {
    double per_node_rtt_us = 200.0;
    double core_to_olt_extra_us = 700.0;
    double end_to_end_max_us = 2000.0;
    double range_min_us = 195.8;
    double range_max_us = 1761.9;
};

// Echo src -> dst `count` times at the probe gap. src == dst short-circuits
// to zero RTT and zero loss. Throws UnreachableError when no route exists.
PingResult ping(const CompiledScenario& sc, const std::string& src,
                const std::string& dst, int count);

// TTL sweep: per iteration, probes_per_run probes per hop, iterations
// independent engine runs (seeded per slot). Aggregates all samples per hop.
LatencyReport traceroute(const CompiledScenario& sc, const std::string& src,
                         const std::string& dst, const ProbeConfig& cfg,
                         ExecMode mode = ExecMode::Parallel);

// Per-node processing delays that make each tested hop's incremental
// zero-jitter RTT meet per_node_rtt_us (plus core_to_olt_extra_us on a hop
// entering an OLT from a core node), by inverting
//   increment = 2 * (propagation + transmission + processing) + tdm_wait
// over the segment since the previous tested hop. Off-path nodes get their
// kind's canonical value; transparent relays get zero. Throws
// InfeasibleError (with the residual) when a target cannot absorb the
// segment's irreducible delay.
std::map<std::string, double> calibrate_processing_delays(
    const Topology& t, const CalibrationTargets& targets = {});

struct CbrResult {
    int sent = 0;
    int delivered = 0;
    double delivered_fraction = 1.0; // zero-duration flow delivers trivially
    int max_queue_depth = 0;
};

// Constant-bit-rate flow of 1200-byte packets from src to dst. Throws
// InvalidArgument when rate_mbps exceeds the slowest link on the route or
// the duration is negative.
CbrResult run_cbr_flow(const CompiledScenario& sc, const std::string& src,
                       const std::string& dst, double rate_mbps,
                       double duration_us);

struct ScalingHopDelta {
    int hop_index = 0;
    std::string node_id;
    double baseline_inc_us = 0.0;
    double variant_inc_us = 0.0;
};

struct ScalingComparison {
    int shared_prefix_hops = 0;
    double max_shared_delta_us = 0.0;        // over the shared prefix
    std::vector<ScalingHopDelta> shared;
    std::vector<ScalingHopDelta> added;      // hops only in the variant
    double baseline_end_to_end_us = 0.0;
    double variant_end_to_end_us = 0.0;
    double end_to_end_delta_us = 0.0;
};

// Hop-by-hop increments of two reports, matched by node id from hop 1 until
// they diverge. Throws InvalidArgument when there is no common prefix.
ScalingComparison compare_scaling(const LatencyReport& baseline,
                                  const LatencyReport& variant);

// CSV: iteration, probe_index, hop_index, node_id, rtt_us (3 decimals)
void export_report_csv(const LatencyReport& r, std::ostream& out);
// CSV: hop_index, node_id, mean_us, min_us, max_us, samples
void export_aggregate_csv(const LatencyReport& r, std::ostream& out);
// CSV: iteration, hop_index, node_id, mean_us (per-iteration series)
void export_iteration_series_csv(const LatencyReport& r, std::ostream& out);
// CSV: hop_index, node_id, mean_us, increment_us (bar-chart form)
void export_hop_means_csv(const LatencyReport& r, std::ostream& out);
// CSV: hop_index, node_id, baseline_inc_us, variant_inc_us, delta_us with
// added hops carrying empty baseline columns.
void export_comparison_csv(const ScalingComparison& c, std::ostream& out);

} // namespace ponsim
