// Times a traceroute campaign executed serially and in parallel on the same
// scenario and verifies both produce byte-identical reports.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "ponsim/campaign.hpp"
#include "ponsim/probes.hpp"
#include "ponsim/simcore.hpp"
#include "ponsim/topo.hpp"

namespace {

std::string report_bytes(const ponsim::LatencyReport& rep) {
    std::ostringstream out;
    ponsim::export_report_csv(rep, out);
    return out.str();
}

} // namespace

int main(int argc, char** argv) {
    int iterations = 48;
    if (argc > 1) iterations = std::atoi(argv[1]);
    if (iterations <= 0) {
        std::fprintf(stderr, "usage: %s [iterations>0]\n", argv[0]);
        return 2;
    }

    ponsim::ScenarioConfig cfg = ponsim::build_reference_testbed();
    cfg.probe.iterations = iterations;
    const ponsim::CompiledScenario sc = ponsim::CompiledScenario::compile(cfg);
    const auto [from, to] = ponsim::reference_endpoints(cfg.topology);

    using clock = std::chrono::steady_clock;
    auto timed = [&](ponsim::ExecMode mode, ponsim::LatencyReport& rep) {
        const auto t0 = clock::now();
        rep = ponsim::traceroute(sc, from, to, cfg.probe, mode);
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    ponsim::LatencyReport serial_rep, parallel_rep;
    const double serial_s = timed(ponsim::ExecMode::Serial, serial_rep);
    const double parallel_s = timed(ponsim::ExecMode::Parallel, parallel_rep);

    std::printf("campaign: %d iterations x %d probes x %zu hops\n", iterations,
                cfg.probe.probes_per_run, serial_rep.hops.size());
    std::printf("serial  : %8.3f s\n", serial_s);
    std::printf("parallel: %8.3f s  (%d threads, %.2fx)\n", parallel_s,
                ponsim::parallel_width(),
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0);

    const bool identical = report_bytes(serial_rep) == report_bytes(parallel_rep);
    std::printf("results identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
