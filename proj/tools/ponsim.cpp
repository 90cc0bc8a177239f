// Command-line front end: validate scenario files, run latency campaigns,
// emit figure-ready CSV data, and compare testbed generations.

#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ponsim/error.hpp"
#include "ponsim/probes.hpp"
#include "ponsim/scenario_io.hpp"
#include "ponsim/simcore.hpp"
#include "ponsim/version.hpp"

namespace fs = std::filesystem;

namespace {

std::string iso_utc_now() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// --seed wins over SIM_SEED wins over the scenario file.
void apply_seed(ponsim::ScenarioConfig& cfg, const CLI::Option* seed_opt,
                std::uint64_t seed_value) {
    if (seed_opt->count() > 0) {
        cfg.seed = seed_value;
        return;
    }
    const char* env = std::getenv("SIM_SEED");
    if (!env || !*env) return;
    std::string s(env);
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ponsim::ParseError("SIM_SEED must be a non-negative integer, got '" +
                                     s + "'");
    cfg.seed = std::strtoull(s.c_str(), nullptr, 10);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ponsim::IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out.good()) throw ponsim::IoError("failed writing " + path.string());
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ponsim::IoError("cannot create output directory " + dir + ": " +
                                  ec.message());
    return p;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& scenario, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
    nlohmann::json m;
    m["command"] = command;
    m["scenario"] = scenario;
    m["seed"] = seed;
    m["outputs"] = outputs;
    m["version"] = ponsim::kVersion;
    m["started_at"] = iso_utc_now();
    write_file(dir / "manifest.json", m.dump(2) + "\n");
}

template <typename ExportFn>
std::string to_csv(ExportFn&& fn) {
    std::ostringstream out;
    fn(out);
    return out.str();
}

int run_validate(const std::string& scenario) {
    try {
        const ponsim::ScenarioConfig cfg = ponsim::load_scenario_or_builtin(scenario);
        std::cout << "OK: " << cfg.topology.nodes.size() << " nodes, "
                  << cfg.topology.links.size() << " links, mode "
                  << ponsim::to_string(cfg.topology.interconnect_mode) << "\n";
        return 0;
    } catch (const ponsim::ValidationError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 1;
    }
}

int run_traceroute(const std::string& scenario, std::string from, std::string to,
                   const CLI::Option* seed_opt, std::uint64_t seed_value,
                   const CLI::Option* iter_opt, int iterations,
                   const CLI::Option* probes_opt, int probes, bool zero_jitter,
                   const std::string& out_dir) {
    ponsim::ScenarioConfig cfg = ponsim::load_scenario_or_builtin(scenario);
    apply_seed(cfg, seed_opt, seed_value);
    if (zero_jitter) cfg.jitter = ponsim::JitterModel::none();
    if (iter_opt->count() > 0) cfg.probe.iterations = iterations;
    if (probes_opt->count() > 0) cfg.probe.probes_per_run = probes;
    if (from.empty() || to.empty()) {
        const auto [a, b] = ponsim::reference_endpoints(cfg.topology);
        if (from.empty()) from = a;
        if (to.empty()) to = b;
    }

    const ponsim::CompiledScenario sc = ponsim::CompiledScenario::compile(cfg);
    const ponsim::LatencyReport rep =
        ponsim::traceroute(sc, from, to, cfg.probe, ponsim::ExecMode::Parallel);

    const fs::path dir = ensure_out_dir(out_dir);
    write_file(dir / "probes.csv",
               to_csv([&](std::ostream& o) { ponsim::export_report_csv(rep, o); }));
    write_file(dir / "aggregate.csv",
               to_csv([&](std::ostream& o) { ponsim::export_aggregate_csv(rep, o); }));
    write_manifest(dir, "traceroute", scenario, cfg.seed,
                   {"probes.csv", "aggregate.csv"});

    std::printf("route %s -> %s: %zu reported hops, %d iterations x %d probes, seed %llu\n",
                rep.src.c_str(), rep.dst.c_str(), rep.hops.size(), rep.iterations,
                rep.probes_per_run,
                static_cast<unsigned long long>(cfg.seed));
    std::printf("%4s  %-12s %12s %12s %12s\n", "hop", "node", "mean_us", "min_us",
                "max_us");
    for (const auto& h : rep.hops)
        std::printf("%4d  %-12s %12.3f %12.3f %12.3f\n", h.hop_index,
                    h.node_id.c_str(), h.mean_us, h.min_us, h.max_us);
    std::printf("end-to-end mean %.3f us, loss %.1f%%\n", rep.end_to_end_mean_us,
                rep.loss_fraction * 100.0);
    std::printf("wrote %s\n", (dir / "probes.csv").string().c_str());
    return 0;
}

int run_fig(int figure, const std::string& scenario, const CLI::Option* seed_opt,
            std::uint64_t seed_value, const std::string& out_dir) {
    if (figure != 6 && figure != 7) {
        std::cerr << "error: unknown figure " << figure << " (supported: 6, 7)\n";
        return 1;
    }
    ponsim::ScenarioConfig cfg = ponsim::load_scenario_or_builtin(scenario);
    apply_seed(cfg, seed_opt, seed_value);

    const auto [from, to] = ponsim::reference_endpoints(cfg.topology);
    const ponsim::CompiledScenario sc = ponsim::CompiledScenario::compile(cfg);
    const ponsim::LatencyReport rep =
        ponsim::traceroute(sc, from, to, cfg.probe, ponsim::ExecMode::Parallel);

    const fs::path dir = ensure_out_dir(out_dir);
    const std::string name = figure == 6 ? "fig6.csv" : "fig7.csv";
    if (figure == 6)
        write_file(dir / name, to_csv([&](std::ostream& o) {
                       ponsim::export_hop_means_csv(rep, o);
                   }));
    else
        write_file(dir / name, to_csv([&](std::ostream& o) {
                       ponsim::export_iteration_series_csv(rep, o);
                   }));
    write_manifest(dir, "fig" + std::to_string(figure), scenario, cfg.seed, {name});
    std::printf("wrote %s\n", (dir / name).string().c_str());
    return 0;
}

int run_compare(const std::string& baseline, const std::string& variant,
                const CLI::Option* seed_opt, std::uint64_t seed_value,
                const std::string& out_dir) {
    ponsim::ScenarioConfig base_cfg = ponsim::load_scenario_or_builtin(baseline);
    ponsim::ScenarioConfig var_cfg = ponsim::load_scenario_or_builtin(variant);
    apply_seed(base_cfg, seed_opt, seed_value);
    apply_seed(var_cfg, seed_opt, seed_value);

    auto run_one = [](const ponsim::ScenarioConfig& cfg) {
        const auto [from, to] = ponsim::reference_endpoints(cfg.topology);
        const ponsim::CompiledScenario sc = ponsim::CompiledScenario::compile(cfg);
        return ponsim::traceroute(sc, from, to, cfg.probe, ponsim::ExecMode::Parallel);
    };
    const ponsim::LatencyReport base_rep = run_one(base_cfg);
    const ponsim::LatencyReport var_rep = run_one(var_cfg);
    const ponsim::ScalingComparison cmp = ponsim::compare_scaling(base_rep, var_rep);

    const fs::path dir = ensure_out_dir(out_dir);
    write_file(dir / "compare.csv", to_csv([&](std::ostream& o) {
                   ponsim::export_comparison_csv(cmp, o);
               }));
    write_manifest(dir, "compare", baseline + " vs " + variant, base_cfg.seed,
                   {"compare.csv"});

    std::printf("shared prefix: %d hops, max increment delta %.3f us\n",
                cmp.shared_prefix_hops, cmp.max_shared_delta_us);
    for (const auto& d : cmp.added)
        std::printf("added hop %d %s: +%.3f us\n", d.hop_index, d.node_id.c_str(),
                    d.variant_inc_us);
    std::printf("end to end: %.3f -> %.3f us (%+.3f)\n", cmp.baseline_end_to_end_us,
                cmp.variant_end_to_end_us, cmp.end_to_end_delta_us);
    std::printf("wrote %s\n", (dir / "compare.csv").string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Packet-level latency simulator for optically interconnected server cells"};
    app.set_version_flag("--version", ponsim::kVersion);
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    std::string v_scenario;
    validate->add_option("--scenario", v_scenario,
                         "Scenario path or builtin:ref8 / builtin:prior5")
        ->required();

    auto* trace = app.add_subcommand("traceroute", "Hop-by-hop latency campaign");
    std::string t_scenario = "builtin:ref8";
    std::string t_from, t_to, t_out = "traceroute-out";
    std::uint64_t t_seed = 0;
    int t_iterations = 0, t_probes = 0;
    bool t_zero_jitter = false;
    trace->add_option("--scenario", t_scenario, "Scenario path or builtin name");
    trace->add_option("--from", t_from, "Source node (default: first server)");
    trace->add_option("--to", t_to, "Destination node (default: last server)");
    auto* t_seed_opt = trace->add_option("--seed", t_seed, "Override the scenario seed");
    auto* t_iter_opt =
        trace->add_option("--iterations", t_iterations, "Sweep repetitions")
            ->check(CLI::PositiveNumber);
    auto* t_probes_opt =
        trace->add_option("--probes", t_probes, "Probes per hop per iteration")
            ->check(CLI::PositiveNumber);
    trace->add_flag("--zero-jitter", t_zero_jitter, "Disable per-hop jitter");
    trace->add_option("--out", t_out, "Output directory");

    auto* fig = app.add_subcommand("fig", "Figure-ready CSV data");
    int f_figure = 0;
    std::string f_scenario = "builtin:ref8", f_out = "fig-out";
    std::uint64_t f_seed = 0;
    fig->add_option("--figure", f_figure, "Figure number (6 or 7)")->required();
    fig->add_option("--scenario", f_scenario, "Scenario path or builtin name");
    auto* f_seed_opt = fig->add_option("--seed", f_seed, "Override the scenario seed");
    fig->add_option("--out", f_out, "Output directory");

    auto* compare = app.add_subcommand("compare", "Hop increments across testbeds");
    std::string c_baseline = "builtin:prior5", c_variant = "builtin:ref8",
                c_out = "compare-out";
    std::uint64_t c_seed = 0;
    compare->add_option("--baseline", c_baseline, "Baseline scenario");
    compare->add_option("--variant", c_variant, "Variant scenario");
    auto* c_seed_opt =
        compare->add_option("--seed", c_seed, "Override both scenario seeds");
    compare->add_option("--out", c_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage trouble, not a domain failure
    }

    try {
        if (*validate) return run_validate(v_scenario);
        if (*trace)
            return run_traceroute(t_scenario, t_from, t_to, t_seed_opt, t_seed,
                                  t_iter_opt, t_iterations, t_probes_opt, t_probes,
                                  t_zero_jitter, t_out);
        if (*fig) return run_fig(f_figure, f_scenario, f_seed_opt, f_seed, f_out);
        if (*compare)
            return run_compare(c_baseline, c_variant, c_seed_opt, c_seed, c_out);
    } catch (const ponsim::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ponsim::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ponsim::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
