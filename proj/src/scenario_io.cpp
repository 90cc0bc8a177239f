#include "ponsim/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ponsim/error.hpp"

namespace ponsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail_validation(const std::vector<Violation>& vs) {
    std::ostringstream msg;
    msg << "scenario violates " << vs.size() << " invariant(s):";
    for (const auto& v : vs)
        msg << "\n  " << to_string(v.kind) << " " << v.entity_id << ": " << v.detail;
    throw ValidationError(msg.str());
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw ParseError("unknown key \"" + key + "\" in " + where);
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ParseError("missing key \"" + std::string(key) + "\" in " + where);
    return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string())
        throw ParseError("key \"" + std::string(key) + "\" in " + where +
                         " must be a string");
    return v.get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number())
        throw ParseError("key \"" + std::string(key) + "\" in " + where +
                         " must be a number");
    return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer())
        throw ParseError("key \"" + std::string(key) + "\" in " + where +
                         " must be an integer");
    return v.get<int>();
}

NodeKind parse_kind(const std::string& s, const std::string& where) {
    for (NodeKind k : {NodeKind::Server, NodeKind::GatewayServer, NodeKind::RackSwitch,
                       NodeKind::OpticalBackplane, NodeKind::Olt, NodeKind::Onu,
                       NodeKind::Coupler, NodeKind::Awgr, NodeKind::CoreNode,
                       NodeKind::Camera})
        if (s == to_string(k)) return k;
    throw ParseError("unknown node kind \"" + s + "\" in " + where);
}

Medium parse_medium(const std::string& s, const std::string& where) {
    if (s == "Copper") return Medium::Copper;
    if (s == "Fibre") return Medium::Fibre;
    throw ParseError("unknown medium \"" + s + "\" in " + where);
}

} // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports the position inside what(); keep it verbatim.
        throw ParseError(e.what());
    }
    if (!doc.is_object()) throw ParseError("scenario document must be an object");
    reject_unknown_keys(doc, "scenario",
                        {"nodes", "links", "interconnect_mode", "seed", "probe", "jitter"});

    ScenarioConfig cfg;
    try {
        const json& nodes = require(doc, "nodes", "scenario");
        if (!nodes.is_array()) throw ParseError("\"nodes\" must be an array");
        for (const auto& jn : nodes) {
            if (!jn.is_object()) throw ParseError("node entries must be objects");
            const std::string where = "node \"" + jn.value("id", std::string("?")) + "\"";
            reject_unknown_keys(jn, where, {"id", "kind", "rack", "cell", "processing_delay_us"});
            Node n;
            n.id = get_string(jn, "id", where);
            n.kind = parse_kind(get_string(jn, "kind", where), where);
            if (jn.contains("rack")) n.rack_id = get_string(jn, "rack", where);
            if (jn.contains("cell")) n.cell_id = get_string(jn, "cell", where);
            if (jn.contains("processing_delay_us"))
                n.processing_delay_us = get_number(jn, "processing_delay_us", where);
            cfg.topology.add_node(std::move(n));
        }

        const json& links = require(doc, "links", "scenario");
        if (!links.is_array()) throw ParseError("\"links\" must be an array");
        for (const auto& jl : links) {
            if (!jl.is_object()) throw ParseError("link entries must be objects");
            const std::string where = "link \"" + jl.value("id", std::string("?")) + "\"";
            reject_unknown_keys(jl, where, {"id", "a", "b", "length_km", "rate_gbps", "medium"});
            Link l;
            l.id = get_string(jl, "id", where);
            l.a = get_string(jl, "a", where);
            l.b = get_string(jl, "b", where);
            l.length_km = get_number(jl, "length_km", where);
            l.rate_gbps = get_number(jl, "rate_gbps", where);
            l.medium = parse_medium(get_string(jl, "medium", where), where);
            cfg.topology.add_link(std::move(l));
        }
    } catch (const InvalidArgument& e) {
        // Duplicate ids, dangling endpoints and the like are content
        // problems, not syntax problems.
        throw ValidationError(e.what());
    }

    {
        const std::string mode = get_string(doc, "interconnect_mode", "scenario");
        if (mode == "Tdm") cfg.topology.interconnect_mode = InterconnectMode::Tdm;
        else if (mode == "Awgr") cfg.topology.interconnect_mode = InterconnectMode::Awgr;
        else throw ParseError("unknown interconnect_mode \"" + mode + "\"");
    }

    {
        const json& seed = require(doc, "seed", "scenario");
        if (!seed.is_number_unsigned() && !seed.is_number_integer())
            throw ParseError("\"seed\" must be a non-negative integer");
        if (seed.is_number_integer() && seed.get<std::int64_t>() < 0)
            throw ParseError("\"seed\" must be a non-negative integer");
        cfg.seed = seed.get<std::uint64_t>();
    }

    {
        const json& probe = require(doc, "probe", "scenario");
        if (!probe.is_object()) throw ParseError("\"probe\" must be an object");
        reject_unknown_keys(probe, "probe",
                            {"iterations", "probes_per_run", "probe_size_bytes",
                             "inter_probe_gap_us"});
        cfg.probe.iterations = get_int(probe, "iterations", "probe");
        cfg.probe.probes_per_run = get_int(probe, "probes_per_run", "probe");
        cfg.probe.probe_size_bytes = get_int(probe, "probe_size_bytes", "probe");
        cfg.probe.inter_probe_gap_us = get_number(probe, "inter_probe_gap_us", "probe");
    }

    {
        const json& jitter = require(doc, "jitter", "scenario");
        if (!jitter.is_object()) throw ParseError("\"jitter\" must be an object");
        reject_unknown_keys(jitter, "jitter", {"kind", "half_width_us"});
        const std::string kind = get_string(jitter, "kind", "jitter");
        if (kind == "None") cfg.jitter.kind = JitterKind::None;
        else if (kind == "Uniform") cfg.jitter.kind = JitterKind::Uniform;
        else throw ParseError("unknown jitter kind \"" + kind + "\"");
        cfg.jitter.half_width_us = get_number(jitter, "half_width_us", "jitter");
    }

    if (auto vs = validate_scenario(cfg); !vs.empty()) fail_validation(vs);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error while reading scenario file: " + path);
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& c) {
    json doc;
    doc["nodes"] = json::array();
    for (const auto& [id, n] : c.topology.nodes) {
        json jn;
        jn["id"] = n.id;
        jn["kind"] = to_string(n.kind);
        if (!n.rack_id.empty()) jn["rack"] = n.rack_id;
        if (!n.cell_id.empty()) jn["cell"] = n.cell_id;
        jn["processing_delay_us"] = n.processing_delay_us;
        doc["nodes"].push_back(std::move(jn));
    }
    doc["links"] = json::array();
    for (const auto& [id, l] : c.topology.links) {
        json jl;
        jl["id"] = l.id;
        jl["a"] = l.a;
        jl["b"] = l.b;
        jl["length_km"] = l.length_km;
        jl["rate_gbps"] = l.rate_gbps;
        jl["medium"] = to_string(l.medium);
        doc["links"].push_back(std::move(jl));
    }
    doc["interconnect_mode"] = to_string(c.topology.interconnect_mode);
    doc["seed"] = c.seed;
    doc["probe"] = {{"iterations", c.probe.iterations},
                    {"probes_per_run", c.probe.probes_per_run},
                    {"probe_size_bytes", c.probe.probe_size_bytes},
                    {"inter_probe_gap_us", c.probe.inter_probe_gap_us}};
    doc["jitter"] = {{"kind", c.jitter.kind == JitterKind::None ? "None" : "Uniform"},
                     {"half_width_us", c.jitter.half_width_us}};
    return doc.dump(2) + "\n";
}

void save_scenario(const ScenarioConfig& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << serialize_scenario(c);
    if (!out) throw IoError("error while writing: " + path);
}

ScenarioConfig load_scenario_or_builtin(const std::string& spec) {
    if (spec == "builtin:ref8") return build_reference_testbed();
    if (spec == "builtin:prior5") return build_prior_testbed();
    if (spec.rfind("builtin:", 0) == 0)
        throw InvalidArgument("unknown builtin scenario: " + spec +
                              " (available: builtin:ref8, builtin:prior5)");
    return load_scenario(spec);
}

} // namespace ponsim
