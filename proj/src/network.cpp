#include "gridflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace gridflow {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegPerRad = 180.0 / kPi;

using nlohmann::json;

[[noreturn]] void fail_parse(const std::string& message, const std::string& path) {
    throw ParseError(message, path);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) fail_parse("unknown key \"" + key + "\"", path);
    }
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) fail_parse("missing required key \"" + key + "\"", path);
    if (!obj[key].is_number()) fail_parse("key \"" + key + "\" must be a number", path);
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail_parse("key \"" + key + "\" must be a number", path);
    return obj[key].get<double>();
}

int require_int(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) fail_parse("missing required key \"" + key + "\"", path);
    if (!obj[key].is_number_integer()) fail_parse("key \"" + key + "\" must be an integer", path);
    return obj[key].get<int>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) fail_parse("missing required key \"" + key + "\"", path);
    if (!obj[key].is_string()) fail_parse("key \"" + key + "\" must be a string", path);
    return obj[key].get<std::string>();
}

bool bool_or(const json& obj, const std::string& key, bool fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail_parse("key \"" + key + "\" must be a boolean", path);
    return obj[key].get<bool>();
}

Bus parse_bus(const json& j, const std::string& path) {
    if (!j.is_object()) fail_parse("bus entry must be an object", path);
    reject_unknown_keys(j,
                        {"id", "kind", "v_setpoint", "angle_setpoint", "p_gen", "q_gen", "p_load",
                         "q_load", "q_gen_min", "q_gen_max", "base_kv"},
                        path);
    Bus bus;
    bus.id = require_int(j, "id", path);
    bus.kind = bus_kind_from_string(require_string(j, "kind", path));
    bus.v_setpoint = number_or(j, "v_setpoint", 1.0, path);
    bus.angle_setpoint = number_or(j, "angle_setpoint", 0.0, path) / kDegPerRad;
    bus.p_gen = number_or(j, "p_gen", 0.0, path);
    bus.q_gen = number_or(j, "q_gen", 0.0, path);
    bus.p_load = number_or(j, "p_load", 0.0, path);
    bus.q_load = number_or(j, "q_load", 0.0, path);
    if (j.contains("q_gen_min")) bus.q_gen_min = require_number(j, "q_gen_min", path);
    if (j.contains("q_gen_max")) bus.q_gen_max = require_number(j, "q_gen_max", path);
    bus.base_kv = require_number(j, "base_kv", path);
    return bus;
}

Branch parse_branch(const json& j, const std::string& path) {
    if (!j.is_object()) fail_parse("branch entry must be an object", path);
    reject_unknown_keys(j,
                        {"from_bus", "to_bus", "kind", "r", "x", "g_shunt", "b_charging", "tap",
                         "mva_limit", "in_service", "r0", "x0", "b0_charging", "zero_seq_path",
                         "phase_shift_deg"},
                        path);
    Branch br;
    br.from_bus = require_int(j, "from_bus", path);
    br.to_bus = require_int(j, "to_bus", path);
    const std::string kind = require_string(j, "kind", path);
    if (kind == "line")
        br.kind = BranchKind::Line;
    else if (kind == "transformer")
        br.kind = BranchKind::Transformer;
    else
        fail_parse("branch kind must be \"line\" or \"transformer\", got \"" + kind + "\"", path);
    br.r = require_number(j, "r", path);
    br.x = require_number(j, "x", path);
    br.g_shunt = number_or(j, "g_shunt", 0.0, path);
    br.b_charging = number_or(j, "b_charging", 0.0, path);
    if (j.contains("tap")) {
        if (br.kind != BranchKind::Transformer)
            fail_parse("tap is only valid on transformers", path);
        br.tap = require_number(j, "tap", path);
    }
    br.mva_limit = require_number(j, "mva_limit", path);
    br.in_service = bool_or(j, "in_service", true, path);
    // zero-sequence defaults: 3x positive for lines, equal for transformers
    const double zmul = br.kind == BranchKind::Line ? 3.0 : 1.0;
    br.r0 = number_or(j, "r0", zmul * br.r, path);
    br.x0 = number_or(j, "x0", zmul * br.x, path);
    br.b0_charging = number_or(j, "b0_charging", br.b_charging, path);
    if (j.contains("zero_seq_path")) {
        const std::string z = require_string(j, "zero_seq_path", path);
        if (z == "open")
            br.zero_seq_path = ZeroSeqPath::Open;
        else if (z == "grounded_through")
            br.zero_seq_path = ZeroSeqPath::GroundedThrough;
        else
            fail_parse("zero_seq_path must be \"open\" or \"grounded_through\"", path);
    }
    br.phase_shift_deg = number_or(j, "phase_shift_deg", 0.0, path);
    return br;
}

ShuntDevice parse_shunt(const json& j, const std::string& path) {
    if (!j.is_object()) fail_parse("shunt entry must be an object", path);
    reject_unknown_keys(j, {"bus", "q_nominal", "in_service"}, path);
    ShuntDevice sh;
    sh.bus = require_int(j, "bus", path);
    sh.q_nominal = require_number(j, "q_nominal", path);
    sh.in_service = bool_or(j, "in_service", true, path);
    return sh;
}

}  // namespace

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::Slack: return "slack";
        case BusKind::PV: return "pv";
        case BusKind::PQ: return "pq";
    }
    return "pq";
}

BusKind bus_kind_from_string(const std::string& s) {
    if (s == "slack") return BusKind::Slack;
    if (s == "pv") return BusKind::PV;
    if (s == "pq") return BusKind::PQ;
    throw ParseError("bus kind must be \"slack\", \"pv\" or \"pq\", got \"" + s + "\"");
}

const Bus* Network::find_bus(int id) const {
    for (const auto& b : buses)
        if (b.id == id) return &b;
    return nullptr;
}

const Bus& Network::bus(int id) const {
    if (const Bus* b = find_bus(id)) return *b;
    throw UnknownBusError(id);
}

ValidationReport validate(const Network& network) {
    ValidationReport report;
    auto error = [&](const std::string& m) { report.errors.push_back(m); };
    auto warn = [&](const std::string& m) { report.warnings.push_back(m); };

    std::unordered_set<int> ids;
    std::vector<int> slack_ids;
    for (const auto& bus : network.buses) {
        if (bus.id <= 0) error("bus id " + std::to_string(bus.id) + " must be positive");
        if (!ids.insert(bus.id).second)
            error("duplicate bus id " + std::to_string(bus.id));
        if (bus.kind == BusKind::Slack) slack_ids.push_back(bus.id);
        if ((bus.kind == BusKind::PV || bus.kind == BusKind::Slack) && bus.v_setpoint <= 0.0)
            error("bus " + std::to_string(bus.id) + ": voltage setpoint must be positive");
        if (bus.q_gen_min && bus.q_gen_max && *bus.q_gen_min > *bus.q_gen_max)
            error("bus " + std::to_string(bus.id) + ": q_gen_min exceeds q_gen_max");
        if (bus.base_kv <= 0.0)
            error("bus " + std::to_string(bus.id) + ": base_kv must be positive");
    }
    if (slack_ids.empty() && !network.buses.empty())
        error("no slack bus");
    if (slack_ids.size() > 1) {
        std::string msg = "more than one slack bus:";
        for (int id : slack_ids) msg += " " + std::to_string(id);
        error(msg);
    }
    if (network.s_base <= 0.0) error("s_base must be positive");

    for (std::size_t i = 0; i < network.branches.size(); ++i) {
        const auto& br = network.branches[i];
        const std::string tag = "branch " + std::to_string(br.from_bus) + "-" +
                                std::to_string(br.to_bus) + " (#" + std::to_string(i) + ")";
        if (!ids.count(br.from_bus) || !ids.count(br.to_bus))
            error(tag + ": unresolved endpoint");
        if (br.from_bus == br.to_bus) error(tag + ": endpoints must differ");
        if (br.x == 0.0) error(tag + ": series reactance must be nonzero");
        if (br.tap < 0.5 || br.tap > 1.5)
            error(tag + ": tap " + std::to_string(br.tap) + " outside [0.5, 1.5]");
        if (br.mva_limit < 0.0) error(tag + ": mva_limit must not be negative");
        if (br.mva_limit == 0.0) warn(tag + ": zero mva_limit, loading not reported");
    }
    for (const auto& sh : network.shunts) {
        if (!ids.count(sh.bus))
            error("shunt references nonexistent bus " + std::to_string(sh.bus));
        if (sh.q_nominal == 0.0) warn("shunt at bus " + std::to_string(sh.bus) + " has zero rating");
    }

    // connectivity over in-service branches: a warning, not an error
    if (!network.buses.empty() && report.errors.empty()) {
        std::unordered_map<int, std::vector<int>> adjacency;
        for (const auto& br : network.branches) {
            if (!br.in_service) continue;
            adjacency[br.from_bus].push_back(br.to_bus);
            adjacency[br.to_bus].push_back(br.from_bus);
        }
        std::unordered_set<int> seen;
        std::queue<int> frontier;
        frontier.push(network.buses.front().id);
        seen.insert(network.buses.front().id);
        while (!frontier.empty()) {
            const int at = frontier.front();
            frontier.pop();
            for (int next : adjacency[at])
                if (seen.insert(next).second) frontier.push(next);
        }
        for (const auto& bus : network.buses)
            if (!seen.count(bus.id))
                warn("bus " + std::to_string(bus.id) + " disconnected");
    }
    return report;
}

Network parse_case(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(),
                         "byte " + std::to_string(e.byte));
    }
    if (!doc.is_object()) throw ParseError("case document must be a JSON object");
    reject_unknown_keys(doc, {"name", "s_base_mva", "buses", "branches", "shunts"}, "$");

    Network net;
    if (doc.contains("name")) net.name = require_string(doc, "name", "$");
    net.s_base = require_number(doc, "s_base_mva", "$");
    if (!doc.contains("buses") || !doc["buses"].is_array())
        throw ParseError("missing or non-array \"buses\"", "$");
    if (!doc.contains("branches") || !doc["branches"].is_array())
        throw ParseError("missing or non-array \"branches\"", "$");

    for (std::size_t i = 0; i < doc["buses"].size(); ++i)
        net.buses.push_back(parse_bus(doc["buses"][i], "buses[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < doc["branches"].size(); ++i)
        net.branches.push_back(
            parse_branch(doc["branches"][i], "branches[" + std::to_string(i) + "]"));
    if (doc.contains("shunts")) {
        if (!doc["shunts"].is_array()) throw ParseError("\"shunts\" must be an array", "$");
        for (std::size_t i = 0; i < doc["shunts"].size(); ++i)
            net.shunts.push_back(parse_shunt(doc["shunts"][i], "shunts[" + std::to_string(i) + "]"));
    }

    const ValidationReport report = validate(net);
    if (!report.ok()) throw ValidationError(report.errors);
    return net;
}

std::string serialize_case(const Network& network) {
    json doc;
    doc["name"] = network.name;
    doc["s_base_mva"] = network.s_base;
    doc["buses"] = json::array();
    for (const auto& bus : network.buses) {
        json j;
        j["id"] = bus.id;
        j["kind"] = to_string(bus.kind);
        j["v_setpoint"] = bus.v_setpoint;
        j["angle_setpoint"] = bus.angle_setpoint * kDegPerRad;
        j["p_gen"] = bus.p_gen;
        j["q_gen"] = bus.q_gen;
        j["p_load"] = bus.p_load;
        j["q_load"] = bus.q_load;
        if (bus.q_gen_min) j["q_gen_min"] = *bus.q_gen_min;
        if (bus.q_gen_max) j["q_gen_max"] = *bus.q_gen_max;
        j["base_kv"] = bus.base_kv;
        doc["buses"].push_back(std::move(j));
    }
    doc["branches"] = json::array();
    for (const auto& br : network.branches) {
        json j;
        j["from_bus"] = br.from_bus;
        j["to_bus"] = br.to_bus;
        j["kind"] = br.kind == BranchKind::Line ? "line" : "transformer";
        j["r"] = br.r;
        j["x"] = br.x;
        j["g_shunt"] = br.g_shunt;
        j["b_charging"] = br.b_charging;
        if (br.kind == BranchKind::Transformer) j["tap"] = br.tap;
        j["mva_limit"] = br.mva_limit;
        j["in_service"] = br.in_service;
        j["r0"] = br.r0;
        j["x0"] = br.x0;
        j["b0_charging"] = br.b0_charging;
        j["zero_seq_path"] =
            br.zero_seq_path == ZeroSeqPath::Open ? "open" : "grounded_through";
        if (br.phase_shift_deg != 0.0) j["phase_shift_deg"] = br.phase_shift_deg;
        doc["branches"].push_back(std::move(j));
    }
    doc["shunts"] = json::array();
    for (const auto& sh : network.shunts) {
        json j;
        j["bus"] = sh.bus;
        j["q_nominal"] = sh.q_nominal;
        j["in_service"] = sh.in_service;
        doc["shunts"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

Branch parse_branch_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid branch JSON: ") + e.what());
    }
    return parse_branch(doc, "branch");
}

double base_current_amps(const Network& network, int bus_id) {
    const Bus& bus = network.bus(bus_id);
    if (bus.base_kv <= 0.0)
        throw Error("bus " + std::to_string(bus_id) + " has no voltage base");
    return network.s_base * 1e6 / (std::sqrt(3.0) * bus.base_kv * 1e3);
}

}  // namespace gridflow
