#include "gridflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace gridflow {

namespace {

using nlohmann::json;

/// Runs fn(0..count-1), optionally across threads. Each index writes only its
/// own result slot, so assembly order is independent of scheduling.
template <typename F>
void for_each_index(std::size_t count, int parallelism, F&& fn) {
    if (parallelism <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
    };
    const int thread_count = std::min<int>(parallelism, static_cast<int>(count));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
}

std::string endpoints(int from, int to) {
    return std::to_string(from) + "-" + std::to_string(to);
}

Branch* find_branch(Network& net, int from, int to, int circuit, BranchKind* required_kind) {
    int seen = 0;
    for (auto& br : net.branches) {
        if (br.from_bus == from && br.to_bus == to) {
            ++seen;
            if (seen == circuit) {
                if (required_kind && br.kind != *required_kind) return nullptr;
                return &br;
            }
        }
    }
    return nullptr;
}

struct ActionApplier {
    Network& net;

    void operator()(const RemoveBranchAction& a) {
        int seen = 0;
        for (std::size_t i = 0; i < net.branches.size(); ++i) {
            const auto& br = net.branches[i];
            if (br.from_bus == a.from_bus && br.to_bus == a.to_bus && ++seen == a.circuit) {
                net.branches.erase(net.branches.begin() + static_cast<std::ptrdiff_t>(i));
                return;
            }
        }
        throw ActionRejectedError("no branch " + endpoints(a.from_bus, a.to_bus) + " circuit " +
                                  std::to_string(a.circuit));
    }
    void operator()(const AddBranchAction& a) {
        if (!net.find_bus(a.branch.from_bus) || !net.find_bus(a.branch.to_bus))
            throw ActionRejectedError("add_branch endpoints " +
                                      endpoints(a.branch.from_bus, a.branch.to_bus) +
                                      " do not resolve");
        net.branches.push_back(a.branch);
    }
    void operator()(const AddShuntAction& a) {
        if (!net.find_bus(a.shunt.bus))
            throw ActionRejectedError("add_shunt bus " + std::to_string(a.shunt.bus) +
                                      " does not resolve");
        net.shunts.push_back(a.shunt);
    }
    void operator()(const SetShuntQAction& a) {
        for (auto& sh : net.shunts)
            if (sh.bus == a.bus) {
                sh.q_nominal = a.q_nominal;
                return;
            }
        throw ActionRejectedError("no shunt at bus " + std::to_string(a.bus));
    }
    void operator()(const SetTapAction& a) {
        BranchKind xfmr = BranchKind::Transformer;
        Branch* br = find_branch(net, a.from_bus, a.to_bus, 1, &xfmr);
        if (!br)
            throw ActionRejectedError("set_tap: no transformer " +
                                      endpoints(a.from_bus, a.to_bus));
        br->tap = a.ratio;
    }
    void operator()(const ScaleLoadAction& a) {
        for (auto& bus : net.buses)
            if (bus.id == a.bus) {
                bus.p_load *= a.factor;
                bus.q_load *= a.factor;
                return;
            }
        throw ActionRejectedError("scale_load bus " + std::to_string(a.bus) + " does not resolve");
    }
    void operator()(const SetLoadAction& a) {
        for (auto& bus : net.buses)
            if (bus.id == a.bus) {
                bus.p_load = a.p;
                bus.q_load = a.q;
                return;
            }
        throw ActionRejectedError("set_load bus " + std::to_string(a.bus) + " does not resolve");
    }
};

}  // namespace

std::string describe(const Action& action) {
    std::ostringstream out;
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, RemoveBranchAction>)
                out << "remove branch " << endpoints(a.from_bus, a.to_bus) << " circuit "
                    << a.circuit;
            else if constexpr (std::is_same_v<T, AddBranchAction>)
                out << "add " << (a.branch.kind == BranchKind::Line ? "line " : "transformer ")
                    << endpoints(a.branch.from_bus, a.branch.to_bus);
            else if constexpr (std::is_same_v<T, AddShuntAction>)
                out << "add shunt " << a.shunt.q_nominal << " pu at bus " << a.shunt.bus;
            else if constexpr (std::is_same_v<T, SetShuntQAction>)
                out << "set shunt at bus " << a.bus << " to " << a.q_nominal << " pu";
            else if constexpr (std::is_same_v<T, SetTapAction>)
                out << "set tap " << endpoints(a.from_bus, a.to_bus) << " to " << a.ratio;
            else if constexpr (std::is_same_v<T, ScaleLoadAction>)
                out << "scale load at bus " << a.bus << " by " << a.factor;
            else if constexpr (std::is_same_v<T, SetLoadAction>)
                out << "set load at bus " << a.bus << " to " << a.p << " + j" << a.q << " pu";
        },
        action);
    return out.str();
}

Network apply_actions(const Network& base, const std::vector<Action>& actions) {
    Network modified = base;
    ActionApplier applier{modified};
    for (const auto& action : actions) std::visit(applier, action);
    // an edit may not leave the case structurally broken (warnings are fine)
    const ValidationReport report = validate(modified);
    if (!report.ok()) {
        std::string reason = "edited case is invalid:";
        for (const auto& e : report.errors) reason += " " + e + ";";
        throw ActionRejectedError(reason);
    }
    return modified;
}

ScenarioReport run_scenario(const Network& base, const std::vector<Action>& actions,
                            const SolveOptions& options, const std::string& name) {
    ScenarioReport report;
    report.name = name;
    for (const auto& a : actions) report.actions_applied.push_back(describe(a));
    report.modified = apply_actions(base, actions);
    report.baseline = solve_power_flow(base, options);
    report.solution = solve_power_flow(report.modified, options);
    report.baseline_summary = summarize(base, report.baseline);
    report.summary = summarize(report.modified, report.solution);

    if (report.baseline.converged && report.solution.converged) {
        ScenarioDeltas deltas;
        for (std::size_t i = 0; i < report.modified.buses.size(); ++i) {
            const int id = report.modified.buses[i].id;
            if (base.find_bus(id))
                deltas.dv_by_bus[id] = report.solution.v_at(id) - report.baseline.v_at(id);
        }
        deltas.dloss_mw = report.summary.loss_mw - report.baseline_summary.loss_mw;
        const auto base_flows = branch_flows(base, report.baseline);
        const auto new_flows = branch_flows(report.modified, report.solution);
        // match branches by endpoints + occurrence order
        for (std::size_t i = 0; i < new_flows.size(); ++i) {
            int occurrence = 0;
            for (std::size_t k = 0; k < i; ++k)
                if (new_flows[k].from_bus == new_flows[i].from_bus &&
                    new_flows[k].to_bus == new_flows[i].to_bus)
                    ++occurrence;
            int seen = 0;
            for (const auto& bf : base_flows) {
                if (bf.from_bus == new_flows[i].from_bus && bf.to_bus == new_flows[i].to_bus) {
                    if (seen == occurrence) {
                        deltas.dloading_pct_by_branch[i] =
                            new_flows[i].loading_pct - bf.loading_pct;
                        break;
                    }
                    ++seen;
                }
            }
        }
        report.deltas = std::move(deltas);
    }
    return report;
}

std::vector<ScenarioReport> shunt_sweep(const Network& base, int bus,
                                        const std::vector<double>& q_nominal_values,
                                        const SolveOptions& options, int parallelism) {
    (void)base.bus(bus);  // throws UnknownBusError early
    const bool has_shunt = std::any_of(base.shunts.begin(), base.shunts.end(),
                                       [&](const ShuntDevice& s) { return s.bus == bus; });
    std::vector<ScenarioReport> reports(q_nominal_values.size());
    for_each_index(q_nominal_values.size(), parallelism, [&](std::size_t i) {
        const double q = q_nominal_values[i];
        std::vector<Action> actions;
        if (q != 0.0 || has_shunt) {
            if (has_shunt)
                actions.emplace_back(SetShuntQAction{bus, q});
            else
                actions.emplace_back(AddShuntAction{ShuntDevice{bus, q, true}});
        }
        std::ostringstream name;
        name << "shunt " << q * base.s_base << " Mvar at bus " << bus;
        reports[i] = run_scenario(base, actions, options, name.str());
    });
    return reports;
}

TapSweepResult tap_sweep(const Network& base, const std::vector<std::pair<int, int>>& transformers,
                         double tap_min, double tap_max, double step, int target_bus,
                         double target_v, const SolveOptions& options, int parallelism) {
    TapSweepResult result;
    result.transformers = transformers;
    if (transformers.empty()) return result;
    (void)base.bus(target_bus);
    if (tap_min < 0.5 || tap_max > 1.5 || tap_min > tap_max)
        throw ActionRejectedError("tap range [" + std::to_string(tap_min) + ", " +
                                  std::to_string(tap_max) + "] outside the valid [0.5, 1.5]");

    std::vector<double> grid_values;
    if (step <= 0.0 || tap_min + step > tap_max + 1e-12) {
        grid_values.push_back(tap_min);  // degenerate grid: single evaluation at range start
    } else {
        const int count = static_cast<int>(std::floor((tap_max - tap_min) / step + 1e-9));
        for (int k = 0; k <= count; ++k)
            grid_values.push_back(std::min(tap_min + k * step, tap_max));
    }

    // enumerate the full grid up front, then evaluate points independently
    std::vector<std::size_t> cursor(transformers.size(), 0);
    std::vector<std::vector<double>> combos;
    while (true) {
        std::vector<double> taps;
        for (std::size_t i = 0; i < transformers.size(); ++i) taps.push_back(grid_values[cursor[i]]);
        combos.push_back(std::move(taps));
        std::size_t dim = 0;
        for (; dim < cursor.size(); ++dim) {
            if (++cursor[dim] < grid_values.size()) break;
            cursor[dim] = 0;
        }
        if (dim == cursor.size()) break;
    }

    result.grid.resize(combos.size());
    for_each_index(combos.size(), parallelism, [&](std::size_t c) {
        TapSweepPoint point;
        point.taps = combos[c];
        std::vector<Action> actions;
        for (std::size_t i = 0; i < transformers.size(); ++i)
            actions.emplace_back(
                SetTapAction{transformers[i].first, transformers[i].second, combos[c][i]});
        const Network modified = apply_actions(base, actions);
        const PowerFlowSolution sol = solve_power_flow(modified, options);
        point.converged = sol.converged;
        if (sol.converged) {
            point.v_target_bus = sol.v_at(target_bus);
            double loss = 0.0;
            for (const auto& flow : branch_flows(modified, sol)) loss += flow.loss.real();
            point.total_loss_mw = loss * base.s_base;
        }
        result.grid[c] = std::move(point);
    });
    for (const auto& point : result.grid) {
        if (point.converged && point.v_target_bus >= target_v &&
            (!result.best || point.total_loss_mw < result.best->total_loss_mw))
            result.best = point;
    }
    return result;
}

LoadShedResult load_shed_sweep(const Network& base, int bus, double target_v, double step_pct,
                               const SolveOptions& options, int parallelism) {
    const Bus& shed_bus = base.bus(bus);
    if (shed_bus.p_load == 0.0 && shed_bus.q_load == 0.0)
        throw ActionRejectedError("bus " + std::to_string(bus) + " carries no load");
    LoadShedResult result;
    result.bus = bus;
    result.target_v = target_v;
    if (step_pct <= 0.0) step_pct = 1.0;

    std::vector<double> grid;
    const int count = static_cast<int>(std::floor(100.0 / step_pct - 1e-9));
    for (int k = 0; k <= count; ++k) grid.push_back(k * step_pct);
    grid.push_back(100.0);

    result.points.resize(grid.size());
    for_each_index(grid.size(), parallelism, [&](std::size_t i) {
        const std::vector<Action> actions{ScaleLoadAction{bus, 1.0 - grid[i] / 100.0}};
        const PowerFlowSolution sol = solve_power_flow(apply_actions(base, actions), options);
        LoadShedPoint point;
        point.shed_pct = grid[i];
        point.converged = sol.converged;
        if (sol.converged) point.v = sol.v_at(bus);
        result.points[i] = point;
    });
    for (const auto& point : result.points) {
        if (point.converged && point.v >= target_v) {
            result.minimal_shed_pct = point.shed_pct;
            break;
        }
    }
    return result;
}

namespace {

Action parse_action(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ParseError("action must be an object with a \"type\" string", path);
    const std::string type = j["type"].get<std::string>();
    auto num = [&](const char* key) -> double {
        if (!j.contains(key) || !j[key].is_number())
            throw ParseError(std::string("action \"") + type + "\" needs numeric \"" + key + "\"",
                             path);
        return j[key].get<double>();
    };
    auto integer = [&](const char* key) -> int { return static_cast<int>(num(key)); };
    if (type == "remove_branch") {
        RemoveBranchAction a{integer("from_bus"), integer("to_bus"), 1};
        if (j.contains("circuit")) a.circuit = integer("circuit");
        return a;
    }
    if (type == "add_branch") {
        if (!j.contains("branch") || !j["branch"].is_object())
            throw ParseError("add_branch needs a \"branch\" object", path);
        return AddBranchAction{parse_branch_json(j["branch"].dump())};
    }
    if (type == "add_shunt")
        return AddShuntAction{ShuntDevice{integer("bus"), num("q_nominal"), true}};
    if (type == "set_shunt_q") return SetShuntQAction{integer("bus"), num("q_nominal")};
    if (type == "set_tap") return SetTapAction{integer("from_bus"), integer("to_bus"), num("ratio")};
    if (type == "scale_load") return ScaleLoadAction{integer("bus"), num("factor")};
    if (type == "set_load") return SetLoadAction{integer("bus"), num("p"), num("q")};
    throw ParseError("unknown action type \"" + type + "\"", path);
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid scenario JSON: ") + e.what(),
                         "byte " + std::to_string(e.byte));
    }
    if (!doc.is_object()) throw ParseError("scenario document must be a JSON object");
    ScenarioFile file;
    if (doc.contains("name")) file.name = doc["name"].get<std::string>();
    if (!doc.contains("base_case") || !doc["base_case"].is_string())
        throw ParseError("scenario needs a \"base_case\" string");
    file.base_case = doc["base_case"].get<std::string>();
    if (doc.contains("actions")) {
        if (!doc["actions"].is_array()) throw ParseError("\"actions\" must be an array");
        for (std::size_t i = 0; i < doc["actions"].size(); ++i)
            file.actions.push_back(
                parse_action(doc["actions"][i], "actions[" + std::to_string(i) + "]"));
    }
    if (doc.contains("solve")) {
        const json& s = doc["solve"];
        if (s.contains("tol")) file.solve.tolerance = s["tol"].get<double>();
        if (s.contains("max_iter")) file.solve.max_iterations = s["max_iter"].get<int>();
        if (s.contains("q_limits")) file.solve.enforce_q_limits = s["q_limits"].get<bool>();
        if (s.contains("damping")) file.solve.damping = s["damping"].get<double>();
    }
    if (doc.contains("sweep")) {
        const json& sw = doc["sweep"];
        if (!sw.is_object() || !sw.contains("kind") || !sw["kind"].is_string())
            throw ParseError("\"sweep\" must be an object with a \"kind\"");
        const std::string kind = sw["kind"].get<std::string>();
        if (kind == "shunt") {
            ScenarioFile::ShuntSweepSpec spec;
            spec.bus = sw["bus"].get<int>();
            for (const auto& q : sw["q_nominal_values"]) spec.q_nominal_values.push_back(q.get<double>());
            file.shunt_sweep = spec;
        } else if (kind == "tap") {
            ScenarioFile::TapSweepSpec spec;
            for (const auto& t : sw["transformers"])
                spec.transformers.emplace_back(t[0].get<int>(), t[1].get<int>());
            if (sw.contains("min")) spec.tap_min = sw["min"].get<double>();
            if (sw.contains("max")) spec.tap_max = sw["max"].get<double>();
            if (sw.contains("step")) spec.step = sw["step"].get<double>();
            spec.target_bus = sw["target_bus"].get<int>();
            if (sw.contains("target_v")) spec.target_v = sw["target_v"].get<double>();
            file.tap_sweep = spec;
        } else if (kind == "load_shed") {
            ScenarioFile::LoadShedSpec spec;
            spec.bus = sw["bus"].get<int>();
            if (sw.contains("target_v")) spec.target_v = sw["target_v"].get<double>();
            if (sw.contains("step_pct")) spec.step_pct = sw["step_pct"].get<double>();
            file.load_shed = spec;
        } else {
            throw ParseError("sweep kind must be \"shunt\", \"tap\" or \"load_shed\"");
        }
    }
    return file;
}

}  // namespace gridflow
