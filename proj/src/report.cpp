#include "gridflow/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace gridflow {

namespace {

using nlohmann::json;

constexpr double kDegPerRad = 180.0 / 3.14159265358979323846;

std::string fixed(double v, int width, int precision) {
    if (std::abs(v) < 0.5 * std::pow(10.0, -precision)) v = 0.0;  // avoid "-0.00"
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << std::setw(width) << v;
    return out.str();
}

std::string complex_2dec(const Complex& c) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << c.real() << (c.imag() < 0 ? " - j" : " + j")
        << std::abs(c.imag());
    return out.str();
}

void csv_row(std::ostringstream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ",";
        out << cells[i];
    }
    out << "\n";
}

std::string full(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

json solution_to_json(const Network& network, const PowerFlowSolution& solution) {
    json doc;
    doc["case"] = network.name;
    doc["converged"] = solution.converged;
    doc["status"] = to_string(solution.status);
    doc["iterations"] = solution.iterations;
    doc["max_mismatch_trace"] = solution.max_mismatch_trace;
    doc["buses"] = json::array();
    for (std::size_t i = 0; i < solution.bus_ids.size(); ++i) {
        const auto& bus = network.buses[i];
        json b;
        b["id"] = solution.bus_ids[i];
        b["v_pu"] = solution.v_mag[i];
        b["angle_deg"] = solution.angle_rad[i] * kDegPerRad;
        b["p_injection_pu"] = solution.p_injection[i];
        b["q_injection_pu"] = solution.q_injection[i];
        b["gen_mw"] = (solution.p_injection[i] + bus.p_load) * network.s_base;
        b["gen_mvar"] = (solution.q_injection[i] + bus.q_load) * network.s_base;
        b["load_mw"] = bus.p_load * network.s_base;
        b["load_mvar"] = bus.q_load * network.s_base;
        doc["buses"].push_back(std::move(b));
    }
    if (!solution.limit_switches.empty()) {
        doc["limit_switches"] = json::array();
        for (const auto& ev : solution.limit_switches) {
            json e;
            e["bus"] = ev.bus_id;
            e["iteration"] = ev.iteration;
            e["kind"] = ev.kind == LimitKind::AtQMax   ? "at_q_max"
                        : ev.kind == LimitKind::AtQMin ? "at_q_min"
                                                       : "reverted_to_pv";
            doc["limit_switches"].push_back(std::move(e));
        }
    }
    return doc;
}

std::string bus_table(const Network& network, const PowerFlowSolution& solution) {
    std::ostringstream out;
    out << "Bus   Nom kV    PU Volt   Volt (kV)  Angle (deg)    Load MW  Load Mvar     Gen MW   Gen Mvar\n";
    for (std::size_t i = 0; i < solution.bus_ids.size(); ++i) {
        const auto& bus = network.buses[i];
        out << std::setw(3) << bus.id << fixed(bus.base_kv, 9, 2)
            << fixed(solution.v_mag[i], 11, 5) << fixed(solution.v_mag[i] * bus.base_kv, 12, 3)
            << fixed(solution.angle_rad[i] * kDegPerRad, 13, 2)
            << fixed(bus.p_load * network.s_base, 11, 2)
            << fixed(bus.q_load * network.s_base, 11, 2)
            << fixed((solution.p_injection[i] + bus.p_load) * network.s_base, 11, 2)
            << fixed((solution.q_injection[i] + bus.q_load) * network.s_base, 11, 2) << "\n";
    }
    return out.str();
}

std::string branch_table(const Network& network, const std::vector<BranchFlow>& flows) {
    std::ostringstream out;
    out << "From   To  Type          MW From  Mvar From   MVA From   Lim MVA   % Limit    MW Loss  Mvar Loss\n";
    for (const auto& f : flows) {
        const auto& br = network.branches[f.branch_index];
        out << std::setw(4) << f.from_bus << std::setw(5) << f.to_bus << "  "
            << (br.kind == BranchKind::Line ? "Line        " : "Transformer ")
            << fixed(f.s_from.real() * network.s_base, 9, 2)
            << fixed(f.s_from.imag() * network.s_base, 11, 2)
            << fixed(std::abs(f.s_from) * network.s_base, 11, 2)
            << fixed(br.mva_limit * network.s_base, 10, 1) << fixed(f.loading_pct, 10, 1)
            << fixed(f.loss.real() * network.s_base, 11, 2)
            << fixed(f.loss.imag() * network.s_base, 11, 2) << "\n";
    }
    return out.str();
}

std::string violations_text(const std::vector<VoltageViolation>& violations) {
    if (violations.empty()) return "no voltage violations\n";
    std::ostringstream out;
    out << "voltage violations:\n";
    for (const auto& v : violations)
        out << "  bus " << v.bus << ": " << std::fixed << std::setprecision(5) << v.v_mag
            << " pu (bound " << std::setprecision(2) << v.bound << ")\n";
    return out.str();
}

json scenario_to_json(const ScenarioReport& report) {
    json doc;
    doc["name"] = report.name;
    doc["actions"] = report.actions_applied;
    doc["solution"] = solution_to_json(report.modified, report.solution);
    doc["total_loss_mw"] = report.summary.loss_mw;
    doc["baseline_converged"] = report.baseline.converged;
    doc["baseline_loss_mw"] = report.baseline_summary.loss_mw;
    if (report.deltas) {
        json d;
        d["dloss_mw"] = report.deltas->dloss_mw;
        d["dv_by_bus"] = json::object();
        for (const auto& [bus, dv] : report.deltas->dv_by_bus)
            d["dv_by_bus"][std::to_string(bus)] = dv;
        d["dloading_pct_by_branch"] = json::object();
        for (const auto& [idx, dl] : report.deltas->dloading_pct_by_branch)
            d["dloading_pct_by_branch"][std::to_string(idx)] = dl;
        doc["deltas"] = std::move(d);
    }
    return doc;
}

}  // namespace

OutputFormat output_format_from_string(const std::string& s) {
    if (s == "table") return OutputFormat::Table;
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ParseError("output format must be table, csv or json; got \"" + s + "\"");
}

std::string emit_ybus(const AdmittanceMatrix& y, OutputFormat format) {
    const std::size_t n = y.size();
    std::ostringstream out;
    if (format == OutputFormat::Json) {
        json doc;
        doc["bus_ids"] = y.bus_ids();
        doc["entries"] = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < n; ++j)
                row.push_back({{"re", y.at(i, j).real()}, {"im", y.at(i, j).imag()}});
            doc["entries"].push_back(std::move(row));
        }
        return doc.dump(2) + "\n";
    }
    if (format == OutputFormat::Csv) {
        std::vector<std::string> header{"bus"};
        for (std::size_t j = 0; j < n; ++j) header.push_back("bus_" + std::to_string(y.bus_at(j)));
        csv_row(out, header);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> row{std::to_string(y.bus_at(i))};
            for (std::size_t j = 0; j < n; ++j) {
                const Complex& c = y.at(i, j);
                row.push_back(full(c.real()) + (c.imag() < 0 ? "-j" : "+j") +
                              full(std::abs(c.imag())));
            }
            csv_row(out, row);
        }
        return out.str();
    }
    // table, entries in fixed 2-decimal G + jB form
    out << "Bus ";
    for (std::size_t j = 0; j < n; ++j)
        out << std::setw(18) << ("Bus " + std::to_string(y.bus_at(j)));
    out << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        out << std::setw(3) << y.bus_at(i) << " ";
        for (std::size_t j = 0; j < n; ++j) {
            if (y.magnitude(i, j) == 0.0)
                out << std::setw(18) << "";
            else
                out << std::setw(18) << complex_2dec(y.at(i, j));
        }
        out << "\n";
    }
    return out.str();
}

std::string emit_solution(const Network& network, const PowerFlowSolution& solution,
                          OutputFormat format) {
    if (format == OutputFormat::Json) return solution_to_json(network, solution).dump(2) + "\n";
    if (format == OutputFormat::Csv) {
        std::ostringstream out;
        csv_row(out, {"bus", "v_pu", "angle_deg", "load_mw", "load_mvar", "gen_mw", "gen_mvar"});
        for (std::size_t i = 0; i < solution.bus_ids.size(); ++i) {
            const auto& bus = network.buses[i];
            csv_row(out, {std::to_string(solution.bus_ids[i]), full(solution.v_mag[i]),
                          full(solution.angle_rad[i] * kDegPerRad),
                          full(bus.p_load * network.s_base), full(bus.q_load * network.s_base),
                          full((solution.p_injection[i] + bus.p_load) * network.s_base),
                          full((solution.q_injection[i] + bus.q_load) * network.s_base)});
        }
        return out.str();
    }
    std::ostringstream out;
    out << "case: " << network.name << "\n"
        << "status: " << to_string(solution.status) << " after " << solution.iterations
        << " iterations\n\n"
        << bus_table(network, solution);
    return out.str();
}

std::string emit_report(const Network& network, const PowerFlowSolution& solution,
                        const SystemSummary& summary, const std::vector<BranchFlow>& flows,
                        OutputFormat format) {
    if (format == OutputFormat::Json) {
        json doc = solution_to_json(network, solution);
        doc["branches"] = json::array();
        for (const auto& f : flows) {
            json b;
            b["from_bus"] = f.from_bus;
            b["to_bus"] = f.to_bus;
            b["mw_from"] = f.s_from.real() * network.s_base;
            b["mvar_from"] = f.s_from.imag() * network.s_base;
            b["mw_to"] = f.s_to.real() * network.s_base;
            b["mvar_to"] = f.s_to.imag() * network.s_base;
            b["mw_loss"] = f.loss.real() * network.s_base;
            b["mvar_loss"] = f.loss.imag() * network.s_base;
            b["loading_pct"] = f.loading_pct;
            doc["branches"].push_back(std::move(b));
        }
        doc["totals"] = {{"gen_mw", summary.gen_mw},
                         {"gen_mvar", summary.gen_mvar},
                         {"load_mw", summary.load_mw},
                         {"load_mvar", summary.load_mvar},
                         {"loss_mw", summary.loss_mw},
                         {"loss_mvar", summary.loss_mvar},
                         {"shunt_mvar", summary.shunt_mvar}};
        doc["violations"] = json::array();
        for (const auto& v : summary.violations)
            doc["violations"].push_back({{"bus", v.bus}, {"v_pu", v.v_mag}, {"bound", v.bound}});
        return doc.dump(2) + "\n";
    }
    if (format == OutputFormat::Csv) {
        std::ostringstream out;
        csv_row(out, {"from_bus", "to_bus", "mw_from", "mvar_from", "mw_to", "mvar_to", "mw_loss",
                      "mvar_loss", "loading_pct"});
        for (const auto& f : flows)
            csv_row(out, {std::to_string(f.from_bus), std::to_string(f.to_bus),
                          full(f.s_from.real() * network.s_base),
                          full(f.s_from.imag() * network.s_base),
                          full(f.s_to.real() * network.s_base),
                          full(f.s_to.imag() * network.s_base),
                          full(f.loss.real() * network.s_base),
                          full(f.loss.imag() * network.s_base), full(f.loading_pct)});
        return out.str();
    }
    std::ostringstream out;
    out << emit_solution(network, solution, OutputFormat::Table) << "\n"
        << branch_table(network, flows) << "\n"
        << "totals: gen " << fixed(summary.gen_mw, 0, 2) << " MW / " << fixed(summary.gen_mvar, 0, 2)
        << " Mvar, load " << fixed(summary.load_mw, 0, 2) << " MW / "
        << fixed(summary.load_mvar, 0, 2) << " Mvar, loss " << fixed(summary.loss_mw, 0, 2)
        << " MW\n\n"
        << violations_text(summary.violations);
    return out.str();
}

std::string emit_fault(const FaultResult& result, OutputFormat format) {
    if (format == OutputFormat::Json) {
        json doc;
        doc["bus"] = result.spec.bus;
        doc["kind"] = to_string(result.spec.kind);
        doc["prefault_voltage_pu"] = result.spec.prefault_voltage;
        doc["z_fault"] = {{"re", result.spec.z_fault.real()}, {"im", result.spec.z_fault.imag()}};
        const char* seq_names[3] = {"z0", "z1", "z2"};
        for (int s = 0; s < 3; ++s)
            doc["thevenin"][seq_names[s]] = {{"re", result.z_thevenin[s].real()},
                                             {"im", result.z_thevenin[s].imag()}};
        const char* cur_names[3] = {"i0", "i1", "i2"};
        for (int s = 0; s < 3; ++s)
            doc["sequence_currents_pu"][cur_names[s]] = {
                {"re", result.sequence_currents[s].real()},
                {"im", result.sequence_currents[s].imag()}};
        const char* phases[3] = {"a", "b", "c"};
        for (int p = 0; p < 3; ++p) {
            const Complex& i_p = result.phase_currents[p];
            const Complex& v_p = result.phase_voltages[p];
            doc["phase_currents_pu"][phases[p]] = {{"re", i_p.real()},
                                                   {"im", i_p.imag()},
                                                   {"mag", std::abs(i_p)},
                                                   {"angle_deg", std::arg(i_p) * kDegPerRad}};
            doc["phase_currents_amps"][phases[p]] = std::abs(i_p) * result.base_amps;
            doc["phase_voltages_pu"][phases[p]] = {{"re", v_p.real()},
                                                   {"im", v_p.imag()},
                                                   {"mag", std::abs(v_p)},
                                                   {"angle_deg", std::arg(v_p) * kDegPerRad}};
        }
        doc["ground_current_amps"] = result.ground_current_amps;
        doc["reported_current_amps"] = result.reported_current_amps;
        doc["base_amps"] = result.base_amps;
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    out << to_string(result.spec.kind) << " fault at bus " << result.spec.bus << " (prefault "
        << std::fixed << std::setprecision(2) << result.spec.prefault_voltage << " pu)\n";
    const char* phases[3] = {"a", "b", "c"};
    for (int p = 0; p < 3; ++p) {
        out << "  phase " << phases[p] << ": |I| = " << fixed(std::abs(result.phase_currents[p]), 8, 3)
            << " pu = " << fixed(std::abs(result.phase_currents[p]) * result.base_amps, 10, 2)
            << " A   |V| = " << fixed(std::abs(result.phase_voltages[p]), 7, 4) << " pu\n";
    }
    out << "  ground current: " << fixed(std::abs(result.ground_current), 8, 3) << " pu = "
        << fixed(result.ground_current_amps, 10, 2) << " A\n"
        << "  reported current: " << fixed(result.reported_current_amps, 10, 2) << " A\n";
    return out.str();
}

std::string emit_faults(const std::vector<FaultResult>& results,
                        const std::vector<std::string>& breaker_labels, OutputFormat format) {
    if (format == OutputFormat::Json) {
        json doc = json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
            json f = json::parse(emit_fault(results[i], OutputFormat::Json));
            if (i < breaker_labels.size()) f["recommended_breaker"] = breaker_labels[i];
            doc.push_back(std::move(f));
        }
        return doc.dump(2) + "\n";
    }
    if (format == OutputFormat::Csv) {
        std::ostringstream out;
        csv_row(out, {"kind", "bus", "reported_amps", "ground_amps", "breaker"});
        for (std::size_t i = 0; i < results.size(); ++i)
            csv_row(out, {to_string(results[i].spec.kind), std::to_string(results[i].spec.bus),
                          full(results[i].reported_current_amps),
                          full(results[i].ground_current_amps),
                          i < breaker_labels.size() ? breaker_labels[i] : ""});
        return out.str();
    }
    std::ostringstream out;
    out << "Fault   Current (A)   Ground (A)   Recommended breaker\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        out << std::left << std::setw(8) << to_string(results[i].spec.kind) << std::right
            << fixed(results[i].reported_current_amps, 11, 2)
            << fixed(results[i].ground_current_amps, 13, 2) << "   "
            << (i < breaker_labels.size() ? breaker_labels[i] : "") << "\n";
    }
    return out.str();
}

std::string emit_scenario_report(const ScenarioReport& report, OutputFormat format) {
    if (format == OutputFormat::Json) return scenario_to_json(report).dump(2) + "\n";
    std::ostringstream out;
    out << "scenario: " << report.name << "\n";
    for (const auto& a : report.actions_applied) out << "  action: " << a << "\n";
    if (!report.solution.converged) {
        out << "  power flow did not converge (" << to_string(report.solution.status) << " after "
            << report.solution.iterations << " iterations)\n";
        return out.str();
    }
    out << "\n" << bus_table(report.modified, report.solution) << "\n";
    out << "total loss: " << fixed(report.summary.loss_mw, 0, 2) << " MW";
    if (report.deltas)
        out << " (baseline " << fixed(report.baseline_summary.loss_mw, 0, 2) << " MW, change "
            << fixed(report.deltas->dloss_mw, 0, 2) << " MW)";
    out << "\n" << violations_text(report.summary.violations);
    return out.str();
}

std::string emit_scenario_reports(const std::vector<ScenarioReport>& reports,
                                  OutputFormat format) {
    if (format == OutputFormat::Json) {
        json doc = json::array();
        for (const auto& r : reports) doc.push_back(scenario_to_json(r));
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    for (const auto& r : reports) out << emit_scenario_report(r, format) << "\n";
    return out.str();
}

std::string emit_tap_sweep(const TapSweepResult& result, OutputFormat format) {
    if (format == OutputFormat::Json) {
        json doc;
        doc["transformers"] = json::array();
        for (const auto& [f, t] : result.transformers)
            doc["transformers"].push_back({{"from_bus", f}, {"to_bus", t}});
        doc["grid"] = json::array();
        for (const auto& p : result.grid) {
            json e;
            e["taps"] = p.taps;
            e["converged"] = p.converged;
            if (p.converged) {
                e["v_target_bus"] = p.v_target_bus;
                e["total_loss_mw"] = p.total_loss_mw;
            }
            doc["grid"].push_back(std::move(e));
        }
        if (result.best) {
            doc["best"] = {{"taps", result.best->taps},
                           {"v_target_bus", result.best->v_target_bus},
                           {"total_loss_mw", result.best->total_loss_mw}};
        }
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    std::size_t feasible = 0;
    for (const auto& p : result.grid)
        if (p.converged) ++feasible;
    out << "tap sweep: " << result.grid.size() << " grid points, " << feasible << " converged\n";
    if (result.best) {
        out << "best (min loss meeting target): taps";
        for (double t : result.best->taps) out << " " << std::fixed << std::setprecision(2) << t;
        out << "  V = " << std::setprecision(5) << result.best->v_target_bus
            << " pu, loss = " << std::setprecision(2) << result.best->total_loss_mw << " MW\n";
    } else {
        out << "no setting met the voltage target\n";
    }
    return out.str();
}

std::string emit_load_shed(const LoadShedResult& result, OutputFormat format) {
    if (format == OutputFormat::Json) {
        json doc;
        doc["bus"] = result.bus;
        doc["target_v"] = result.target_v;
        doc["points"] = json::array();
        for (const auto& p : result.points) {
            json e;
            e["shed_pct"] = p.shed_pct;
            e["converged"] = p.converged;
            if (p.converged) e["v_pu"] = p.v;
            doc["points"].push_back(std::move(e));
        }
        if (result.minimal_shed_pct)
            doc["minimal_shed_pct"] = *result.minimal_shed_pct;
        else
            doc["infeasible"] = true;
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "load shed sweep at bus " << result.bus << ", target " << std::fixed
        << std::setprecision(3) << result.target_v << " pu\n";
    if (result.minimal_shed_pct)
        out << "minimal shed: " << std::setprecision(1) << *result.minimal_shed_pct << "%\n";
    else
        out << "infeasible: target unreachable even at 100% shed\n";
    for (const auto& p : result.points) {
        out << "  " << fixed(p.shed_pct, 5, 1) << "%  ";
        if (p.converged)
            out << "V = " << fixed(p.v, 8, 5) << " pu\n";
        else
            out << "no convergence\n";
    }
    return out.str();
}

}  // namespace gridflow
