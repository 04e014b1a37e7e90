#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gridflow/cases.hpp"
#include "gridflow/report.hpp"

namespace {

using namespace gridflow;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitFaultError = 4;

/// Accepts "0.05", "0.01+j0.05", "0.01-j0.05", "j0.05", "0.01+0.05j".
Complex parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ParseError("empty impedance");
    double re = 0.0, im = 0.0;
    char sign = '+';
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            sign = s[i];
        }
    }
    auto read = [](const std::string& t) {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw ParseError("bad impedance component \"" + t + "\"");
        return v;
    };
    auto strip_j = [](std::string t, bool* had_j) {
        *had_j = false;
        if (!t.empty() && (t.front() == 'j' || t.front() == 'J')) {
            *had_j = true;
            t.erase(t.begin());
        }
        if (!t.empty() && (t.back() == 'j' || t.back() == 'J')) {
            *had_j = true;
            t.pop_back();
        }
        if (t.empty()) t = "1";
        return t;
    };
    try {
        if (split == std::string::npos) {
            bool had_j = false;
            const double v = read(strip_j(s, &had_j));
            (had_j ? im : re) = v;
        } else {
            bool j1 = false, j2 = false;
            const double a = read(strip_j(s.substr(0, split), &j1));
            const double b = read(strip_j(s.substr(split + 1), &j2));
            if (j1 == j2) throw ParseError("impedance needs one real and one j part");
            const double bs = sign == '-' ? -b : b;
            re = j1 ? bs : a;
            im = j1 ? a : bs;
        }
    } catch (const std::exception&) {
        throw ParseError("cannot parse impedance \"" + text + "\" (expected forms: R, R+jX, jX)");
    }
    return {re, im};
}

BreakerCatalog load_catalog(const std::string& flag_path) {
    std::string path = flag_path;
    if (path.empty()) {
        if (const char* env = std::getenv("GRIDFLOW_CATALOG")) path = env;
    }
    if (path.empty()) return BreakerCatalog::standard();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open breaker catalog \"" + path + "\"");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return BreakerCatalog::from_json(buffer.str());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file \"" + path + "\"");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_validate(const std::string& case_path) {
    // parse without the validity gate so the report can carry every finding
    const std::string text =
        case_path == "@glover5" ? glover5_json() : read_file(case_path);
    Network net;
    try {
        net = parse_case(text);
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) std::cerr << "error: " << v << "\n";
        return kExitBadInput;
    }
    const ValidationReport report = validate(net);
    for (const auto& e : report.errors) std::cerr << "error: " << e << "\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (report.ok())
        std::cout << "case \"" << net.name << "\": " << net.buses.size() << " buses, "
                  << net.branches.size() << " branches, " << net.shunts.size()
                  << " shunts; no errors\n";
    return report.ok() ? kExitOk : kExitBadInput;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridflow: steady-state power-system analysis (power flow, Y-bus, faults, scenarios)"};
    app.require_subcommand(1);

    std::string case_path = "@glover5";
    std::string format_name = "table";

    auto add_case_arg = [&](CLI::App* cmd) {
        cmd->add_option("case", case_path, "case file path or @glover5")->capture_default_str();
    };
    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", format_name, "table, csv or json")->capture_default_str();
    };

    auto* validate_cmd = app.add_subcommand("validate", "check a case file");
    add_case_arg(validate_cmd);

    auto* ybus_cmd = app.add_subcommand("ybus", "print the bus admittance matrix");
    std::string sequence_name = "positive";
    add_case_arg(ybus_cmd);
    ybus_cmd->add_option("--sequence", sequence_name, "positive, negative or zero")
        ->capture_default_str();
    add_format(ybus_cmd);

    auto* solve_cmd = app.add_subcommand("solve", "run an AC power flow");
    SolveOptions solve_options;
    bool no_q_limits = false;
    std::string json_out;
    add_case_arg(solve_cmd);
    solve_cmd->add_option("--tol", solve_options.tolerance, "convergence tolerance (pu)")
        ->capture_default_str();
    solve_cmd->add_option("--max-iter", solve_options.max_iterations, "iteration budget")
        ->capture_default_str();
    solve_cmd->add_flag("--no-q-limits", no_q_limits, "ignore generator reactive limits");
    solve_cmd->add_option("--damping", solve_options.damping, "Newton step scale")
        ->capture_default_str();
    solve_cmd->add_option("--json-out", json_out, "also write the JSON solution document here");
    add_format(solve_cmd);

    auto* report_cmd = app.add_subcommand("report", "solve and report flows, losses, violations");
    double v_min = kDefaultVMin, v_max = kDefaultVMax;
    add_case_arg(report_cmd);
    report_cmd->add_option("--vmin", v_min, "lower voltage bound (pu)")->capture_default_str();
    report_cmd->add_option("--vmax", v_max, "upper voltage bound (pu)")->capture_default_str();
    add_format(report_cmd);

    auto* faults_cmd = app.add_subcommand("faults", "fault currents and breaker selection");
    int fault_bus = 0;
    std::string fault_type = "all";
    std::string zf_text = "0";
    std::string catalog_path;
    std::string prefault_text;
    double x_sub = 0.05, x_neg = 0.05, x_zero = 0.05;
    add_case_arg(faults_cmd);
    faults_cmd->add_option("--bus", fault_bus, "faulted bus id")->required();
    faults_cmd->add_option("--type", fault_type, "3ph, slg, ll, dlg or all")->capture_default_str();
    faults_cmd->add_option("--zf", zf_text, "fault impedance, e.g. 0.01+j0.05")
        ->capture_default_str();
    faults_cmd->add_option("--catalog", catalog_path,
                           "breaker catalog JSON (default: GRIDFLOW_CATALOG or built-in)");
    faults_cmd->add_option("--prefault", prefault_text,
                           "prefault voltage in pu, or \"solved\" to use the load-flow voltage "
                           "(default: the bundled study profile, 1.05)");
    faults_cmd->add_option("--x-sub", x_sub, "machine subtransient reactance (pu)")
        ->capture_default_str();
    faults_cmd->add_option("--x-neg", x_neg, "machine negative-sequence reactance (pu)")
        ->capture_default_str();
    faults_cmd->add_option("--x-zero", x_zero, "machine zero-sequence reactance (pu)")
        ->capture_default_str();
    add_format(faults_cmd);

    auto* scenario_cmd = app.add_subcommand("scenario", "run a what-if scenario file");
    std::string scenario_path;
    int parallelism = 1;
    scenario_cmd->add_option("file", scenario_path, "scenario JSON file")->required();
    scenario_cmd->add_option("--parallel", parallelism, "worker threads for sweep points")
        ->capture_default_str();
    add_format(scenario_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const OutputFormat format = output_format_from_string(format_name);

        if (app.got_subcommand(validate_cmd)) return run_validate(case_path);

        if (app.got_subcommand(ybus_cmd)) {
            const Network net = load_case(case_path);
            Sequence seq = Sequence::Positive;
            if (sequence_name == "negative")
                seq = Sequence::Negative;
            else if (sequence_name == "zero")
                seq = Sequence::Zero;
            else if (sequence_name != "positive")
                throw ParseError("sequence must be positive, negative or zero");
            const AdmittanceMatrix y = build_ybus(net, seq);
            for (const auto& note : y.diagnostics()) std::cerr << "warning: " << note << "\n";
            std::cout << emit_ybus(y, format);
            return kExitOk;
        }

        if (app.got_subcommand(solve_cmd)) {
            solve_options.enforce_q_limits = !no_q_limits;
            const Network net = load_case(case_path);
            const PowerFlowSolution sol = solve_power_flow(net, solve_options);
            std::cout << emit_solution(net, sol, format);
            if (!json_out.empty()) {
                std::ofstream out(json_out, std::ios::binary | std::ios::trunc);
                if (!out) throw ParseError("cannot write \"" + json_out + "\"");
                out << emit_solution(net, sol, OutputFormat::Json);
            }
            if (!sol.converged) {
                std::cerr << "power flow did not converge: " << to_string(sol.status) << " after "
                          << sol.iterations << " iterations (last residual "
                          << (sol.max_mismatch_trace.empty() ? 0.0 : sol.max_mismatch_trace.back())
                          << " pu)\n";
                return kExitNoConvergence;
            }
            return kExitOk;
        }

        if (app.got_subcommand(report_cmd)) {
            const Network net = load_case(case_path);
            const PowerFlowSolution sol = solve_power_flow(net);
            if (!sol.converged) {
                std::cerr << "power flow did not converge: " << to_string(sol.status) << "\n";
                return kExitNoConvergence;
            }
            const auto flows = branch_flows(net, sol);
            const auto summary = summarize(net, sol, v_min, v_max);
            std::cout << emit_report(net, sol, summary, flows, format);
            return kExitOk;
        }

        if (app.got_subcommand(faults_cmd)) {
            const Network net = load_case(case_path);
            SequenceData seq_data;
            for (const auto& bus : net.buses)
                if (bus.kind != BusKind::PQ)
                    seq_data.generators.push_back({bus.id, x_sub, x_neg, x_zero, Complex(0, 0), true});
            double prefault = glover5_fault_prefault_voltage();
            if (!prefault_text.empty()) {
                if (prefault_text == "solved") {
                    const PowerFlowSolution sol = solve_power_flow(net);
                    if (!sol.converged) {
                        std::cerr << "cannot take prefault voltage from an unconverged load flow\n";
                        return kExitNoConvergence;
                    }
                    prefault = sol.v_at(fault_bus);
                } else {
                    prefault = std::stod(prefault_text);
                }
            }
            const SequenceNetworks nets = build_sequence_networks(net, seq_data);
            const Complex zf = parse_complex(zf_text);
            std::vector<FaultKind> kinds;
            if (fault_type == "all")
                kinds = {FaultKind::ThreePhase, FaultKind::LineToLine,
                         FaultKind::SingleLineToGround, FaultKind::DoubleLineToGround};
            else
                kinds = {fault_kind_from_string(fault_type)};
            const BreakerCatalog catalog = load_catalog(catalog_path);
            std::vector<FaultResult> results;
            std::vector<std::string> breakers;
            bool rating_gap = false;
            for (const FaultKind kind : kinds) {
                FaultResult r = compute_fault(nets, net, {fault_bus, kind, zf, prefault});
                try {
                    breakers.push_back(select_breaker(r.reported_current_amps, catalog).label);
                } catch (const NoAdequateRatingError&) {
                    breakers.push_back("none adequate");
                    rating_gap = true;
                }
                results.push_back(std::move(r));
            }
            if (results.size() == 1 && format == OutputFormat::Table)
                std::cout << emit_fault(results.front(), format)
                          << "  recommended breaker: " << breakers.front() << "\n";
            else
                std::cout << emit_faults(results, breakers, format);
            if (rating_gap) {
                std::cerr << "error: no catalog rating covers at least one fault current\n";
                return kExitFaultError;
            }
            return kExitOk;
        }

        if (app.got_subcommand(scenario_cmd)) {
            const ScenarioFile file = parse_scenario(read_file(scenario_path));
            const Network base = load_case(file.base_case);
            if (file.shunt_sweep) {
                const Network staged = apply_actions(base, file.actions);
                const auto reports = shunt_sweep(staged, file.shunt_sweep->bus,
                                                 file.shunt_sweep->q_nominal_values, file.solve,
                                                 parallelism);
                std::cout << emit_scenario_reports(reports, format);
                return kExitOk;
            }
            if (file.tap_sweep) {
                const Network staged = apply_actions(base, file.actions);
                const auto& spec = *file.tap_sweep;
                const auto result =
                    tap_sweep(staged, spec.transformers, spec.tap_min, spec.tap_max, spec.step,
                              spec.target_bus, spec.target_v, file.solve, parallelism);
                std::cout << emit_tap_sweep(result, format);
                return kExitOk;
            }
            if (file.load_shed) {
                const Network staged = apply_actions(base, file.actions);
                const auto& spec = *file.load_shed;
                const auto result = load_shed_sweep(staged, spec.bus, spec.target_v, spec.step_pct,
                                                    file.solve, parallelism);
                std::cout << emit_load_shed(result, format);
                return kExitOk;
            }
            const ScenarioReport report = run_scenario(base, file.actions, file.solve, file.name);
            std::cout << emit_scenario_report(report, format);
            if (!report.solution.converged) {
                std::cerr << "scenario \"" << report.name << "\" did not converge: "
                          << to_string(report.solution.status) << "\n";
                return kExitNoConvergence;
            }
            return kExitOk;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const NoAdequateRatingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFaultError;
    } catch (const UngroundedSystemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFaultError;
    } catch (const NotSupportedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFaultError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitUsage;
}
