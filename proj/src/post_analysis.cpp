#include "gridflow/post_analysis.hpp"

#include <algorithm>
#include <cmath>

namespace gridflow {

std::vector<BranchFlow> branch_flows(const Network& network, const PowerFlowSolution& solution) {
    std::vector<BranchFlow> flows;
    flows.reserve(network.branches.size());
    for (std::size_t i = 0; i < network.branches.size(); ++i) {
        const auto& br = network.branches[i];
        BranchFlow flow;
        flow.branch_index = i;
        flow.from_bus = br.from_bus;
        flow.to_bus = br.to_bus;
        if (br.in_service) {
            const Complex vf = solution.voltage_at(br.from_bus);
            const Complex vt = solution.voltage_at(br.to_bus);
            const Complex y = Complex(1.0, 0.0) / Complex(br.r, br.x);
            const Complex shunt_end(br.g_shunt / 2.0, br.b_charging / 2.0);
            const double a = br.tap;
            // same stamping as the Y-bus builder (tap winding on the to side)
            const Complex i_from = (y + shunt_end) * vf - (y / a) * vt;
            const Complex i_to = -(y / a) * vf + (y / (a * a) + shunt_end) * vt;
            flow.s_from = vf * std::conj(i_from);
            flow.s_to = vt * std::conj(i_to);
            flow.loss = flow.s_from + flow.s_to;
            if (br.mva_limit > 0.0)
                flow.loading_pct =
                    100.0 * std::max(std::abs(flow.s_from), std::abs(flow.s_to)) / br.mva_limit;
        }
        flows.push_back(flow);
    }
    return flows;
}

double shunt_delivered_q_mvar(const ShuntDevice& shunt, double v_pu, double s_base_mva) {
    return v_pu * v_pu * shunt.q_nominal * s_base_mva;
}

std::vector<VoltageViolation> voltage_report(const PowerFlowSolution& solution, double v_min,
                                             double v_max) {
    constexpr double kSlack = 1e-9;  // exact-boundary setpoints are not violations
    std::vector<VoltageViolation> violations;
    for (std::size_t i = 0; i < solution.bus_ids.size(); ++i) {
        const double v = solution.v_mag[i];
        if (v < v_min - kSlack)
            violations.push_back({solution.bus_ids[i], v, v_min});
        else if (v > v_max + kSlack)
            violations.push_back({solution.bus_ids[i], v, v_max});
    }
    return violations;
}

SystemSummary summarize(const Network& network, const PowerFlowSolution& solution, double v_min,
                        double v_max) {
    SystemSummary s;
    const double base = network.s_base;
    for (std::size_t i = 0; i < network.buses.size(); ++i) {
        const auto& bus = network.buses[i];
        s.load_mw += bus.p_load * base;
        s.load_mvar += bus.q_load * base;
        // generator output backed out of the solved injection: gen = injection + load
        s.gen_mw += (solution.p_injection[i] + bus.p_load) * base;
        s.gen_mvar += (solution.q_injection[i] + bus.q_load) * base;
    }
    for (const auto& flow : branch_flows(network, solution)) {
        s.loss_mw += flow.loss.real() * base;
        s.loss_mvar += flow.loss.imag() * base;
    }
    for (const auto& sh : network.shunts) {
        if (!sh.in_service) continue;
        s.shunt_mvar += shunt_delivered_q_mvar(sh, solution.v_at(sh.bus), base);
    }
    s.violations = voltage_report(solution, v_min, v_max);
    return s;
}

}  // namespace gridflow
