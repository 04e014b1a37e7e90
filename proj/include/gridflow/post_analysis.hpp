#pragma once

#include <vector>

#include "gridflow/network.hpp"
#include "gridflow/nr_solver.hpp"

namespace gridflow {

/// Complex power entering a branch at each end (pu), from the same stamping
/// the Y-bus builder uses, so taps and charging are accounted identically.
struct BranchFlow {
    std::size_t branch_index = 0;
    int from_bus = 0;
    int to_bus = 0;
    Complex s_from;     // pu, into the branch at the from end
    Complex s_to;       // pu, into the branch at the to end
    Complex loss;       // s_from + s_to
    double loading_pct = 0.0;  // 100 * max(|s_from|,|s_to|) / mva_limit
};

std::vector<BranchFlow> branch_flows(const Network& network, const PowerFlowSolution& solution);

/// Reactive power a shunt actually delivers at voltage v (engineering units):
/// v^2 * q_nominal * s_base.
double shunt_delivered_q_mvar(const ShuntDevice& shunt, double v_pu, double s_base_mva);

struct VoltageViolation {
    int bus = 0;
    double v_mag = 0.0;
    double bound = 0.0;  // the violated bound
};

inline constexpr double kDefaultVMin = 0.95;
inline constexpr double kDefaultVMax = 1.05;

std::vector<VoltageViolation> voltage_report(const PowerFlowSolution& solution,
                                             double v_min = kDefaultVMin,
                                             double v_max = kDefaultVMax);

struct SystemSummary {
    double gen_mw = 0.0;
    double gen_mvar = 0.0;
    double load_mw = 0.0;
    double load_mvar = 0.0;
    double loss_mw = 0.0;
    double loss_mvar = 0.0;  // net series + shunt/charging absorption
    double shunt_mvar = 0.0; // delivered by shunt devices
    std::vector<VoltageViolation> violations;
};

SystemSummary summarize(const Network& network, const PowerFlowSolution& solution,
                        double v_min = kDefaultVMin, double v_max = kDefaultVMax);

}  // namespace gridflow
