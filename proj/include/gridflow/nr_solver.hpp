#pragma once

#include <string>
#include <vector>

#include "gridflow/network.hpp"
#include "gridflow/ybus.hpp"

namespace gridflow {

/// Full per-bus state in the Y-bus row order; slack and PV quantities stay
/// pinned at their setpoints, the solver only corrects the unknown subset.
struct StateVector {
    std::vector<double> angle_rad;  // per bus
    std::vector<double> v_mag;      // per bus
};

/// Scheduled-minus-computed residuals in the Newton ordering: dp for every
/// non-slack bus, then dq for every PQ bus.
struct MismatchVector {
    std::vector<double> dp;
    std::vector<double> dq;

    double max_abs() const;
    std::vector<double> stacked() const;
};

struct BusPower {
    double p = 0.0;
    double q = 0.0;
};

enum class SolveStatus { Converged, IterationLimit, Diverged, SingularJacobian };

std::string to_string(SolveStatus status);

enum class LimitKind { AtQMax, AtQMin, RevertedToPV };

struct LimitSwitchEvent {
    int bus_id = 0;
    int iteration = 0;
    LimitKind kind = LimitKind::AtQMax;
};

struct SolveOptions {
    double tolerance = 1e-6;   // pu, on max |mismatch|
    int max_iterations = 50;
    bool enforce_q_limits = true;
    double damping = 1.0;      // Newton step scale; 1.0 = full step
    /// Divergence heuristics: abandon early when any magnitude leaves
    /// [v_collapse, v_runaway] or the residual grows this many times in a row.
    double v_collapse = 0.1;
    double v_runaway = 2.0;
    int max_residual_growth = 3;
};

struct PowerFlowSolution {
    std::vector<int> bus_ids;
    std::vector<double> v_mag;        // pu
    std::vector<double> angle_rad;
    std::vector<double> p_injection;  // pu, net scheduled-side injection at solution
    std::vector<double> q_injection;  // pu
    bool converged = false;
    SolveStatus status = SolveStatus::IterationLimit;
    int iterations = 0;
    std::vector<double> max_mismatch_trace;  // residual before each correction
    std::vector<LimitSwitchEvent> limit_switches;

    std::size_t index_of(int bus_id) const;  // throws UnknownBusError
    double v_at(int bus_id) const { return v_mag[index_of(bus_id)]; }
    double angle_at(int bus_id) const { return angle_rad[index_of(bus_id)]; }
    Complex voltage_at(int bus_id) const {
        const auto i = index_of(bus_id);
        return std::polar(v_mag[i], angle_rad[i]);
    }
};

/// PQ magnitudes 1.0, every non-slack angle at the slack angle, PV
/// magnitudes pinned at their setpoints.
StateVector flat_start(const Network& network);

/// Net injections from Eqs. of the polar formulation:
///   P_i =  sum_j |V_i||V_j||Y_ij| cos(theta_ij - d_i + d_j)
///   Q_i = -sum_j |V_i||V_j||Y_ij| sin(theta_ij - d_i + d_j)
std::vector<BusPower> power_injections(const AdmittanceMatrix& y, const StateVector& state);

/// Injected currents I_i = sum_j Y_ij V_j; exposed for testing only.
std::vector<Complex> injection_currents(const AdmittanceMatrix& y, const StateVector& state);

/// Effective bus roles for one Newton pass (PV buses may be temporarily
/// switched to PQ by the reactive-limit logic).
MismatchVector mismatch(const Network& network, const std::vector<BusPower>& injections,
                        const std::vector<BusKind>& roles,
                        const std::vector<double>& q_scheduled_override = {});

/// Jacobian of the stacked mismatch in the ordering [dP; dQ] vs [d delta; d |V|]:
/// blocks J1 = dP/dd, J3 = dP/d|V|, J2 = dQ/dd, J4 = dQ/d|V|, assembled as one
/// real matrix. Entries are the analytic partials of the injection equations.
DenseMatrix<double> jacobian(const AdmittanceMatrix& y, const StateVector& state,
                             const std::vector<BusKind>& roles);

/// Polar Newton-Raphson from a flat start: mismatch -> Jacobian -> LU solve ->
/// state update, until max |mismatch| <= tolerance or failure. PV buses whose
/// computed reactive generation leaves [q_min, q_max] are switched to PQ at the
/// violated limit after each iteration; a switched bus reverts only when its
/// voltage recovers past the setpoint. Slack P,Q and PV Q are back-computed
/// from the converged state. Non-convergence is reported in the result
/// (status + residual trace), never thrown.
PowerFlowSolution solve_power_flow(const Network& network, const SolveOptions& options = {});

}  // namespace gridflow
