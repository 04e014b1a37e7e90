#include "gridflow/nr_solver.hpp"

#include <algorithm>
#include <cmath>

namespace gridflow {

double MismatchVector::max_abs() const {
    double m = 0.0;
    for (double v : dp) m = std::max(m, std::abs(v));
    for (double v : dq) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> MismatchVector::stacked() const {
    std::vector<double> out;
    out.reserve(dp.size() + dq.size());
    out.insert(out.end(), dp.begin(), dp.end());
    out.insert(out.end(), dq.begin(), dq.end());
    return out;
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::IterationLimit: return "iteration limit reached";
        case SolveStatus::Diverged: return "diverged";
        case SolveStatus::SingularJacobian: return "singular Jacobian";
    }
    return "unknown";
}

std::size_t PowerFlowSolution::index_of(int bus_id) const {
    for (std::size_t i = 0; i < bus_ids.size(); ++i)
        if (bus_ids[i] == bus_id) return i;
    throw UnknownBusError(bus_id);
}

StateVector flat_start(const Network& network) {
    StateVector state;
    double slack_angle = 0.0;
    for (const auto& bus : network.buses)
        if (bus.kind == BusKind::Slack) slack_angle = bus.angle_setpoint;
    for (const auto& bus : network.buses) {
        state.angle_rad.push_back(slack_angle);
        state.v_mag.push_back(bus.kind == BusKind::PQ ? 1.0 : bus.v_setpoint);
    }
    return state;
}

std::vector<BusPower> power_injections(const AdmittanceMatrix& y, const StateVector& state) {
    const std::size_t n = y.size();
    if (state.v_mag.size() != n || state.angle_rad.size() != n)
        throw DimensionMismatchError("state size does not match admittance matrix order");
    std::vector<BusPower> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double p = 0.0, q = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ymag = y.magnitude(i, j);
            if (ymag == 0.0) continue;
            const double arg = y.angle(i, j) - state.angle_rad[i] + state.angle_rad[j];
            const double common = state.v_mag[i] * state.v_mag[j] * ymag;
            p += common * std::cos(arg);
            q -= common * std::sin(arg);
        }
        out[i] = {p, q};
    }
    return out;
}

std::vector<Complex> injection_currents(const AdmittanceMatrix& y, const StateVector& state) {
    const std::size_t n = y.size();
    std::vector<Complex> voltage(n);
    for (std::size_t i = 0; i < n; ++i) voltage[i] = std::polar(state.v_mag[i], state.angle_rad[i]);
    return y.entries().multiply(voltage);
}

MismatchVector mismatch(const Network& network, const std::vector<BusPower>& injections,
                        const std::vector<BusKind>& roles,
                        const std::vector<double>& q_scheduled_override) {
    const std::size_t n = network.buses.size();
    if (injections.size() != n || roles.size() != n)
        throw DimensionMismatchError("mismatch inputs do not match bus count");
    MismatchVector mm;
    for (std::size_t i = 0; i < n; ++i) {
        if (roles[i] == BusKind::Slack) continue;
        const auto& bus = network.buses[i];
        mm.dp.push_back(bus.p_gen - bus.p_load - injections[i].p);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (roles[i] != BusKind::PQ) continue;
        const auto& bus = network.buses[i];
        const double q_sch =
            q_scheduled_override.empty() ? bus.q_gen - bus.q_load : q_scheduled_override[i];
        mm.dq.push_back(q_sch - injections[i].q);
    }
    return mm;
}

DenseMatrix<double> jacobian(const AdmittanceMatrix& y, const StateVector& state,
                             const std::vector<BusKind>& roles) {
    const std::size_t n = y.size();
    if (roles.size() != n)
        throw DimensionMismatchError("roles size does not match admittance matrix order");
    std::vector<std::size_t> angle_vars, vmag_vars;
    for (std::size_t i = 0; i < n; ++i) {
        if (roles[i] != BusKind::Slack) angle_vars.push_back(i);
        if (roles[i] == BusKind::PQ) vmag_vars.push_back(i);
    }
    const std::size_t na = angle_vars.size();
    const std::size_t nv = vmag_vars.size();
    DenseMatrix<double> jac(na + nv, na + nv);

    const auto& v = state.v_mag;
    const auto& d = state.angle_rad;
    auto arg = [&](std::size_t i, std::size_t j) {
        return y.angle(i, j) - d[i] + d[j];
    };

    // J1 = dP/dd, J3 = dP/d|V|
    for (std::size_t r = 0; r < na; ++r) {
        const std::size_t i = angle_vars[r];
        for (std::size_t c = 0; c < na; ++c) {
            const std::size_t j = angle_vars[c];
            if (i == j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    if (k != i) acc += v[i] * v[k] * y.magnitude(i, k) * std::sin(arg(i, k));
                jac(r, c) = acc;
            } else {
                jac(r, c) = -v[i] * v[j] * y.magnitude(i, j) * std::sin(arg(i, j));
            }
        }
        for (std::size_t c = 0; c < nv; ++c) {
            const std::size_t j = vmag_vars[c];
            if (i == j) {
                double acc = 2.0 * v[i] * y.magnitude(i, i) * std::cos(y.angle(i, i));
                for (std::size_t k = 0; k < n; ++k)
                    if (k != i) acc += v[k] * y.magnitude(i, k) * std::cos(arg(i, k));
                jac(r, na + c) = acc;
            } else {
                jac(r, na + c) = v[i] * y.magnitude(i, j) * std::cos(arg(i, j));
            }
        }
    }
    // J2 = dQ/dd, J4 = dQ/d|V|
    for (std::size_t r = 0; r < nv; ++r) {
        const std::size_t i = vmag_vars[r];
        for (std::size_t c = 0; c < na; ++c) {
            const std::size_t j = angle_vars[c];
            if (i == j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    if (k != i) acc += v[i] * v[k] * y.magnitude(i, k) * std::cos(arg(i, k));
                jac(na + r, c) = acc;
            } else {
                jac(na + r, c) = -v[i] * v[j] * y.magnitude(i, j) * std::cos(arg(i, j));
            }
        }
        for (std::size_t c = 0; c < nv; ++c) {
            const std::size_t j = vmag_vars[c];
            if (i == j) {
                double acc = -2.0 * v[i] * y.magnitude(i, i) * std::sin(y.angle(i, i));
                for (std::size_t k = 0; k < n; ++k)
                    if (k != i) acc -= v[k] * y.magnitude(i, k) * std::sin(arg(i, k));
                jac(na + r, na + c) = acc;
            } else {
                jac(na + r, na + c) = -v[i] * y.magnitude(i, j) * std::sin(arg(i, j));
            }
        }
    }
    return jac;
}

namespace {

struct LimitState {
    // per bus: 0 = regulating PV, +1 pinned at q_max, -1 pinned at q_min
    std::vector<int> pinned;
    std::vector<double> q_scheduled;  // only meaningful for pinned buses
};

/// After an iteration: pin PV buses whose computed reactive generation leaves
/// its band; un-pin when the voltage recovers past the setpoint (hysteresis).
bool update_limits(const Network& network, const std::vector<BusPower>& injections,
                   StateVector& state, std::vector<BusKind>& roles, LimitState& limits,
                   int iteration, std::vector<LimitSwitchEvent>& events) {
    bool changed = false;
    for (std::size_t i = 0; i < network.buses.size(); ++i) {
        const auto& bus = network.buses[i];
        if (bus.kind != BusKind::PV) continue;
        const double q_gen = injections[i].q + bus.q_load;
        if (limits.pinned[i] == 0) {
            if (bus.q_gen_max && q_gen > *bus.q_gen_max + 1e-9) {
                limits.pinned[i] = +1;
                limits.q_scheduled[i] = *bus.q_gen_max - bus.q_load;
                roles[i] = BusKind::PQ;
                events.push_back({bus.id, iteration, LimitKind::AtQMax});
                changed = true;
            } else if (bus.q_gen_min && q_gen < *bus.q_gen_min - 1e-9) {
                limits.pinned[i] = -1;
                limits.q_scheduled[i] = *bus.q_gen_min - bus.q_load;
                roles[i] = BusKind::PQ;
                events.push_back({bus.id, iteration, LimitKind::AtQMin});
                changed = true;
            }
        } else if (limits.pinned[i] > 0 && state.v_mag[i] > bus.v_setpoint + 1e-9) {
            limits.pinned[i] = 0;
            roles[i] = BusKind::PV;
            state.v_mag[i] = bus.v_setpoint;
            events.push_back({bus.id, iteration, LimitKind::RevertedToPV});
            changed = true;
        } else if (limits.pinned[i] < 0 && state.v_mag[i] < bus.v_setpoint - 1e-9) {
            limits.pinned[i] = 0;
            roles[i] = BusKind::PV;
            state.v_mag[i] = bus.v_setpoint;
            events.push_back({bus.id, iteration, LimitKind::RevertedToPV});
            changed = true;
        }
    }
    return changed;
}

PowerFlowSolution make_solution(const Network& network, const AdmittanceMatrix& ybus,
                                const StateVector& state, SolveStatus status, int iterations,
                                std::vector<double> trace,
                                std::vector<LimitSwitchEvent> switches) {
    PowerFlowSolution sol;
    for (const auto& bus : network.buses) sol.bus_ids.push_back(bus.id);
    sol.v_mag = state.v_mag;
    sol.angle_rad = state.angle_rad;
    const auto injections = power_injections(ybus, state);
    for (const auto& s : injections) {
        sol.p_injection.push_back(s.p);
        sol.q_injection.push_back(s.q);
    }
    sol.converged = status == SolveStatus::Converged;
    sol.status = status;
    sol.iterations = iterations;
    sol.max_mismatch_trace = std::move(trace);
    sol.limit_switches = std::move(switches);
    return sol;
}

}  // namespace

PowerFlowSolution solve_power_flow(const Network& network, const SolveOptions& options) {
    const AdmittanceMatrix ybus = build_ybus(network, Sequence::Positive);
    const std::size_t n = network.buses.size();

    StateVector state = flat_start(network);
    std::vector<BusKind> roles;
    for (const auto& bus : network.buses) roles.push_back(bus.kind);
    LimitState limits{std::vector<int>(n, 0), std::vector<double>(n, 0.0)};

    std::vector<double> trace;
    std::vector<LimitSwitchEvent> switches;
    int growth_streak = 0;
    double previous_residual = -1.0;

    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        const auto injections = power_injections(ybus, state);
        std::vector<double> q_override;
        if (std::any_of(limits.pinned.begin(), limits.pinned.end(), [](int p) { return p != 0; })) {
            q_override.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& bus = network.buses[i];
                q_override[i] =
                    limits.pinned[i] != 0 ? limits.q_scheduled[i] : bus.q_gen - bus.q_load;
            }
        }
        const MismatchVector mm = mismatch(network, injections, roles, q_override);
        const double residual = mm.max_abs();
        trace.push_back(residual);

        if (residual <= options.tolerance) {
            // a bus may still sit outside its reactive band at the solution
            if (options.enforce_q_limits &&
                update_limits(network, injections, state, roles, limits, iter, switches)) {
                previous_residual = -1.0;
                growth_streak = 0;
                continue;
            }
            return make_solution(network, ybus, state, SolveStatus::Converged, iter,
                                 std::move(trace), std::move(switches));
        }
        if (iter == options.max_iterations) break;

        // divergence heuristics: runaway magnitudes or a growing residual
        const bool v_out = std::any_of(state.v_mag.begin(), state.v_mag.end(), [&](double v) {
            return v < options.v_collapse || v > options.v_runaway;
        });
        if (previous_residual >= 0.0 && residual > previous_residual)
            ++growth_streak;
        else
            growth_streak = 0;
        if (v_out || growth_streak >= options.max_residual_growth)
            return make_solution(network, ybus, state, SolveStatus::Diverged, iter,
                                 std::move(trace), std::move(switches));
        previous_residual = residual;

        const DenseMatrix<double> jac = jacobian(ybus, state, roles);
        std::vector<double> correction;
        try {
            correction = solve_linear_system(jac, mm.stacked());
        } catch (const SingularMatrixError&) {
            return make_solution(network, ybus, state, SolveStatus::SingularJacobian, iter,
                                 std::move(trace), std::move(switches));
        }
        std::size_t at = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (roles[i] != BusKind::Slack) state.angle_rad[i] += options.damping * correction[at++];
        for (std::size_t i = 0; i < n; ++i)
            if (roles[i] == BusKind::PQ) state.v_mag[i] += options.damping * correction[at++];

        if (options.enforce_q_limits) {
            const auto updated = power_injections(ybus, state);
            update_limits(network, updated, state, roles, limits, iter + 1, switches);
        }
    }
    return make_solution(network, ybus, state, SolveStatus::IterationLimit,
                         options.max_iterations, std::move(trace), std::move(switches));
}

}  // namespace gridflow
