#include "gridflow/ybus.hpp"

#include <cmath>

namespace gridflow {

AdmittanceMatrix::AdmittanceMatrix(std::vector<int> bus_ids, DenseMatrix<Complex> entries)
    : bus_ids_(std::move(bus_ids)), entries_(std::move(entries)) {
    for (std::size_t i = 0; i < bus_ids_.size(); ++i) index_[bus_ids_[i]] = i;
}

std::size_t AdmittanceMatrix::index_of(int bus_id) const {
    const auto it = index_.find(bus_id);
    if (it == index_.end()) throw UnknownBusError(bus_id);
    return it->second;
}

std::vector<std::string> AdmittanceMatrix::diagnostics() const {
    std::vector<std::string> findings;
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double offdiag = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) offdiag += magnitude(i, j);
        // 0.1% margin: near-colinear branch admittances sum to a hair under
        // the magnitude sum and are not worth a warning
        if (magnitude(i, i) < offdiag * (1.0 - 1e-3))
            findings.push_back("row for bus " + std::to_string(bus_ids_[i]) +
                               " is not diagonally dominant in magnitude");
    }
    return findings;
}

AdmittanceMatrix build_ybus(const Network& network, Sequence sequence) {
    std::vector<int> ids;
    ids.reserve(network.buses.size());
    for (const auto& bus : network.buses) ids.push_back(bus.id);
    AdmittanceMatrix ybus(ids, DenseMatrix<Complex>(ids.size(), ids.size()));

    for (const auto& br : network.branches) {
        if (!br.in_service) continue;
        if (br.phase_shift_deg != 0.0)
            throw NotSupportedError("branch " + std::to_string(br.from_bus) + "-" +
                                    std::to_string(br.to_bus) +
                                    ": phase-shifting taps are not supported");
        if (sequence == Sequence::Zero && br.zero_seq_path == ZeroSeqPath::Open) continue;
        const bool zero = sequence == Sequence::Zero;
        const Complex z = zero ? Complex(br.r0, br.x0) : Complex(br.r, br.x);
        const Complex y = Complex(1.0, 0.0) / z;
        const Complex shunt_end(br.g_shunt / 2.0,
                                (zero ? br.b0_charging : br.b_charging) / 2.0);
        const double a = br.tap;
        const std::size_t f = ybus.index_of(br.from_bus);
        const std::size_t t = ybus.index_of(br.to_bus);
        // the tap-side ideal winding sits on the to bus: V_to = a * V_from at no load
        ybus.at(f, f) += y + shunt_end;
        ybus.at(t, t) += y / (a * a) + shunt_end;
        ybus.at(f, t) -= y / a;
        ybus.at(t, f) -= y / a;
    }
    if (sequence != Sequence::Zero) {
        for (const auto& sh : network.shunts) {
            if (!sh.in_service) continue;
            const std::size_t i = ybus.index_of(sh.bus);
            ybus.at(i, i) += Complex(0.0, sh.q_nominal);
        }
    }
    return ybus;
}

Complex thevenin_impedance(const AdmittanceMatrix& y, int bus_id) {
    const std::size_t n = y.size();
    const std::size_t k = y.index_of(bus_id);
    std::vector<Complex> unit(n, Complex(0.0, 0.0));
    unit[k] = Complex(1.0, 0.0);
    const std::vector<Complex> z = solve_linear_system(y.entries(), unit);
    return z[k];
}

}  // namespace gridflow
