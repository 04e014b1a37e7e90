#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gridflow/network.hpp"
#include "gridflow/numerics.hpp"

namespace gridflow {

enum class Sequence { Positive, Negative, Zero };

/// Complex nodal admittance matrix I = Y V, with the bus-id <-> row mapping
/// and per-entry polar access used by the power-flow equations.
class AdmittanceMatrix {
  public:
    AdmittanceMatrix() = default;
    AdmittanceMatrix(std::vector<int> bus_ids, DenseMatrix<Complex> entries);

    std::size_t size() const { return bus_ids_.size(); }
    const std::vector<int>& bus_ids() const { return bus_ids_; }
    std::size_t index_of(int bus_id) const;  // throws UnknownBusError
    int bus_at(std::size_t row) const { return bus_ids_[row]; }

    const Complex& at(std::size_t i, std::size_t j) const { return entries_(i, j); }
    Complex& at(std::size_t i, std::size_t j) { return entries_(i, j); }
    const Complex& at_bus(int bus_i, int bus_j) const {
        return entries_(index_of(bus_i), index_of(bus_j));
    }

    double magnitude(std::size_t i, std::size_t j) const { return std::abs(entries_(i, j)); }
    double angle(std::size_t i, std::size_t j) const { return std::arg(entries_(i, j)); }

    const DenseMatrix<Complex>& entries() const { return entries_; }

    /// Soft findings only (e.g. rows without diagonal dominance in magnitude).
    std::vector<std::string> diagnostics() const;

  private:
    std::vector<int> bus_ids_;
    std::unordered_map<int, std::size_t> index_;
    DenseMatrix<Complex> entries_;
};

/// Assemble the bus admittance matrix for one sequence. For each in-service
/// branch with series admittance y = 1/(r + jx) and tap a (1.0 for lines):
///
///   Y_ff += y     + j b/2        Y_ft -= y / a
///   Y_tt += y/a^2 + j b/2        Y_tf -= y / a
///
/// so a tap above 1.0 raises the to-side voltage. Shunt devices add
/// j q_nominal to their diagonal in the Positive and Negative sequences.
/// The Zero sequence uses r0/x0/b0 and skips branches whose zero_seq_path
/// is Open. Complex (phase-shifting) taps are not supported.
AdmittanceMatrix build_ybus(const Network& network, Sequence sequence = Sequence::Positive);

/// Driving-point impedance Z_kk at a bus, by solving Y z = e_k. Requires the
/// sequence network to be grounded somewhere (source admittances stamped);
/// throws SingularMatrixError otherwise.
Complex thevenin_impedance(const AdmittanceMatrix& y, int bus_id);

}  // namespace gridflow
