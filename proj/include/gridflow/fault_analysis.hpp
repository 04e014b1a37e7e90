#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridflow/network.hpp"
#include "gridflow/ybus.hpp"

namespace gridflow {

/// Synchronous machine sequence reactances (pu on the system base) and
/// grounding. A grounded machine contributes 1/(j x_zero + 3 z_neutral) to
/// the zero-sequence diagonal; an ungrounded one contributes nothing there.
struct GeneratorSequenceData {
    int bus = 0;
    double x_subtransient = 0.0;  // positive sequence X''
    double x_negative = 0.0;
    double x_zero = 0.0;
    Complex z_neutral{0.0, 0.0};
    bool grounded = true;
};

/// Optional neutral impedance on a grounded-through transformer; adds
/// 3 z_neutral to that branch's zero-sequence series impedance.
struct TransformerGrounding {
    int from_bus = 0;
    int to_bus = 0;
    Complex z_neutral{0.0, 0.0};
};

struct SequenceData {
    std::vector<GeneratorSequenceData> generators;
    std::vector<TransformerGrounding> transformer_neutrals;
};

struct SequenceNetworks {
    AdmittanceMatrix zero;
    AdmittanceMatrix positive;
    AdmittanceMatrix negative;
};

/// Sequence admittance matrices for fault analysis: the positive/negative
/// networks are the corresponding Y-bus builds plus machine admittances
/// 1/(j x'') and 1/(j x_neg); the zero network uses the branches' r0/x0/b0,
/// omits zero-sequence-open paths, and stamps grounded machines through
/// x_zero + 3 z_neutral. Throws UngroundedSystemError when the zero network
/// has no path to ground.
SequenceNetworks build_sequence_networks(const Network& network, const SequenceData& data);

enum class FaultKind { ThreePhase, SingleLineToGround, LineToLine, DoubleLineToGround };

std::string to_string(FaultKind kind);
FaultKind fault_kind_from_string(const std::string& s);

struct FaultSpec {
    int bus = 0;
    FaultKind kind = FaultKind::ThreePhase;
    Complex z_fault{0.0, 0.0};
    double prefault_voltage = 1.0;  // pu, uniform (flat) prefault profile
};

/// Phase order is a, b, c. Connection conventions: SLG faults phase a,
/// LL and DLG fault phases b and c.
struct FaultResult {
    FaultSpec spec;
    Complex z_thevenin[3];               // Z0, Z1, Z2 at the faulted bus
    Complex sequence_currents[3];        // I0, I1, I2 (pu)
    std::array<Complex, 3> phase_currents;   // pu
    std::array<Complex, 3> phase_voltages;   // pu, at the faulted bus
    Complex ground_current;              // 3 I0 (pu); what flows into ground
    double base_amps = 0.0;              // ampere base at the faulted bus
    /// |I_a| for three-phase and SLG faults, |I_b| for LL and DLG
    /// (a faulted phase in every case); in amperes via base_amps.
    double reported_current_amps = 0.0;
    double ground_current_amps = 0.0;
};

/// Thevenin-equivalent fault solve at one bus. With E the prefault voltage
/// and Z0/Z1/Z2 the driving-point sequence impedances:
///   three-phase: I1 = E/(Z1+Zf), I0 = I2 = 0
///   SLG (a-g):   I0 = I1 = I2 = E/(Z0+Z1+Z2+3Zf)
///   LL (b-c):    I1 = -I2 = E/(Z1+Z2+Zf), I0 = 0
///   DLG (b,c-g): I1 = E/(Z1 + Z2(Z0+3Zf)/(Z2+Z0+3Zf)), I2 and I0 by
///                current division of -V1
/// Phase quantities follow by the symmetrical-component transform.
FaultResult compute_fault(const SequenceNetworks& networks, const Network& network,
                          const FaultSpec& spec);

/// Symmetrical-component transform matrix A with [x_a,x_b,x_c] = A [x_0,x_1,x_2].
std::array<std::array<Complex, 3>, 3> sequence_transform();
std::array<Complex, 3> sequence_to_phase(const std::array<Complex, 3>& seq);
std::array<Complex, 3> phase_to_sequence(const std::array<Complex, 3>& abc);

struct BreakerCatalog {
    struct Entry {
        double interrupting_amps = 0.0;
        std::string label;
    };
    std::vector<Entry> entries;  // sorted ascending by rating

    /// Generic ladder {1250, 1600, 2000, 2500, 3150, 4000} A.
    static BreakerCatalog standard();
    /// JSON file: [{"interrupting_amps": 1250, "label": "..."}, ...]
    static BreakerCatalog from_json(const std::string& text);
};

/// Smallest catalog rating covering the given current; throws
/// NoAdequateRatingError past the top of the ladder.
const BreakerCatalog::Entry& select_breaker(double current_amps, const BreakerCatalog& catalog);

}  // namespace gridflow
