#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridflow/errors.hpp"
#include "gridflow/numerics.hpp"

namespace gridflow {

enum class BusKind { Slack, PV, PQ };

std::string to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& s);

/// Per-unit bus record. Scheduled power for the solver is
/// p_gen - p_load / q_gen - q_load (generation and load kept separate so
/// reports can show both sides).
struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double v_setpoint = 1.0;       // pu, Slack/PV only
    double angle_setpoint = 0.0;   // radians internally, Slack only
    double p_gen = 0.0;            // pu
    double q_gen = 0.0;            // pu
    double p_load = 0.0;           // pu
    double q_load = 0.0;           // pu
    std::optional<double> q_gen_min;  // pu, PV only
    std::optional<double> q_gen_max;  // pu, PV only
    double base_kv = 0.0;          // line-to-line kilovolts

    friend bool operator==(const Bus&, const Bus&) = default;
};

enum class BranchKind { Line, Transformer };
enum class ZeroSeqPath { Open, GroundedThrough };

/// Series branch (line or two-winding transformer), pi model. b_charging is
/// the TOTAL line charging; the Y-bus builder splits it half per end.
/// The off-nominal tap ratio applies to transformers listed from->to, the
/// ideal winding sitting on the to side (raising tap raises to-side voltage).
struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    BranchKind kind = BranchKind::Line;
    double r = 0.0;            // pu series resistance
    double x = 0.0;            // pu series reactance
    double g_shunt = 0.0;      // pu total shunt conductance
    double b_charging = 0.0;   // pu total shunt susceptance
    double tap = 1.0;          // dimensionless, transformers only
    double mva_limit = 0.0;    // pu apparent-power rating
    bool in_service = true;
    double r0 = 0.0;           // pu zero-sequence series resistance
    double x0 = 0.0;           // pu zero-sequence series reactance
    double b0_charging = 0.0;  // pu zero-sequence total charging
    ZeroSeqPath zero_seq_path = ZeroSeqPath::GroundedThrough;
    /// Phase-shifting taps parse but are rejected by the matrix builder.
    double phase_shift_deg = 0.0;

    friend bool operator==(const Branch&, const Branch&) = default;
};

/// Switched shunt; q_nominal is the pu reactive injection at 1.0 pu voltage
/// (positive = capacitive). Delivered power scales with the voltage squared.
struct ShuntDevice {
    int bus = 0;
    double q_nominal = 0.0;  // pu at 1.0 pu voltage
    bool in_service = true;

    friend bool operator==(const ShuntDevice&, const ShuntDevice&) = default;
};

/// Immutable case description. Construct via parse_case or aggregate init;
/// mutate only by copy (the scenario engine works on copies).
struct Network {
    std::string name;
    double s_base = 100.0;  // MVA
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<ShuntDevice> shunts;

    const Bus* find_bus(int id) const;
    const Bus& bus(int id) const;  // throws UnknownBusError
    std::size_t bus_count() const { return buses.size(); }

    friend bool operator==(const Network&, const Network&) = default;
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

/// Structural check: hard invariant violations land in errors (duplicate ids,
/// missing/extra slack, unresolved endpoints, zero reactance, tap range,
/// nonpositive ratings), soft findings in warnings (disconnected buses).
/// Total: never throws, reports everything it can see.
ValidationReport validate(const Network& network);

/// Parse a UTF-8 JSON case document. Applies defaults (tap 1.0, line
/// zero-sequence 3x positive, transformer zero-sequence equal to positive,
/// b0 = b_charging), rejects unknown keys, then validates; throws ParseError
/// or ValidationError (listing every violation).
Network parse_case(const std::string& text);

/// Canonical JSON for a network; parse_case(serialize_case(n)) == n.
std::string serialize_case(const Network& network);

/// Parse one branch object (same schema and defaults as in a case document).
Branch parse_branch_json(const std::string& text);

/// Base current in amperes at a bus: s_base*1e6 / (sqrt(3) * base_kv*1e3).
double base_current_amps(const Network& network, int bus_id);

}  // namespace gridflow
