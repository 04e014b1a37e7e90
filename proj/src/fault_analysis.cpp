#include "gridflow/fault_analysis.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace gridflow {

namespace {

AdmittanceMatrix with_generators(AdmittanceMatrix y, const SequenceData& data, Sequence seq) {
    for (const auto& gen : data.generators) {
        const std::size_t i = y.index_of(gen.bus);
        switch (seq) {
            case Sequence::Positive:
                y.at(i, i) += Complex(1.0, 0.0) / Complex(0.0, gen.x_subtransient);
                break;
            case Sequence::Negative:
                y.at(i, i) += Complex(1.0, 0.0) / Complex(0.0, gen.x_negative);
                break;
            case Sequence::Zero:
                if (gen.grounded)
                    y.at(i, i) +=
                        Complex(1.0, 0.0) / (Complex(0.0, gen.x_zero) + 3.0 * gen.z_neutral);
                break;
        }
    }
    return y;
}

}  // namespace

SequenceNetworks build_sequence_networks(const Network& network, const SequenceData& data) {
    Network zero_view = network;  // transformer neutral impedances fold into r0/x0
    for (const auto& tg : data.transformer_neutrals) {
        for (auto& br : zero_view.branches) {
            if (br.kind == BranchKind::Transformer && br.from_bus == tg.from_bus &&
                br.to_bus == tg.to_bus) {
                br.r0 += 3.0 * tg.z_neutral.real();
                br.x0 += 3.0 * tg.z_neutral.imag();
            }
        }
    }
    SequenceNetworks nets{
        with_generators(build_ybus(zero_view, Sequence::Zero), data, Sequence::Zero),
        with_generators(build_ybus(network, Sequence::Positive), data, Sequence::Positive),
        with_generators(build_ybus(network, Sequence::Negative), data, Sequence::Negative)};

    // a floating zero-sequence network shows up as a singular matrix
    try {
        (void)lu_factor(nets.zero.entries());
    } catch (const SingularMatrixError& e) {
        throw UngroundedSystemError(std::string("zero-sequence network has no ground path: ") +
                                    e.what());
    }
    return nets;
}

std::string to_string(FaultKind kind) {
    switch (kind) {
        case FaultKind::ThreePhase: return "3ph";
        case FaultKind::SingleLineToGround: return "slg";
        case FaultKind::LineToLine: return "ll";
        case FaultKind::DoubleLineToGround: return "dlg";
    }
    return "3ph";
}

FaultKind fault_kind_from_string(const std::string& s) {
    if (s == "3ph" || s == "3PH" || s == "abc") return FaultKind::ThreePhase;
    if (s == "slg" || s == "SLG") return FaultKind::SingleLineToGround;
    if (s == "ll" || s == "LL") return FaultKind::LineToLine;
    if (s == "dlg" || s == "DLG") return FaultKind::DoubleLineToGround;
    throw ParseError("fault type must be one of 3ph, slg, ll, dlg; got \"" + s + "\"");
}

std::array<std::array<Complex, 3>, 3> sequence_transform() {
    const Complex a = std::polar(1.0, 2.0 * 3.14159265358979323846 / 3.0);
    const Complex a2 = a * a;
    return {{{Complex(1, 0), Complex(1, 0), Complex(1, 0)},
             {Complex(1, 0), a2, a},
             {Complex(1, 0), a, a2}}};
}

std::array<Complex, 3> sequence_to_phase(const std::array<Complex, 3>& seq) {
    const auto a = sequence_transform();
    std::array<Complex, 3> abc{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) abc[i] += a[i][j] * seq[j];
    return abc;
}

std::array<Complex, 3> phase_to_sequence(const std::array<Complex, 3>& abc) {
    const Complex a = std::polar(1.0, 2.0 * 3.14159265358979323846 / 3.0);
    const Complex a2 = a * a;
    return {(abc[0] + abc[1] + abc[2]) / 3.0,
            (abc[0] + a * abc[1] + a2 * abc[2]) / 3.0,
            (abc[0] + a2 * abc[1] + a * abc[2]) / 3.0};
}

FaultResult compute_fault(const SequenceNetworks& networks, const Network& network,
                          const FaultSpec& spec) {
    if (spec.z_fault.real() < 0.0)
        throw Error("fault resistance must not be negative");
    FaultResult result;
    result.spec = spec;
    Complex z0, z1, z2;
    try {
        z0 = thevenin_impedance(networks.zero, spec.bus);
        z1 = thevenin_impedance(networks.positive, spec.bus);
        z2 = thevenin_impedance(networks.negative, spec.bus);
    } catch (const SingularMatrixError& e) {
        throw UngroundedSystemError(std::string("floating sequence network at bus ") +
                                    std::to_string(spec.bus) + ": " + e.what());
    }
    result.z_thevenin[0] = z0;
    result.z_thevenin[1] = z1;
    result.z_thevenin[2] = z2;

    const Complex e(spec.prefault_voltage, 0.0);
    const Complex zf = spec.z_fault;
    Complex i0(0, 0), i1(0, 0), i2(0, 0);
    switch (spec.kind) {
        case FaultKind::ThreePhase:
            i1 = e / (z1 + zf);
            break;
        case FaultKind::SingleLineToGround:
            i1 = e / (z0 + z1 + z2 + 3.0 * zf);
            i0 = i2 = i1;
            break;
        case FaultKind::LineToLine:
            i1 = e / (z1 + z2 + zf);
            i2 = -i1;
            break;
        case FaultKind::DoubleLineToGround: {
            const Complex zg = z0 + 3.0 * zf;
            i1 = e / (z1 + z2 * zg / (z2 + zg));
            const Complex v1 = e - i1 * z1;
            i2 = -v1 / z2;
            i0 = -v1 / zg;
            break;
        }
    }
    result.sequence_currents[0] = i0;
    result.sequence_currents[1] = i1;
    result.sequence_currents[2] = i2;
    result.phase_currents = sequence_to_phase({i0, i1, i2});
    const std::array<Complex, 3> vseq = {-z0 * i0, e - z1 * i1, -z2 * i2};
    result.phase_voltages = sequence_to_phase(vseq);
    result.ground_current = 3.0 * i0;

    result.base_amps = base_current_amps(network, spec.bus);
    const bool reports_phase_a =
        spec.kind == FaultKind::ThreePhase || spec.kind == FaultKind::SingleLineToGround;
    const double reported_pu =
        std::abs(reports_phase_a ? result.phase_currents[0] : result.phase_currents[1]);
    result.reported_current_amps = reported_pu * result.base_amps;
    result.ground_current_amps = std::abs(result.ground_current) * result.base_amps;
    return result;
}

BreakerCatalog BreakerCatalog::standard() {
    return BreakerCatalog{{{1250.0, "1250 A"},
                           {1600.0, "1600 A"},
                           {2000.0, "2000 A"},
                           {2500.0, "2500 A"},
                           {3150.0, "3150 A"},
                           {4000.0, "4000 A"}}};
}

BreakerCatalog BreakerCatalog::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid catalog JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("breaker catalog must be a JSON array");
    BreakerCatalog catalog;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("interrupting_amps"))
            throw ParseError("catalog entries need an \"interrupting_amps\" number");
        Entry e;
        e.interrupting_amps = entry["interrupting_amps"].get<double>();
        if (entry.contains("label")) e.label = entry["label"].get<std::string>();
        if (e.label.empty()) e.label = std::to_string(static_cast<int>(e.interrupting_amps)) + " A";
        catalog.entries.push_back(std::move(e));
    }
    std::sort(catalog.entries.begin(), catalog.entries.end(),
              [](const Entry& a, const Entry& b) { return a.interrupting_amps < b.interrupting_amps; });
    if (catalog.entries.empty()) throw ParseError("breaker catalog is empty");
    return catalog;
}

const BreakerCatalog::Entry& select_breaker(double current_amps, const BreakerCatalog& catalog) {
    for (const auto& entry : catalog.entries)
        if (entry.interrupting_amps >= current_amps) return entry;
    throw NoAdequateRatingError(current_amps);
}

}  // namespace gridflow
