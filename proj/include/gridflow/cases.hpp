#pragma once

#include <string>

#include "gridflow/fault_analysis.hpp"
#include "gridflow/network.hpp"

namespace gridflow {

/// The embedded five-bus study case (two generators at 15 kV behind step-up
/// transformers, three 345 kV lines, heavy load at bus 2). Addressable as
/// "@glover5" wherever a case path is accepted.
const std::string& glover5_json();
Network glover5();

/// Machine sequence data and prefault voltage bundled with the glover5 fault
/// study; reproduces the bundled fault-current reference table.
SequenceData glover5_sequence_data();
double glover5_fault_prefault_voltage();  // pu, uniform profile

/// Resolve "@glover5" or a filesystem path to a parsed network.
Network load_case(const std::string& path_or_embedded);

}  // namespace gridflow
