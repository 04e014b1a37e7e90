#include "gridflow/cases.hpp"

#include <fstream>
#include <sstream>

namespace gridflow {

namespace {

// Two 15 kV generating buses behind step-up transformers, three 345 kV
// lines, 800 MW + 280 Mvar load at bus 2. Bus 3 regulates at 1.05 pu.
// Transformer zero-sequence impedances and the machine data below are the
// bundled fault-study parameters.
const char* const kGlover5Json = R"json({
  "name": "glover5",
  "s_base_mva": 100.0,
  "buses": [
    {"id": 1, "kind": "slack", "v_setpoint": 1.0, "angle_setpoint": 0.0, "base_kv": 15.0},
    {"id": 2, "kind": "pq", "p_load": 8.0, "q_load": 2.8, "base_kv": 345.0},
    {"id": 3, "kind": "pv", "v_setpoint": 1.05, "p_gen": 5.2, "p_load": 0.8, "q_load": 0.4,
     "q_gen_min": -2.8, "q_gen_max": 4.0, "base_kv": 15.0},
    {"id": 4, "kind": "pq", "base_kv": 345.0},
    {"id": 5, "kind": "pq", "base_kv": 345.0}
  ],
  "branches": [
    {"from_bus": 1, "to_bus": 5, "kind": "transformer", "r": 0.0015, "x": 0.02,
     "tap": 1.0, "mva_limit": 6.0, "r0": 0.0045, "x0": 0.06},
    {"from_bus": 3, "to_bus": 4, "kind": "transformer", "r": 0.00075, "x": 0.01,
     "tap": 1.0, "mva_limit": 10.0, "r0": 0.00225, "x0": 0.03},
    {"from_bus": 2, "to_bus": 4, "kind": "line", "r": 0.009, "x": 0.1,
     "b_charging": 1.72, "mva_limit": 12.0},
    {"from_bus": 2, "to_bus": 5, "kind": "line", "r": 0.0045, "x": 0.05,
     "b_charging": 0.88, "mva_limit": 12.0},
    {"from_bus": 4, "to_bus": 5, "kind": "line", "r": 0.00225, "x": 0.025,
     "b_charging": 0.44, "mva_limit": 12.0}
  ],
  "shunts": []
}
)json";

}  // namespace

const std::string& glover5_json() {
    static const std::string text = kGlover5Json;
    return text;
}

Network glover5() { return parse_case(glover5_json()); }

SequenceData glover5_sequence_data() {
    SequenceData data;
    data.generators.push_back({1, 0.05, 0.05, 0.05, Complex(0.0, 0.0), true});
    data.generators.push_back({3, 0.05, 0.05, 0.05, Complex(0.0, 0.0), true});
    return data;
}

double glover5_fault_prefault_voltage() { return 1.05; }

Network load_case(const std::string& path_or_embedded) {
    if (path_or_embedded == "@glover5") return glover5();
    if (!path_or_embedded.empty() && path_or_embedded.front() == '@')
        throw ParseError("unknown embedded case \"" + path_or_embedded + "\"");
    std::ifstream in(path_or_embedded, std::ios::binary);
    if (!in) throw ParseError("cannot open case file \"" + path_or_embedded + "\"");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_case(buffer.str());
}

}  // namespace gridflow
