#pragma once

#include <random>

#include "gridflow/fault_analysis.hpp"
#include "gridflow/network.hpp"

namespace gridflow::testing {

/// Connected random case: bus 1 slack, a tree of branches plus a few chords,
/// light loading so a flat start converges for most draws.
Network random_network(std::mt19937& rng, int min_buses, int max_buses);

/// Machine data on every non-PQ bus; at least one grounded machine.
SequenceData random_sequence_data(std::mt19937& rng, const Network& network);

}  // namespace gridflow::testing
