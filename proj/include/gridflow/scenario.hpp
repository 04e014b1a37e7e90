#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridflow/network.hpp"
#include "gridflow/nr_solver.hpp"
#include "gridflow/post_analysis.hpp"

namespace gridflow {

// Declarative network edits, replayed in order against a copy of the base
// case. Each action must resolve at apply time or the whole application is
// rejected.

struct RemoveBranchAction {
    int from_bus = 0;
    int to_bus = 0;
    int circuit = 1;  // 1-based among parallel branches with the same endpoints
};
struct AddBranchAction {
    Branch branch;
};
struct AddShuntAction {
    ShuntDevice shunt;
};
struct SetShuntQAction {
    int bus = 0;
    double q_nominal = 0.0;
};
struct SetTapAction {
    int from_bus = 0;
    int to_bus = 0;
    double ratio = 1.0;
};
struct ScaleLoadAction {
    int bus = 0;
    double factor = 1.0;  // applied to both p_load and q_load
};
struct SetLoadAction {
    int bus = 0;
    double p = 0.0;
    double q = 0.0;
};

using Action = std::variant<RemoveBranchAction, AddBranchAction, AddShuntAction, SetShuntQAction,
                            SetTapAction, ScaleLoadAction, SetLoadAction>;

std::string describe(const Action& action);

/// Returns a new network; the base is never touched. Throws
/// ActionRejectedError (with the reason) on the first unresolvable action.
Network apply_actions(const Network& base, const std::vector<Action>& actions);

struct ScenarioDeltas {
    std::map<int, double> dv_by_bus;          // pu
    double dloss_mw = 0.0;
    std::map<std::size_t, double> dloading_pct_by_branch;  // by modified-case branch index
};

struct ScenarioReport {
    std::string name;
    std::vector<std::string> actions_applied;
    Network modified;
    PowerFlowSolution baseline;
    PowerFlowSolution solution;
    SystemSummary baseline_summary;
    SystemSummary summary;
    /// Present only when both the baseline and the scenario solve converged.
    std::optional<ScenarioDeltas> deltas;
};

/// Apply, re-solve, compare against the solved base case. Non-convergence of
/// either solve is an outcome captured in the report, not an error.
ScenarioReport run_scenario(const Network& base, const std::vector<Action>& actions,
                            const SolveOptions& options = {}, const std::string& name = {});

/// One run_scenario per q value (SetShuntQ on an existing shunt at the bus,
/// AddShunt otherwise), reports in input order. Sweep points are independent
/// solves and may run on `parallelism` threads; results are assembled in
/// input order either way.
std::vector<ScenarioReport> shunt_sweep(const Network& base, int bus,
                                        const std::vector<double>& q_nominal_values,
                                        const SolveOptions& options = {}, int parallelism = 1);

struct TapSweepPoint {
    std::vector<double> taps;  // one per swept transformer, sweep order
    bool converged = false;
    double v_target_bus = 0.0;
    double total_loss_mw = 0.0;
};

struct TapSweepResult {
    std::vector<std::pair<int, int>> transformers;
    std::vector<TapSweepPoint> grid;  // full exhaustive grid, row-major in tap order
    /// Minimum-loss point among those meeting the voltage target.
    std::optional<TapSweepPoint> best;
};

/// Exhaustive grid over tap combinations for the listed transformers.
TapSweepResult tap_sweep(const Network& base, const std::vector<std::pair<int, int>>& transformers,
                         double tap_min, double tap_max, double step, int target_bus,
                         double target_v, const SolveOptions& options = {}, int parallelism = 1);

struct LoadShedPoint {
    double shed_pct = 0.0;
    bool converged = false;
    double v = 0.0;
};

struct LoadShedResult {
    int bus = 0;
    double target_v = 0.0;
    std::vector<LoadShedPoint> points;
    /// Smallest shed percentage on the grid with a converged solution meeting
    /// the target; empty when even 100% shed cannot reach it (infeasible).
    std::optional<double> minimal_shed_pct;
};

/// Scales P and Q at the bus down together (constant power factor), scanning
/// shed fractions from 0 to 100% at the given step.
LoadShedResult load_shed_sweep(const Network& base, int bus, double target_v, double step_pct,
                               const SolveOptions& options = {}, int parallelism = 1);

/// Scenario document: {"name", "base_case" (path or "@glover5"), "actions":[],
/// optional "sweep", optional "solve" options}. The base network is resolved
/// by the caller (CLI) and passed in.
struct ScenarioFile {
    std::string name;
    std::string base_case;
    std::vector<Action> actions;
    struct ShuntSweepSpec {
        int bus = 0;
        std::vector<double> q_nominal_values;
    };
    struct TapSweepSpec {
        std::vector<std::pair<int, int>> transformers;
        double tap_min = 0.85, tap_max = 1.15, step = 0.01;
        int target_bus = 0;
        double target_v = 0.95;
    };
    struct LoadShedSpec {
        int bus = 0;
        double target_v = 0.95;
        double step_pct = 1.0;
    };
    std::optional<ShuntSweepSpec> shunt_sweep;
    std::optional<TapSweepSpec> tap_sweep;
    std::optional<LoadShedSpec> load_shed;
    SolveOptions solve;
};

ScenarioFile parse_scenario(const std::string& text);

}  // namespace gridflow
