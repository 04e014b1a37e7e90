#pragma once

#include <string>

#include "gridflow/fault_analysis.hpp"
#include "gridflow/post_analysis.hpp"
#include "gridflow/scenario.hpp"
#include "gridflow/ybus.hpp"

namespace gridflow {

enum class OutputFormat { Table, Csv, Json };

OutputFormat output_format_from_string(const std::string& s);

/// Fixed-width tables show degrees and MW/Mvar; Csv and Json carry full
/// precision and are byte-stable across identical runs.

std::string emit_ybus(const AdmittanceMatrix& y, OutputFormat format);

std::string emit_solution(const Network& network, const PowerFlowSolution& solution,
                          OutputFormat format);

/// Bus + branch report with totals and voltage violations.
std::string emit_report(const Network& network, const PowerFlowSolution& solution,
                        const SystemSummary& summary, const std::vector<BranchFlow>& flows,
                        OutputFormat format);

std::string emit_fault(const FaultResult& result, OutputFormat format);
std::string emit_faults(const std::vector<FaultResult>& results,
                        const std::vector<std::string>& breaker_labels, OutputFormat format);

std::string emit_scenario_report(const ScenarioReport& report, OutputFormat format);
std::string emit_scenario_reports(const std::vector<ScenarioReport>& reports,
                                  OutputFormat format);
std::string emit_tap_sweep(const TapSweepResult& result, OutputFormat format);
std::string emit_load_shed(const LoadShedResult& result, OutputFormat format);

}  // namespace gridflow
