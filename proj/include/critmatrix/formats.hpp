#pragma once

/// @file formats.hpp
/// Text, CSV and JSON renderings shared by the CLI and the service, so both
/// emit byte-identical output for the same matrix revision. Decimals are
/// always written as strings.

#include <string>
#include <vector>

#include "critmatrix/criticality.hpp"
#include "critmatrix/platoon_sim.hpp"
#include "critmatrix/relation_graph.hpp"

namespace critmatrix {

/// Fault,P,C,Rank,SG,P(SGs),IV,FC,Rank_after. Multiple guards are joined with ';'.
std::string FcmCsv(const Fcm& matrix);
std::string FcmJson(const Fcm& matrix);
std::string FcmText(const Fcm& matrix);

std::string RowJson(const FcmRow& row);
std::string RowText(const FcmRow& row);

std::string UnresolvedJson(const Fcm& matrix);
std::string UnresolvedText(const Fcm& matrix);

std::string IterationJson(const IterationReport& report, int revision);
std::string IsoJson(const IsoReport& report, int revision);

/// Propagation scope plus the edges among {fault} and its scope.
std::string TraceJson(const FaultTraceabilityGraph& graph, const std::string& fault, int revision);
std::string CandidatesJson(const std::vector<SafetyGuard>& candidates, const FcmRow& row, int revision);

/// Summary plus per-step minimum gaps; full vehicle trace only on request.
std::string OutcomeJson(const ScenarioOutcome& outcome, bool include_trace);
std::string OutcomeText(const ScenarioOutcome& outcome);

std::string ErrorJson(const Error& error);
std::string ErrorJson(const std::string& code, const std::string& message);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string CsvField(const std::string& text);

}  // namespace critmatrix
