#include "critmatrix/formats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json_util.hpp"

namespace critmatrix {

namespace {

using detail::json;

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

json RowObject(const FcmRow& row) {
  json guards = json::array();
  for (const auto& g : row.guards) guards.push_back({{"id", g.id}, {"probability", g.probability.ToString()}});
  return {{"fault", row.fault},
          {"probability", row.probability.ToString()},
          {"impact_value", row.impact_value.ToString()},
          {"criticality_before", row.criticality_before.ToString()},
          {"rank_before", ToString(row.rank_before)},
          {"guards", std::move(guards)},
          {"criticality_after", row.criticality_after.ToString()},
          {"rank_after", ToString(row.rank_after)}};
}

template <typename F>
std::string JoinGuards(const FcmRow& row, F field) {
  std::string out;
  for (std::size_t i = 0; i < row.guards.size(); ++i) {
    if (i) out += ';';
    out += field(row.guards[i]);
  }
  return out;
}

std::string GuardIds(const FcmRow& row) {
  return JoinGuards(row, [](const AppliedGuard& g) { return g.id; });
}

std::string GuardProbabilities(const FcmRow& row) {
  return JoinGuards(row, [](const AppliedGuard& g) { return g.probability.ToString(); });
}

// Infinite gaps (no two objects in a lane) have no JSON number.
json Gap(double gap) { return std::isfinite(gap) ? json(gap) : json(nullptr); }

std::string FormatGap(double gap) {
  if (!std::isfinite(gap)) return "none";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f m", gap);
  return buf;
}

}  // namespace

std::string CsvField(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string FcmCsv(const Fcm& matrix) {
  std::string out = "Fault,P,C,Rank,SG,P(SGs),IV,FC,Rank_after\n";
  for (const auto& row : matrix.rows) {
    const std::string fields[] = {row.fault,
                                  row.probability.ToString(),
                                  row.criticality_before.ToString(),
                                  std::string(ToString(row.rank_before)),
                                  GuardIds(row),
                                  GuardProbabilities(row),
                                  row.impact_value.ToString(),
                                  row.criticality_after.ToString(),
                                  std::string(ToString(row.rank_after))};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out += ',';
      out += CsvField(fields[i]);
    }
    out += '\n';
  }
  return out;
}

std::string FcmJson(const Fcm& matrix) {
  json rows = json::array();
  for (const auto& row : matrix.rows) rows.push_back(RowObject(row));
  return Dump({{"project", matrix.project_name}, {"revision", matrix.revision}, {"rows", std::move(rows)}});
}

std::string FcmText(const Fcm& matrix) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Fault", "P", "C", "Rank", "Safety guards", "P(SGs)", "IV", "FC", "Rank after"});
  for (const auto& row : matrix.rows)
    cells.push_back({row.fault, row.probability.ToString(), row.criticality_before.ToString(),
                     std::string(DisplayName(row.rank_before)), GuardIds(row), GuardProbabilities(row),
                     row.impact_value.ToString(), row.criticality_after.ToString(),
                     std::string(DisplayName(row.rank_after))});
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());

  std::string out = matrix.project_name + " (revision " + std::to_string(matrix.revision) + ")\n";
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) {
      text += line[i];
      if (i + 1 < line.size()) text += std::string(width[i] - line[i].size() + 2, ' ');
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + '\n';
  }
  return out;
}

std::string RowJson(const FcmRow& row) { return Dump(RowObject(row)); }

std::string RowText(const FcmRow& row) {
  std::string guards = GuardIds(row);
  return row.fault + "\n  P " + row.probability.ToString() + "  IV " + row.impact_value.ToString() + "  C " +
         row.criticality_before.ToString() + " (" + std::string(DisplayName(row.rank_before)) + ")\n  guards: " +
         (guards.empty() ? "none" : guards + " [" + GuardProbabilities(row) + "]") + "\n  FC " +
         row.criticality_after.ToString() + " (" + std::string(DisplayName(row.rank_after)) + ")\n";
}

std::string UnresolvedJson(const Fcm& matrix) {
  json list = json::array();
  for (const auto& u : UnresolvedFaults(matrix)) {
    json entry = RowObject(u.row);
    entry["reason"] = ToString(u.reason);
    list.push_back(std::move(entry));
  }
  return Dump({{"revision", matrix.revision}, {"unresolved", std::move(list)}});
}

std::string UnresolvedText(const Fcm& matrix) {
  const auto list = UnresolvedFaults(matrix);
  std::string out = std::to_string(list.size()) + " unresolved fault(s)\n";
  for (const auto& u : list)
    out += "  " + std::string(DisplayName(u.row.rank_after)) + "  " + u.row.criticality_after.ToString() + "  " +
           u.row.fault + "  [" + std::string(ToString(u.reason)) + "]\n";
  return out;
}

std::string IterationJson(const IterationReport& report, int revision) {
  json trajectories = json::array();
  for (const auto& t : report.trajectories) {
    json ranks = json::array();
    for (RankBand r : t.ranks) ranks.push_back(ToString(r));
    trajectories.push_back({{"fault", t.fault}, {"ranks", std::move(ranks)}});
  }
  json deltas = json::array();
  for (const auto& d : report.deltas) {
    json changes = json::array();
    for (const auto& c : d.changes)
      changes.push_back({{"fault", c.fault},
                         {"criticality_after", {c.criticality_after_before.ToString(), c.criticality_after_after.ToString()}},
                         {"rank_after", {ToString(c.rank_after_before), ToString(c.rank_after_after)}}});
    deltas.push_back({{"revision", d.revision}, {"changes", std::move(changes)}, {"unresolved", d.unresolved}});
  }
  return Dump({{"revision", revision},
               {"converged", report.converged},
               {"final_unresolved", report.final_unresolved},
               {"trajectories", std::move(trajectories)},
               {"deltas", std::move(deltas)}});
}

std::string IsoJson(const IsoReport& report, int revision) {
  json entries = json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"fault", e.fault},
                       {"label", e.label},
                       {"rank_before", ToString(e.rank_before)},
                       {"severity", "S" + std::to_string(e.severity)},
                       {"exposure", "E" + std::to_string(e.exposure)},
                       {"controllability", "C" + std::to_string(e.controllability)}});
  json inversions = json::array();
  for (const auto& i : report.inversions)
    inversions.push_back({{"higher_severity_fault", i.higher_severity_fault},
                          {"lower_severity_fault", i.lower_severity_fault}});
  return Dump({{"revision", revision}, {"entries", std::move(entries)}, {"inversions", std::move(inversions)}});
}

std::string TraceJson(const FaultTraceabilityGraph& graph, const std::string& fault, int revision) {
  const auto scope = PropagationScope(graph, fault);
  std::vector<bool> member(graph.nodes().size(), false);
  member[graph.Require(fault)] = true;
  for (const auto& id : scope) member[*graph.Find(id)] = true;
  json edges = json::array();
  for (const auto& e : graph.edges())
    if (member[e.source])
      edges.push_back({{"source", graph.nodes()[e.source].id},
                       {"target", graph.nodes()[e.target].id},
                       {"kind", ToString(e.kind)}});
  return Dump({{"revision", revision}, {"fault", fault}, {"scope", scope}, {"edges", std::move(edges)}});
}

std::string CandidatesJson(const std::vector<SafetyGuard>& candidates, const FcmRow& row, int revision) {
  json list = json::array();
  for (const auto& g : candidates) {
    const bool applied =
        std::any_of(row.guards.begin(), row.guards.end(), [&](const AppliedGuard& a) { return a.id == g.id; });
    list.push_back({{"id", g.id},
                    {"description", g.description},
                    {"probability", g.probability.ToString()},
                    {"applied", applied}});
  }
  return Dump({{"revision", revision}, {"fault", row.fault}, {"candidates", std::move(list)}});
}

std::string OutcomeJson(const ScenarioOutcome& outcome, bool include_trace) {
  json first = nullptr;
  if (outcome.first_collision)
    first = {{"time", outcome.first_collision->time},
             {"rear", outcome.first_collision->rear},
             {"front", outcome.first_collision->front}};
  json series = json::array();
  json events = json::array();
  for (const auto& step : outcome.trace) {
    series.push_back({step.time, Gap(step.min_gap)});
    for (const auto& f : step.fired) events.push_back({{"time", step.time}, {"event", f}});
  }
  json j = {{"collision", outcome.collision},
            {"first_collision", std::move(first)},
            {"min_gap", Gap(outcome.min_gap)},
            {"steps", outcome.trace.size()},
            {"min_gap_series", std::move(series)},
            {"events", std::move(events)},
            {"redundant_bindings", outcome.redundant_bindings}};
  if (include_trace) {
    json trace = json::array();
    for (const auto& step : outcome.trace) {
      json vehicles = json::array();
      for (const auto& v : step.vehicles)
        vehicles.push_back({{"id", v.id},
                            {"lane", v.lane},
                            {"position", v.position},
                            {"speed", v.speed},
                            {"acceleration", v.acceleration},
                            {"mode", ToString(v.mode)}});
      trace.push_back({{"time", step.time}, {"vehicles", std::move(vehicles)}});
    }
    j["trace"] = std::move(trace);
  }
  return Dump(j);
}

std::string OutcomeText(const ScenarioOutcome& outcome) {
  std::string out;
  if (outcome.collision) {
    const auto& c = *outcome.first_collision;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f s", c.time);
    out += "COLLISION at " + std::string(buf) + ": " + c.rear + " hit " + c.front + "\n";
  } else {
    out += "SAFE\n";
  }
  out += "min gap: " + FormatGap(outcome.min_gap) + "\n";
  out += "steps: " + std::to_string(outcome.trace.size()) + "\n";
  for (const auto& f : outcome.redundant_bindings)
    out += "note: binding for " + f + " is redundant (rank after guards is No Effect)\n";
  return out;
}

std::string ErrorJson(const Error& error) {
  json j = {{"code", error.code()}, {"message", error.what()}};
  if (!error.locus().empty()) j["locus"] = error.locus();
  if (const auto* v = dynamic_cast<const ValidationError*>(&error)) {
    json list = json::array();
    for (const auto& d : v->diagnostics()) list.push_back({{"path", d.path}, {"message", d.message}});
    j["diagnostics"] = std::move(list);
  }
  return Dump(j);
}

std::string ErrorJson(const std::string& code, const std::string& message) {
  return Dump({{"code", code}, {"message", message}});
}

}  // namespace critmatrix
