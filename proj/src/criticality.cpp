#include "critmatrix/criticality.hpp"

#include <algorithm>
#include <array>

namespace critmatrix {

namespace {

struct BandName {
  RankBand band;
  std::string_view name;
  std::string_view display;
};

constexpr std::array<BandName, 7> kBandNames{{
    {RankBand::kNoEffect, "NoEffect", "No Effect"},
    {RankBand::kNegligible, "Negligible", "Negligible"},
    {RankBand::kLow, "Low", "Low"},
    {RankBand::kMedium, "Medium", "Medium"},
    {RankBand::kHigh, "High", "High"},
    {RankBand::kVeryHigh, "VeryHigh", "Very High"},
    {RankBand::kCatastrophic, "Catastrophic", "Catastrophic"},
}};

// Inclusive upper bounds, in 1e-9 units, of every band below Catastrophic.
constexpr std::array<std::int64_t, 6> kUpperBounds{0, 5'000'000, 10'000'000, 150'000'000, 400'000'000,
                                                   600'000'000};

void RequireProbability(Decimal p, std::string_view what) {
  if (!IsProbability(p))
    throw DomainError(std::string(what) + " " + p.ToString() + " is outside [0, 1]", std::string(what));
}

void Recompute(FcmRow& row) {
  std::vector<Decimal> probabilities;
  for (const auto& g : row.guards) probabilities.push_back(g.probability);
  row.criticality_after = FaultCriticality(row.probability, row.impact_value, probabilities);
  row.rank_after = Rank(row.criticality_after);
}

void InsertGuard(FcmRow& row, const Project& project, const SafetyGuard& guard) {
  if (std::any_of(row.guards.begin(), row.guards.end(), [&](const AppliedGuard& g) { return g.id == guard.id; }))
    throw GuardAlreadyApplied("guard \"" + guard.id + "\" is already applied to \"" + row.fault + "\"", row.fault);
  const std::size_t index = project.GuardIndex(guard.id);
  auto pos = std::find_if(row.guards.begin(), row.guards.end(),
                          [&](const AppliedGuard& g) { return project.GuardIndex(g.id) > index; });
  row.guards.insert(pos, AppliedGuard{guard.id, guard.probability});
}

FcmRow& MutableRow(Fcm& matrix, std::string_view fault) {
  for (auto& row : matrix.rows)
    if (row.fault == fault) return row;
  throw UnknownFault("no fault \"" + std::string(fault) + "\"", std::string(fault));
}

bool IsCandidate(const std::vector<SafetyGuard>& candidates, std::string_view guard) {
  return std::any_of(candidates.begin(), candidates.end(), [&](const SafetyGuard& g) { return g.id == guard; });
}

}  // namespace

std::string_view ToString(RankBand band) { return kBandNames[static_cast<std::size_t>(band)].name; }

std::string_view DisplayName(RankBand band) { return kBandNames[static_cast<std::size_t>(band)].display; }

std::optional<RankBand> RankBandFromString(std::string_view text) {
  for (const auto& b : kBandNames)
    if (b.name == text || b.display == text) return b.band;
  return std::nullopt;
}

Decimal CriticalityBefore(Decimal probability, Decimal impact_value) {
  RequireProbability(probability, "probability");
  if (impact_value.IsNegative())
    throw DomainError("impact value " + impact_value.ToString() + " is negative", "impact_value");
  return probability + impact_value;
}

Decimal FaultCriticality(Decimal probability, Decimal impact_value, std::span<const Decimal> guard_probabilities) {
  Decimal c = CriticalityBefore(probability, impact_value);
  for (Decimal s : guard_probabilities) {
    RequireProbability(s, "guard probability");
    c -= s;
  }
  return c;
}

RankBand Rank(Decimal criticality) {
  const std::int64_t u = criticality.units();
  for (std::size_t i = 0; i < kUpperBounds.size(); ++i)
    if (u <= kUpperBounds[i]) return static_cast<RankBand>(i);
  return RankBand::kCatastrophic;
}

const FcmRow* Fcm::FindRow(std::string_view fault) const {
  for (const auto& row : rows)
    if (row.fault == fault) return &row;
  return nullptr;
}

Fcm BuildFcm(const Project& project, const FaultTraceabilityGraph& graph) {
  Fcm matrix;
  matrix.project_name = project.name;
  for (const auto& node : graph.nodes()) {
    FcmRow row;
    row.fault = node.id;
    row.probability = node.probability;
    row.impact_value = ComputeImpactValue(graph, node.id).value;
    row.criticality_before = CriticalityBefore(row.probability, row.impact_value);
    row.rank_before = Rank(row.criticality_before);
    matrix.rows.push_back(std::move(row));
  }

  if (project.preapply_fmea_guards) {
    for (const auto& artifact : project.artifacts) {
      const auto* fmea = std::get_if<FmeaTable>(&artifact.body);
      if (!fmea) continue;
      for (const auto& fmea_row : fmea->rows) {
        if (!fmea_row.safety_guard) continue;
        const SafetyGuard* guard = project.FindGuard(*fmea_row.safety_guard);
        if (!guard) throw UnknownGuard("no guard \"" + *fmea_row.safety_guard + "\"", *fmea_row.safety_guard);
        for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
          auto& row = matrix.rows[i];
          const bool present = std::any_of(row.guards.begin(), row.guards.end(),
                                           [&](const AppliedGuard& g) { return g.id == guard->id; });
          if (!present && guard->origin.Contains(graph.nodes()[i].source)) InsertGuard(row, project, *guard);
        }
      }
    }
  }

  for (const auto& a : project.assignments) {
    FcmRow& row = MutableRow(matrix, a.fault);
    const SafetyGuard* guard = project.FindGuard(a.guard);
    if (!guard) throw UnknownGuard("no guard \"" + a.guard + "\"", a.guard);
    if (!IsCandidate(GuardCandidates(project, a.fault), a.guard))
      throw GuardNotApplicable("guard \"" + a.guard + "\" is not a candidate for \"" + a.fault + "\"", a.fault);
    InsertGuard(row, project, *guard);
  }

  for (auto& row : matrix.rows) Recompute(row);
  return matrix;
}

Fcm BuildFcm(const Project& project) { return BuildFcm(project, FaultTraceabilityGraph::Build(project)); }

Fcm ApplyGuard(const Fcm& matrix, const Project& project, std::string_view fault, std::string_view guard) {
  Fcm next = matrix;
  FcmRow& row = MutableRow(next, fault);
  const SafetyGuard* g = project.FindGuard(guard);
  if (!g) throw UnknownGuard("no guard \"" + std::string(guard) + "\"", std::string(guard));
  if (!IsCandidate(GuardCandidates(project, fault), guard))
    throw GuardNotApplicable("guard \"" + g->id + "\" is not a candidate for \"" + row.fault + "\"", row.fault);
  InsertGuard(row, project, *g);
  Recompute(row);
  ++next.revision;
  return next;
}

Fcm RemoveGuard(const Fcm& matrix, std::string_view fault, std::string_view guard) {
  Fcm next = matrix;
  FcmRow& row = MutableRow(next, fault);
  auto it = std::find_if(row.guards.begin(), row.guards.end(), [&](const AppliedGuard& g) { return g.id == guard; });
  if (it == row.guards.end())
    throw GuardNotApplied("guard \"" + std::string(guard) + "\" is not applied to \"" + row.fault + "\"", row.fault);
  row.guards.erase(it);
  Recompute(row);
  ++next.revision;
  return next;
}

std::string_view ToString(UnresolvedReason reason) {
  switch (reason) {
    case UnresolvedReason::kNoGuardAvailable: return "NoGuardAvailable";
    case UnresolvedReason::kGuardInsufficient: return "GuardInsufficient";
    case UnresolvedReason::kPartiallyMitigated: return "PartiallyMitigated";
  }
  return "?";
}

std::vector<UnresolvedFault> UnresolvedFaults(const Fcm& matrix) {
  std::vector<UnresolvedFault> out;
  for (const auto& row : matrix.rows) {
    if (row.rank_after == RankBand::kNoEffect) continue;
    UnresolvedReason reason = UnresolvedReason::kPartiallyMitigated;
    if (row.guards.empty()) reason = UnresolvedReason::kNoGuardAvailable;
    else if (row.rank_after == row.rank_before) reason = UnresolvedReason::kGuardInsufficient;
    out.push_back({row, reason});
  }
  std::sort(out.begin(), out.end(), [](const UnresolvedFault& a, const UnresolvedFault& b) {
    if (a.row.rank_after != b.row.rank_after) return a.row.rank_after > b.row.rank_after;
    if (a.row.criticality_after != b.row.criticality_after)
      return a.row.criticality_after > b.row.criticality_after;
    return FaultIdLess(a.row.fault, b.row.fault);
  });
  return out;
}

IterationReport BuildIterationReport(std::span<const Fcm> history) {
  if (history.empty()) throw EmptyHistory("iteration report needs at least one matrix");
  IterationReport report;
  for (const auto& row : history.front().rows) {
    RankTrajectory t{row.fault, {}};
    for (const auto& m : history)
      if (const FcmRow* r = m.FindRow(row.fault)) t.ranks.push_back(r->rank_after);
    report.trajectories.push_back(std::move(t));
  }
  for (std::size_t k = 1; k < history.size(); ++k) {
    RevisionDelta delta;
    delta.revision = history[k].revision;
    for (const auto& row : history[k].rows) {
      const FcmRow* prev = history[k - 1].FindRow(row.fault);
      if (prev && *prev == row) continue;
      RowChange change;
      change.fault = row.fault;
      change.criticality_after_before = prev ? prev->criticality_after : row.criticality_before;
      change.rank_after_before = prev ? prev->rank_after : row.rank_before;
      change.criticality_after_after = row.criticality_after;
      change.rank_after_after = row.rank_after;
      delta.changes.push_back(std::move(change));
    }
    delta.unresolved = UnresolvedFaults(history[k]).size();
    report.deltas.push_back(std::move(delta));
  }
  report.final_unresolved = UnresolvedFaults(history.back()).size();
  report.converged = report.final_unresolved == 0;
  return report;
}

IsoReport IsoCrosscheck(const Fcm& matrix, std::span<const IsoAnnotation> annotations) {
  IsoReport report;
  for (const auto& a : annotations) {
    if (a.severity < 0 || a.severity > 3) throw DomainError("severity outside S0..S3", a.fault);
    if (a.exposure < 0 || a.exposure > 4) throw DomainError("exposure outside E0..E4", a.fault);
    if (a.controllability < 0 || a.controllability > 3) throw DomainError("controllability outside C0..C3", a.fault);
    const FcmRow* row = matrix.FindRow(a.fault);
    if (!row) throw UnknownFault("no fault \"" + a.fault + "\"", a.fault);
    report.entries.push_back({a.fault, a.label, row->rank_before, a.severity, a.exposure, a.controllability});
  }
  for (const auto& hi : report.entries)
    for (const auto& lo : report.entries)
      if (hi.severity > lo.severity && hi.rank_before < lo.rank_before)
        report.inversions.push_back({hi.fault, lo.fault});
  return report;
}

}  // namespace critmatrix
