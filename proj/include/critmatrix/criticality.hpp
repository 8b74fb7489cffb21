#pragma once

/// @file criticality.hpp
/// The Fault Criticality Matrix: per-fault criticality before and after
/// safety guards, rank bands, the guard what-if loop and its reports.
///
/// For a fault with occurrence probability P, impact value IV and applied
/// guard probabilities S1..Sn:
///
///   C  = P + IV                (criticality before guards)
///   FC = C - (S1 + ... + Sn)   (criticality after guards)
///
/// Both are ranked into seven bands with lower-exclusive, upper-inclusive
/// boundaries at 0, 0.005, 0.01, 0.15, 0.4 and 0.6. Anything above 0.6,
/// including values above 1, is Catastrophic.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "critmatrix/decimal.hpp"
#include "critmatrix/hazard_model.hpp"
#include "critmatrix/relation_graph.hpp"

namespace critmatrix {

enum class RankBand { kNoEffect, kNegligible, kLow, kMedium, kHigh, kVeryHigh, kCatastrophic };

/// Machine name, e.g. "VeryHigh".
std::string_view ToString(RankBand band);
/// Display name, e.g. "Very High".
std::string_view DisplayName(RankBand band);
std::optional<RankBand> RankBandFromString(std::string_view text);

/// P + IV. Throws DomainError unless P is in [0,1] and IV >= 0.
Decimal CriticalityBefore(Decimal probability, Decimal impact_value);

/// (P + IV) - sum(guards). May be negative. Throws DomainError on
/// out-of-range inputs.
Decimal FaultCriticality(Decimal probability, Decimal impact_value, std::span<const Decimal> guard_probabilities);

/// Total and monotone.
RankBand Rank(Decimal criticality);

struct AppliedGuard {
  std::string id;
  Decimal probability;

  bool operator==(const AppliedGuard&) const = default;
};

struct FcmRow {
  std::string fault;
  Decimal probability;
  Decimal impact_value;
  Decimal criticality_before;
  RankBand rank_before = RankBand::kNoEffect;
  std::vector<AppliedGuard> guards;  ///< In guard declaration order.
  Decimal criticality_after;
  RankBand rank_after = RankBand::kNoEffect;

  bool operator==(const FcmRow&) const = default;
};

struct Fcm {
  std::string project_name;
  int revision = 0;
  std::vector<FcmRow> rows;  ///< Sorted with FaultIdLess.

  const FcmRow* FindRow(std::string_view fault) const;
  bool operator==(const Fcm&) const = default;
};

/// One row per extracted fault. The guards column holds FMEA-declared guards
/// (when the project pre-applies them) and the project's accepted assignments.
Fcm BuildFcm(const Project& project, const FaultTraceabilityGraph& graph);
Fcm BuildFcm(const Project& project);

/// New matrix at revision + 1 with `guard` added to `fault`'s row.
/// Throws UnknownFault, UnknownGuard, GuardNotApplicable, GuardAlreadyApplied.
Fcm ApplyGuard(const Fcm& matrix, const Project& project, std::string_view fault, std::string_view guard);

/// Inverse of ApplyGuard. Throws UnknownFault, GuardNotApplied.
Fcm RemoveGuard(const Fcm& matrix, std::string_view fault, std::string_view guard);

enum class UnresolvedReason { kNoGuardAvailable, kGuardInsufficient, kPartiallyMitigated };

std::string_view ToString(UnresolvedReason reason);

struct UnresolvedFault {
  FcmRow row;
  UnresolvedReason reason = UnresolvedReason::kNoGuardAvailable;
};

/// Rows whose rank after guards is above NoEffect, ordered by rank_after
/// descending, criticality_after descending, fault id ascending.
std::vector<UnresolvedFault> UnresolvedFaults(const Fcm& matrix);

struct RankTrajectory {
  std::string fault;
  std::vector<RankBand> ranks;  ///< rank_after at each revision.
};

struct RowChange {
  std::string fault;
  Decimal criticality_after_before;
  Decimal criticality_after_after;
  RankBand rank_after_before = RankBand::kNoEffect;
  RankBand rank_after_after = RankBand::kNoEffect;
};

struct RevisionDelta {
  int revision = 0;
  std::vector<RowChange> changes;  ///< Against the previous revision.
  std::size_t unresolved = 0;
};

struct IterationReport {
  std::vector<RankTrajectory> trajectories;
  std::vector<RevisionDelta> deltas;  ///< One per revision after the first.
  bool converged = false;
  std::size_t final_unresolved = 0;
};

/// Throws EmptyHistory.
IterationReport BuildIterationReport(std::span<const Fcm> history);

struct IsoEntry {
  std::string fault;
  std::string label;
  RankBand rank_before = RankBand::kNoEffect;
  int severity = 0;
  int exposure = 0;
  int controllability = 0;
};

struct IsoInversion {
  std::string higher_severity_fault;  ///< Strictly higher S, strictly lower rank.
  std::string lower_severity_fault;
};

struct IsoReport {
  std::vector<IsoEntry> entries;
  std::vector<IsoInversion> inversions;
};

/// Compares rank_before against ISO 26262 severity. Throws UnknownFault, or
/// DomainError for levels outside S0..S3 / E0..E4 / C0..C3.
IsoReport IsoCrosscheck(const Fcm& matrix, std::span<const IsoAnnotation> annotations);

}  // namespace critmatrix
