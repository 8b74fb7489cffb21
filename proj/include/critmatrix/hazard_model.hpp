#pragma once

/// @file hazard_model.hpp
/// Composite hazard-analysis artifacts (FTA, FMEA, ETA), the project that
/// groups them, and extraction of the project's qualified fault set.

#include <compare>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "critmatrix/decimal.hpp"
#include "critmatrix/errors.hpp"

namespace critmatrix {

enum class ArtifactKind { kFta, kFmea, kEta };

std::string_view ToString(ArtifactKind kind);  ///< "FTA" | "FMEA" | "ETA"
std::optional<ArtifactKind> ArtifactKindFromString(std::string_view text);

/// Artifact identifier such as FMEA_0.
struct ArtifactId {
  ArtifactKind kind = ArtifactKind::kFta;
  int index = 0;

  std::string ToString() const;
  /// Parses "FTA_0"; throws ParseError.
  static ArtifactId Parse(std::string_view text);

  auto operator<=>(const ArtifactId&) const = default;
};

/// Reference to one element inside an artifact:
///   FTA_0/events/<event-id>
///   FMEA_0/rows/<i>/failure_mode | FMEA_0/rows/<i>/system_effect | FMEA_0/rows/<i>
///   ETA_0/barriers/<i> | ETA_0/outcomes/<i>
struct ElementRef {
  ArtifactId artifact;
  std::string path;

  std::string ToString() const;
  static ElementRef Parse(std::string_view text);

  /// True if this reference names `other` or an element nested inside it.
  bool Contains(const ElementRef& other) const;

  auto operator<=>(const ElementRef&) const = default;
};

/// Fault identifier of the form
///   <fault_name>.[<system_name>.<KIND>_<index>][#<disambiguator>]
struct QualifiedFaultId {
  std::string fault_name;
  std::string system_name;
  ArtifactKind artifact_kind = ArtifactKind::kFta;
  int artifact_index = 0;
  std::optional<int> disambiguator;

  bool operator==(const QualifiedFaultId&) const = default;
};

std::string FormatQualifiedId(const QualifiedFaultId& id);
/// Throws GrammarError with the byte position of the first mismatch.
QualifiedFaultId ParseQualifiedId(std::string_view text);

/// Ordering used everywhere faults are listed: ASCII case-insensitive,
/// byte order as tiebreak.
bool FaultIdLess(std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------
// Artifacts

enum class Gate { kAnd, kOr };

struct FtaEvent {
  std::string id;
  std::string name;
  std::optional<Decimal> probability;
  std::optional<std::string> parent;  ///< Absent on the top event.
  std::optional<Gate> gate;           ///< Joins this event's children.
};

/// Events are stored flat with parent links; the tree shape is derived.
struct FtaTree {
  std::vector<FtaEvent> events;
};

/// Depth of every event (top event = 0), indexed like `tree.events`.
/// Events on a cycle or under a dangling parent get no level.
std::vector<std::optional<int>> FtaLevels(const FtaTree& tree);

struct FmeaRow {
  std::string item;
  std::string failure_mode;
  std::string causal_factors;
  std::string immediate_effect;
  std::string system_effect;
  Decimal probability_of_occurrence;
  std::optional<std::string> safety_guard;  ///< Guard id.
  std::optional<Decimal> probability_of_safety_guard;
};

struct FmeaTable {
  std::vector<FmeaRow> rows;
};

enum class Branch { kSuccess, kFailure };
enum class OutcomeKind { kSafe, kHazardous };

struct EtaBarrier {
  std::string name;
  Decimal success_probability;
  Decimal failure_probability;
  /// Named event on the failure branch; only named failure branches are faults.
  std::optional<std::string> failure_event;
};

struct PathStep {
  std::string barrier;
  Branch branch = Branch::kSuccess;
};

struct EtaOutcome {
  std::string name;
  OutcomeKind kind = OutcomeKind::kSafe;
  Decimal probability;
  /// Branches taken, in barrier order. Barriers not on this branch are skipped.
  std::vector<PathStep> path;
};

struct EtaTree {
  std::string initiating_event;
  Decimal initiating_probability;
  std::vector<EtaBarrier> barriers;
  std::vector<EtaOutcome> outcomes;
};

using ArtifactBody = std::variant<FtaTree, FmeaTable, EtaTree>;

struct HazardArtifact {
  ArtifactId id;
  std::string system;
  ArtifactBody body;
};

ArtifactKind BodyKind(const ArtifactBody& body);

// ---------------------------------------------------------------------------
// Project

struct SystemDecl {
  std::string name;
  std::string description;
};

enum class RelationKind { kInfluence, kInheritance, kOverlap, kSupplement };

std::string_view ToString(RelationKind kind);
std::optional<RelationKind> RelationKindFromString(std::string_view text);

/// Typed edge between artifact elements. Fault endpoints are qualified-id
/// strings; a supplement source is a guard id.
struct ContentRelation {
  RelationKind kind = RelationKind::kInfluence;
  std::string source;
  std::string target;
  std::optional<std::string> note;

  bool operator==(const ContentRelation&) const = default;
};

struct SafetyGuard {
  std::string id;
  std::string description;
  Decimal probability;
  ElementRef origin;
};

/// An accepted what-if guard assignment persisted with the project.
struct GuardAssignment {
  std::string fault;
  std::string guard;

  bool operator==(const GuardAssignment&) const = default;
};

/// ISO 26262 style severity / exposure / controllability annotation.
struct IsoAnnotation {
  std::string fault;
  int severity = 0;         ///< S0..S3
  int exposure = 0;         ///< E0..E4
  int controllability = 0;  ///< C0..C3
  std::string label;
};

struct Project {
  std::string name;
  std::vector<SystemDecl> systems;
  std::vector<HazardArtifact> artifacts;
  std::vector<ContentRelation> relations;
  std::vector<SafetyGuard> guards;
  bool preapply_fmea_guards = true;
  std::vector<GuardAssignment> assignments;
  std::vector<IsoAnnotation> iso_annotations;

  const HazardArtifact* FindArtifact(const ArtifactId& id) const;
  const SafetyGuard* FindGuard(std::string_view id) const;
  /// Position of a guard in declaration order, or npos.
  std::size_t GuardIndex(std::string_view id) const;
};

struct FaultRecord {
  QualifiedFaultId qualified_id;
  std::string id;  ///< FormatQualifiedId(qualified_id)
  std::string display_name;
  ElementRef source;
  Decimal probability;
};

// ---------------------------------------------------------------------------
// Operations

/// Checks one artifact's own invariants. Empty result iff it is well formed.
std::vector<Diagnostic> ValidateArtifact(const HazardArtifact& artifact);

/// Checks every project invariant: artifacts, names, guards, relation
/// endpoints and kinds, assignments and annotations.
std::vector<Diagnostic> ValidateProject(const Project& project);

/// One record per fault-bearing element, sorted with FaultIdLess.
/// Throws MissingProbability for a basic FTA event without a probability.
std::vector<FaultRecord> ExtractFaults(const Project& project);

/// Element text for a reference, if it resolves.
std::optional<std::string> ResolveElement(const Project& project, const ElementRef& ref);

/// Parses a project document. Throws ParseError (with line or field locus)
/// or ValidationError (listing every violation).
Project ParseProject(std::string_view json_text);
Project LoadProject(const std::filesystem::path& path);

std::string SerializeProject(const Project& project);
void SaveProject(const Project& project, const std::filesystem::path& path);

}  // namespace critmatrix
