#pragma once

/// @file relation_graph.hpp
/// Content relationships between artifact elements, the fault traceability
/// graph built from them, and per-fault impact values.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "critmatrix/decimal.hpp"
#include "critmatrix/hazard_model.hpp"

namespace critmatrix {

/// Directed graph over extracted faults. Holds influence, inheritance and
/// overlap edges only; supplement relations never enter the graph.
class FaultTraceabilityGraph {
 public:
  struct Edge {
    std::size_t source = 0;  ///< Node index.
    std::size_t target = 0;
    RelationKind kind = RelationKind::kInfluence;

    auto operator<=>(const Edge&) const = default;
  };

  FaultTraceabilityGraph() = default;
  FaultTraceabilityGraph(std::vector<FaultRecord> faults, const std::vector<ContentRelation>& relations);

  static FaultTraceabilityGraph Build(const Project& project);

  const std::vector<FaultRecord>& nodes() const { return nodes_; }
  /// Edges in canonical order (source, target, kind).
  const std::vector<Edge>& edges() const { return edges_; }
  /// Indices into edges() leaving `node`.
  const std::vector<std::size_t>& OutEdges(std::size_t node) const { return out_[node]; }

  std::optional<std::size_t> Find(std::string_view fault_id) const;
  /// Throws UnknownFault.
  std::size_t Require(std::string_view fault_id) const;

  bool operator==(const FaultTraceabilityGraph& other) const;

 private:
  std::vector<FaultRecord> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;
};

struct ImpactValue {
  Decimal value;
  std::vector<std::size_t> contributing_edges;  ///< Indices into edges().
};

struct RelationIssue {
  std::string code;  ///< EndpointNotFound | DuplicateRelation | KindMismatch | SelfLoop
  std::string message;
};

/// Checks `relation` against the faults and guards of `project`.
/// `existing` is scanned for duplicates; pass project.relations normally.
std::optional<RelationIssue> CheckRelation(const Project& project, const std::vector<FaultRecord>& faults,
                                           const std::vector<ContentRelation>& existing,
                                           const ContentRelation& relation);

/// Throws the typed error matching `issue.code`.
[[noreturn]] void ThrowRelationIssue(const RelationIssue& issue);

/// Returns a new project containing `relation`. Existing relations are kept.
Project AddRelation(Project project, const ContentRelation& relation);

/// 0.1 per outgoing influence / inheritance / overlap edge. Throws UnknownFault.
ImpactValue ComputeImpactValue(const FaultTraceabilityGraph& graph, std::string_view fault_id);

/// Every fault reachable from `fault_id` (excluding itself), breadth first.
std::vector<std::string> PropagationScope(const FaultTraceabilityGraph& graph, std::string_view fault_id);

/// Guards attached to the fault's source element plus guards supplied to it
/// by supplement relations; deduplicated, in guard declaration order.
std::vector<SafetyGuard> GuardCandidates(const Project& project, std::string_view fault_id);

}  // namespace critmatrix
