#include "critmatrix/relation_graph.hpp"

#include <algorithm>
#include <deque>

namespace critmatrix {

std::string_view ToString(RelationKind kind) {
  switch (kind) {
    case RelationKind::kInfluence: return "influence";
    case RelationKind::kInheritance: return "inheritance";
    case RelationKind::kOverlap: return "overlap";
    case RelationKind::kSupplement: return "supplement";
  }
  return "?";
}

std::optional<RelationKind> RelationKindFromString(std::string_view text) {
  if (text == "influence") return RelationKind::kInfluence;
  if (text == "inheritance") return RelationKind::kInheritance;
  if (text == "overlap") return RelationKind::kOverlap;
  if (text == "supplement") return RelationKind::kSupplement;
  return std::nullopt;
}

FaultTraceabilityGraph::FaultTraceabilityGraph(std::vector<FaultRecord> faults,
                                               const std::vector<ContentRelation>& relations)
    : nodes_(std::move(faults)) {
  std::stable_sort(nodes_.begin(), nodes_.end(),
                   [](const FaultRecord& a, const FaultRecord& b) { return FaultIdLess(a.id, b.id); });
  for (const auto& r : relations) {
    if (r.kind == RelationKind::kSupplement) continue;
    auto source = Find(r.source);
    auto target = Find(r.target);
    if (!source) throw EndpointNotFound("no fault \"" + r.source + "\"", r.source);
    if (!target) throw EndpointNotFound("no fault \"" + r.target + "\"", r.target);
    edges_.push_back({*source, *target, r.kind});
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  out_.resize(nodes_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) out_[edges_[i].source].push_back(i);
}

FaultTraceabilityGraph FaultTraceabilityGraph::Build(const Project& project) {
  return FaultTraceabilityGraph(ExtractFaults(project), project.relations);
}

std::optional<std::size_t> FaultTraceabilityGraph::Find(std::string_view fault_id) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), fault_id,
                             [](const FaultRecord& n, std::string_view id) { return FaultIdLess(n.id, id); });
  if (it == nodes_.end() || it->id != fault_id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t FaultTraceabilityGraph::Require(std::string_view fault_id) const {
  if (auto i = Find(fault_id)) return *i;
  throw UnknownFault("no fault \"" + std::string(fault_id) + "\"", std::string(fault_id));
}

bool FaultTraceabilityGraph::operator==(const FaultTraceabilityGraph& other) const {
  if (nodes_.size() != other.nodes_.size() || edges_ != other.edges_) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id != other.nodes_[i].id || nodes_[i].probability != other.nodes_[i].probability)
      return false;
  return true;
}

std::optional<RelationIssue> CheckRelation(const Project& project, const std::vector<FaultRecord>& faults,
                                           const std::vector<ContentRelation>& existing,
                                           const ContentRelation& relation) {
  auto is_fault = [&](const std::string& id) {
    return std::any_of(faults.begin(), faults.end(), [&](const FaultRecord& f) { return f.id == id; });
  };
  auto is_guard = [&](const std::string& id) { return project.FindGuard(id) != nullptr; };
  const auto& src = relation.source;
  const auto& dst = relation.target;
  const std::string kind(ToString(relation.kind));

  if (relation.kind == RelationKind::kSupplement) {
    if (is_fault(src) && !is_guard(src))
      return RelationIssue{"KindMismatch", "supplement source \"" + src + "\" is a fault, not a guard"};
    if (!is_guard(src)) return RelationIssue{"EndpointNotFound", "no guard \"" + src + "\""};
    if (is_guard(dst) && !is_fault(dst))
      return RelationIssue{"KindMismatch", "supplement target \"" + dst + "\" is a guard, not a fault"};
    if (!is_fault(dst)) return RelationIssue{"EndpointNotFound", "no fault \"" + dst + "\""};
  } else {
    for (const auto* end : {&src, &dst}) {
      if (is_fault(*end)) continue;
      if (is_guard(*end))
        return RelationIssue{"KindMismatch", kind + " endpoint \"" + *end + "\" is a guard, not a fault"};
      return RelationIssue{"EndpointNotFound", "no fault \"" + *end + "\""};
    }
    if (src == dst) return RelationIssue{"SelfLoop", kind + " relation from \"" + src + "\" to itself"};
  }
  for (const auto& r : existing)
    if (r.kind == relation.kind && r.source == src && r.target == dst)
      return RelationIssue{"DuplicateRelation", "duplicate " + kind + " relation \"" + src + "\" -> \"" + dst + "\""};
  return std::nullopt;
}

void ThrowRelationIssue(const RelationIssue& issue) {
  if (issue.code == "EndpointNotFound") throw EndpointNotFound(issue.message);
  if (issue.code == "DuplicateRelation") throw DuplicateRelation(issue.message);
  if (issue.code == "KindMismatch") throw KindMismatch(issue.message);
  if (issue.code == "SelfLoop") throw SelfLoop(issue.message);
  throw Error(issue.code, issue.message);
}

Project AddRelation(Project project, const ContentRelation& relation) {
  if (auto issue = CheckRelation(project, ExtractFaults(project), project.relations, relation))
    ThrowRelationIssue(*issue);
  project.relations.push_back(relation);
  return project;
}

ImpactValue ComputeImpactValue(const FaultTraceabilityGraph& graph, std::string_view fault_id) {
  const std::size_t node = graph.Require(fault_id);
  ImpactValue iv;
  iv.contributing_edges = graph.OutEdges(node);
  iv.value = Decimal::FromUnits(Decimal::kUnitsPerOne / 10) * static_cast<std::int64_t>(iv.contributing_edges.size());
  return iv;
}

std::vector<std::string> PropagationScope(const FaultTraceabilityGraph& graph, std::string_view fault_id) {
  const std::size_t start = graph.Require(fault_id);
  std::vector<bool> seen(graph.nodes().size(), false);
  seen[start] = true;
  std::deque<std::size_t> queue{start};
  std::vector<std::string> scope;
  while (!queue.empty()) {
    const std::size_t node = queue.front();
    queue.pop_front();
    for (std::size_t e : graph.OutEdges(node)) {
      const std::size_t next = graph.edges()[e].target;
      if (seen[next]) continue;
      seen[next] = true;
      scope.push_back(graph.nodes()[next].id);
      queue.push_back(next);
    }
  }
  return scope;
}

std::vector<SafetyGuard> GuardCandidates(const Project& project, std::string_view fault_id) {
  const auto faults = ExtractFaults(project);
  auto it = std::find_if(faults.begin(), faults.end(), [&](const FaultRecord& f) { return f.id == fault_id; });
  if (it == faults.end()) throw UnknownFault("no fault \"" + std::string(fault_id) + "\"", std::string(fault_id));

  std::vector<SafetyGuard> out;
  for (const auto& g : project.guards) {
    bool applies = g.origin.Contains(it->source);
    for (const auto& r : project.relations)
      if (!applies && r.kind == RelationKind::kSupplement && r.source == g.id && r.target == fault_id) applies = true;
    if (applies) out.push_back(g);
  }
  return out;
}

}  // namespace critmatrix
