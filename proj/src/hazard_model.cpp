#include "critmatrix/hazard_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "critmatrix/relation_graph.hpp"
#include "json_util.hpp"

namespace critmatrix {

namespace {

bool AllDigits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool CanonicalInteger(std::string_view s) { return AllDigits(s) && (s.size() == 1 || s.front() != '0'); }

int ToInt(std::string_view s) {
  int value = 0;
  for (char c : s) value = value * 10 + (c - '0');
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Identifiers

std::string_view ToString(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::kFta: return "FTA";
    case ArtifactKind::kFmea: return "FMEA";
    case ArtifactKind::kEta: return "ETA";
  }
  return "?";
}

std::optional<ArtifactKind> ArtifactKindFromString(std::string_view text) {
  if (text == "FTA") return ArtifactKind::kFta;
  if (text == "FMEA") return ArtifactKind::kFmea;
  if (text == "ETA") return ArtifactKind::kEta;
  return std::nullopt;
}

std::string ArtifactId::ToString() const {
  return std::string(critmatrix::ToString(kind)) + "_" + std::to_string(index);
}

ArtifactId ArtifactId::Parse(std::string_view text) {
  const auto underscore = text.rfind('_');
  if (underscore == std::string_view::npos)
    throw ParseError("artifact id \"" + std::string(text) + "\" is not of the form KIND_index");
  auto kind = ArtifactKindFromString(text.substr(0, underscore));
  const auto digits = text.substr(underscore + 1);
  if (!kind || !CanonicalInteger(digits) || digits.size() > 9)
    throw ParseError("artifact id \"" + std::string(text) + "\" is not of the form KIND_index");
  return ArtifactId{*kind, ToInt(digits)};
}

std::string ElementRef::ToString() const { return artifact.ToString() + "/" + path; }

ElementRef ElementRef::Parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos || slash + 1 >= text.size())
    throw ParseError("element reference \"" + std::string(text) + "\" is not of the form KIND_index/path");
  return ElementRef{ArtifactId::Parse(text.substr(0, slash)), std::string(text.substr(slash + 1))};
}

bool ElementRef::Contains(const ElementRef& other) const {
  if (artifact != other.artifact) return false;
  if (path == other.path) return true;
  return other.path.size() > path.size() && other.path.compare(0, path.size(), path) == 0 &&
         other.path[path.size()] == '/';
}

std::string FormatQualifiedId(const QualifiedFaultId& id) {
  std::string out = id.fault_name;
  out += ".[";
  out += id.system_name;
  out += '.';
  out += ToString(id.artifact_kind);
  out += '_';
  out += std::to_string(id.artifact_index);
  out += ']';
  if (id.disambiguator) out += "#" + std::to_string(*id.disambiguator);
  return out;
}

QualifiedFaultId ParseQualifiedId(std::string_view text) {
  const auto open = text.find(".[");
  if (open == std::string_view::npos) throw GrammarError("expected \".[\" after the fault name", text.size());
  if (open == 0) throw GrammarError("empty fault name", 0);
  const std::size_t inner_begin = open + 2;
  const auto close = text.find(']', inner_begin);
  if (close == std::string_view::npos) throw GrammarError("expected \"]\"", text.size());

  const auto inner = text.substr(inner_begin, close - inner_begin);
  const auto dot = inner.rfind('.');
  if (dot == std::string_view::npos) throw GrammarError("expected \".\" before the artifact kind", close);
  if (dot == 0) throw GrammarError("empty system name", inner_begin);
  const auto kind_index = inner.substr(dot + 1);
  const std::size_t kind_begin = inner_begin + dot + 1;
  const auto underscore = kind_index.rfind('_');
  if (underscore == std::string_view::npos) throw GrammarError("expected \"_\" before the artifact index", close);
  const auto kind_text = kind_index.substr(0, underscore);
  auto kind = ArtifactKindFromString(kind_text);
  if (!kind) throw GrammarError("unknown artifact kind \"" + std::string(kind_text) + "\"", kind_begin);
  const auto index_text = kind_index.substr(underscore + 1);
  if (!CanonicalInteger(index_text) || index_text.size() > 9)
    throw GrammarError("artifact index must be a base-10 integer without leading zeros",
                       kind_begin + underscore + 1);

  QualifiedFaultId id;
  id.fault_name = std::string(text.substr(0, open));
  id.system_name = std::string(inner.substr(0, dot));
  id.artifact_kind = *kind;
  id.artifact_index = ToInt(index_text);

  const auto rest = text.substr(close + 1);
  if (!rest.empty()) {
    if (rest.front() != '#') throw GrammarError("unexpected text after \"]\"", close + 1);
    const auto digits = rest.substr(1);
    if (!CanonicalInteger(digits) || digits.size() > 9 || digits == "0")
      throw GrammarError("disambiguator must be a positive integer without leading zeros", close + 2);
    id.disambiguator = ToInt(digits);
  }
  return id;
}

bool FaultIdLess(std::string_view a, std::string_view b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int ca = std::tolower(static_cast<unsigned char>(a[i]));
    const int cb = std::tolower(static_cast<unsigned char>(b[i]));
    if (ca != cb) return ca < cb;
  }
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

// ---------------------------------------------------------------------------
// Artifacts

ArtifactKind BodyKind(const ArtifactBody& body) {
  switch (body.index()) {
    case 0: return ArtifactKind::kFta;
    case 1: return ArtifactKind::kFmea;
    default: return ArtifactKind::kEta;
  }
}

std::vector<std::optional<int>> FtaLevels(const FtaTree& tree) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < tree.events.size(); ++i) by_id.emplace(tree.events[i].id, i);

  std::vector<std::optional<int>> levels(tree.events.size());
  for (std::size_t i = 0; i < tree.events.size(); ++i) {
    int depth = 0;
    std::size_t current = i;
    bool ok = true;
    while (tree.events[current].parent) {
      auto it = by_id.find(*tree.events[current].parent);
      if (it == by_id.end() || ++depth > static_cast<int>(tree.events.size())) {
        ok = false;
        break;
      }
      current = it->second;
    }
    if (ok) levels[i] = depth;
  }
  return levels;
}

namespace {

std::string Prefixed(const ArtifactId& id, const std::string& rest) { return id.ToString() + "/" + rest; }

void CheckProbability(std::vector<Diagnostic>& out, const std::string& path, Decimal value) {
  if (!IsProbability(value))
    out.push_back({path, "probability " + value.ToString() + " is outside [0, 1]"});
}

void ValidateFta(const ArtifactId& id, const FtaTree& tree, std::vector<Diagnostic>& out) {
  std::set<std::string> seen;
  std::set<std::string> with_children;
  for (const auto& e : tree.events)
    if (e.parent) with_children.insert(*e.parent);

  std::size_t tops = 0;
  for (std::size_t i = 0; i < tree.events.size(); ++i) {
    const auto& e = tree.events[i];
    const std::string path = Prefixed(id, "events/" + (e.id.empty() ? std::to_string(i) : e.id));
    if (e.id.empty()) out.push_back({path, "event id is empty"});
    if (!seen.insert(e.id).second) out.push_back({path, "duplicate event id \"" + e.id + "\""});
    if (!e.parent) ++tops;
    if (e.probability) CheckProbability(out, path + "/probability", *e.probability);
    const bool leaf = !with_children.count(e.id);
    if (leaf && !e.probability) out.push_back({path + "/probability", "basic event has no probability"});
    if (!leaf && !e.gate) out.push_back({path + "/gate", "event with children has no gate"});
  }
  if (tree.events.empty()) {
    out.push_back({Prefixed(id, "events"), "fault tree has no events"});
  } else if (tops != 1) {
    out.push_back({Prefixed(id, "events"),
                   "expected exactly one top event, found " + std::to_string(tops)});
  }

  const auto levels = FtaLevels(tree);
  for (std::size_t i = 0; i < tree.events.size(); ++i) {
    const auto& e = tree.events[i];
    if (levels[i] || !e.parent) continue;
    const bool dangling = !seen.count(*e.parent);
    out.push_back({Prefixed(id, "events/" + e.id + "/parent"),
                   dangling ? "parent \"" + *e.parent + "\" does not exist" : "event lies on a parent cycle"});
  }
}

void ValidateFmea(const ArtifactId& id, const FmeaTable& table, std::vector<Diagnostic>& out) {
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string path = Prefixed(id, "rows/" + std::to_string(i));
    if (row.failure_mode.empty()) out.push_back({path + "/failure_mode", "failure mode is empty"});
    CheckProbability(out, path + "/probability_of_occurrence", row.probability_of_occurrence);
    if (row.probability_of_safety_guard)
      CheckProbability(out, path + "/probability_of_safety_guard", *row.probability_of_safety_guard);
    if (row.safety_guard.has_value() != row.probability_of_safety_guard.has_value())
      out.push_back({path + "/safety_guard",
                     "safety_guard and probability_of_safety_guard must be given together"});
  }
}

using boost::multiprecision::cpp_int;

// Exact rational product check; denominators are powers of 1e9.
bool OutcomeMatches(Decimal stated, Decimal initiating, const std::vector<Decimal>& factors) {
  cpp_int numerator = initiating.units();
  cpp_int denominator = Decimal::kUnitsPerOne;
  for (Decimal f : factors) {
    numerator *= f.units();
    denominator *= Decimal::kUnitsPerOne;
  }
  // |stated - numerator/denominator| <= 1e-9  <=>  |stated*den - num| <= den/1e9
  cpp_int lhs = cpp_int(stated.units()) * denominator / Decimal::kUnitsPerOne - numerator;
  if (lhs < 0) lhs = -lhs;
  return lhs * Decimal::kUnitsPerOne <= denominator;
}

void ValidateEta(const ArtifactId& id, const EtaTree& tree, std::vector<Diagnostic>& out) {
  CheckProbability(out, Prefixed(id, "initiating_event/probability"), tree.initiating_probability);
  std::map<std::string, std::size_t> barrier_index;
  for (std::size_t i = 0; i < tree.barriers.size(); ++i) {
    const auto& b = tree.barriers[i];
    const std::string path = Prefixed(id, "barriers/" + std::to_string(i));
    if (!barrier_index.emplace(b.name, i).second)
      out.push_back({path, "duplicate barrier name \"" + b.name + "\""});
    CheckProbability(out, path + "/success", b.success_probability);
    CheckProbability(out, path + "/failure", b.failure_probability);
    const Decimal sum = b.success_probability + b.failure_probability;
    const auto deviation = (sum - Decimal::FromInt(1)).units();
    if (deviation > 1 || deviation < -1)  // tolerance 1e-9
      out.push_back({path, "branch probabilities sum to " + sum.ToString() + ", not 1"});
  }

  for (std::size_t i = 0; i < tree.outcomes.size(); ++i) {
    const auto& o = tree.outcomes[i];
    const std::string path = Prefixed(id, "outcomes/" + std::to_string(i));
    CheckProbability(out, path + "/probability", o.probability);
    std::vector<Decimal> factors;
    std::optional<std::size_t> previous;
    bool path_ok = true;
    for (const auto& step : o.path) {
      auto it = barrier_index.find(step.barrier);
      if (it == barrier_index.end()) {
        out.push_back({path + "/path", "unknown barrier \"" + step.barrier + "\""});
        path_ok = false;
        break;
      }
      if (previous && it->second <= *previous) {
        out.push_back({path + "/path", "path does not follow barrier order at \"" + step.barrier + "\""});
        path_ok = false;
        break;
      }
      previous = it->second;
      const auto& b = tree.barriers[it->second];
      factors.push_back(step.branch == Branch::kSuccess ? b.success_probability : b.failure_probability);
    }
    if (path_ok && !OutcomeMatches(o.probability, tree.initiating_probability, factors))
      out.push_back({path + "/probability", "outcome probability " + o.probability.ToString() +
                                                " differs from the product of its path branches"});
  }
}

}  // namespace

std::vector<Diagnostic> ValidateArtifact(const HazardArtifact& artifact) {
  std::vector<Diagnostic> out;
  if (BodyKind(artifact.body) != artifact.id.kind)
    out.push_back({artifact.id.ToString(), "body kind " + std::string(ToString(BodyKind(artifact.body))) +
                                               " does not match the artifact id"});
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, FtaTree>) ValidateFta(artifact.id, body, out);
        else if constexpr (std::is_same_v<T, FmeaTable>) ValidateFmea(artifact.id, body, out);
        else ValidateEta(artifact.id, body, out);
      },
      artifact.body);
  return out;
}

// ---------------------------------------------------------------------------
// Project

const HazardArtifact* Project::FindArtifact(const ArtifactId& id) const {
  for (const auto& a : artifacts)
    if (a.id == id) return &a;
  return nullptr;
}

const SafetyGuard* Project::FindGuard(std::string_view id) const {
  for (const auto& g : guards)
    if (g.id == id) return &g;
  return nullptr;
}

std::size_t Project::GuardIndex(std::string_view id) const {
  for (std::size_t i = 0; i < guards.size(); ++i)
    if (guards[i].id == id) return i;
  return std::string::npos;
}

std::optional<std::string> ResolveElement(const Project& project, const ElementRef& ref) {
  const HazardArtifact* artifact = project.FindArtifact(ref.artifact);
  if (!artifact) return std::nullopt;

  std::vector<std::string> parts;
  std::stringstream ss(ref.path);
  for (std::string part; std::getline(ss, part, '/');) parts.push_back(part);
  auto index_of = [](const std::string& s) -> std::optional<std::size_t> {
    if (!CanonicalInteger(s) || s.size() > 9) return std::nullopt;
    return static_cast<std::size_t>(ToInt(s));
  };

  if (const auto* fta = std::get_if<FtaTree>(&artifact->body)) {
    if (parts.size() != 2 || parts[0] != "events") return std::nullopt;
    for (const auto& e : fta->events)
      if (e.id == parts[1]) return e.name;
    return std::nullopt;
  }
  if (const auto* fmea = std::get_if<FmeaTable>(&artifact->body)) {
    if (parts.size() < 2 || parts.size() > 3 || parts[0] != "rows") return std::nullopt;
    auto i = index_of(parts[1]);
    if (!i || *i >= fmea->rows.size()) return std::nullopt;
    const auto& row = fmea->rows[*i];
    if (parts.size() == 2) return row.item;
    if (parts[2] == "failure_mode") return row.failure_mode;
    if (parts[2] == "system_effect") return row.system_effect;
    if (parts[2] == "immediate_effect") return row.immediate_effect;
    return std::nullopt;
  }
  const auto& eta = std::get<EtaTree>(artifact->body);
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  auto i = index_of(parts[1]);
  if (!i) return std::nullopt;
  if (parts[0] == "barriers" && *i < eta.barriers.size()) {
    if (parts.size() == 2) return eta.barriers[*i].name;
    if (parts[2] == "failure" && eta.barriers[*i].failure_event) return *eta.barriers[*i].failure_event;
    return std::nullopt;
  }
  if (parts[0] == "outcomes" && *i < eta.outcomes.size() && parts.size() == 2) return eta.outcomes[*i].name;
  return std::nullopt;
}

namespace {

struct RawFault {
  std::string name;
  ElementRef source;
  std::optional<Decimal> probability;
  bool required = true;  // false for intermediate FTA events
};

std::vector<RawFault> RawFaults(const HazardArtifact& artifact) {
  std::vector<RawFault> out;
  const ArtifactId& id = artifact.id;
  if (const auto* fta = std::get_if<FtaTree>(&artifact.body)) {
    std::set<std::string> with_children;
    for (const auto& e : fta->events)
      if (e.parent) with_children.insert(*e.parent);
    for (const auto& e : fta->events)
      out.push_back({e.name, ElementRef{id, "events/" + e.id}, e.probability, !with_children.count(e.id)});
  } else if (const auto* fmea = std::get_if<FmeaTable>(&artifact.body)) {
    for (std::size_t i = 0; i < fmea->rows.size(); ++i) {
      const auto& row = fmea->rows[i];
      const std::string base = "rows/" + std::to_string(i);
      if (!row.failure_mode.empty())
        out.push_back({row.failure_mode, ElementRef{id, base + "/failure_mode"}, row.probability_of_occurrence});
      if (!row.system_effect.empty())
        out.push_back({row.system_effect, ElementRef{id, base + "/system_effect"}, row.probability_of_occurrence});
    }
  } else {
    const auto& eta = std::get<EtaTree>(artifact.body);
    for (std::size_t i = 0; i < eta.barriers.size(); ++i) {
      const auto& b = eta.barriers[i];
      if (b.failure_event)
        out.push_back({*b.failure_event, ElementRef{id, "barriers/" + std::to_string(i) + "/failure"},
                       b.failure_probability});
    }
    for (std::size_t i = 0; i < eta.outcomes.size(); ++i) {
      const auto& o = eta.outcomes[i];
      if (o.kind == OutcomeKind::kHazardous)
        out.push_back({o.name, ElementRef{id, "outcomes/" + std::to_string(i)}, o.probability});
    }
  }
  return out;
}

// Missing probabilities are reported through `missing` when given, thrown otherwise.
std::vector<FaultRecord> CollectFaults(const Project& project, std::vector<Diagnostic>* missing) {
  std::vector<FaultRecord> faults;
  for (const auto& artifact : project.artifacts) {
    std::map<std::string, int> occurrences;
    for (auto& raw : RawFaults(artifact)) {
      if (!raw.probability) {
        if (!raw.required) continue;
        const std::string locus = raw.source.ToString();
        if (!missing) throw MissingProbability("fault \"" + raw.name + "\" has no probability", locus);
        missing->push_back({locus, "fault \"" + raw.name + "\" has no probability"});
        continue;
      }
      FaultRecord record;
      record.qualified_id.fault_name = raw.name;
      record.qualified_id.system_name = artifact.system;
      record.qualified_id.artifact_kind = artifact.id.kind;
      record.qualified_id.artifact_index = artifact.id.index;
      const int n = ++occurrences[raw.name];
      if (n > 1) record.qualified_id.disambiguator = n;
      record.id = FormatQualifiedId(record.qualified_id);
      record.display_name = raw.name;
      record.source = std::move(raw.source);
      record.probability = *raw.probability;
      faults.push_back(std::move(record));
    }
  }
  std::stable_sort(faults.begin(), faults.end(),
                   [](const FaultRecord& a, const FaultRecord& b) { return FaultIdLess(a.id, b.id); });
  return faults;
}

bool BreaksGrammar(const std::string& name) {
  return name.find('[') != std::string::npos || name.find(']') != std::string::npos;
}

}  // namespace

std::vector<FaultRecord> ExtractFaults(const Project& project) { return CollectFaults(project, nullptr); }

std::vector<Diagnostic> ValidateProject(const Project& project) {
  std::vector<Diagnostic> out;

  std::set<std::string> systems;
  for (std::size_t i = 0; i < project.systems.size(); ++i) {
    const auto& s = project.systems[i];
    if (s.name.empty()) out.push_back({"systems/" + std::to_string(i), "system name is empty"});
    if (!systems.insert(s.name).second)
      out.push_back({"systems/" + std::to_string(i), "duplicate system name \"" + s.name + "\""});
    if (BreaksGrammar(s.name) || s.name.find(".[") != std::string::npos)
      out.push_back({"systems/" + std::to_string(i), "system name may not contain '[' or ']'"});
  }

  std::set<ArtifactId> ids;
  for (const auto& a : project.artifacts) {
    if (!ids.insert(a.id).second) out.push_back({a.id.ToString(), "duplicate artifact id"});
    if (!systems.count(a.system))
      out.push_back({a.id.ToString() + "/system", "undeclared system \"" + a.system + "\""});
    for (auto& d : ValidateArtifact(a)) out.push_back(std::move(d));
  }

  std::set<std::string> guard_ids;
  for (std::size_t i = 0; i < project.guards.size(); ++i) {
    const auto& g = project.guards[i];
    const std::string path = "guards/" + std::to_string(i);
    if (g.id.empty()) out.push_back({path, "guard id is empty"});
    if (!guard_ids.insert(g.id).second) out.push_back({path, "duplicate guard id \"" + g.id + "\""});
    CheckProbability(out, path + "/probability", g.probability);
    if (!ResolveElement(project, g.origin))
      out.push_back({path + "/origin", "origin " + g.origin.ToString() + " does not resolve"});
  }

  for (const auto& a : project.artifacts) {
    const auto* fmea = std::get_if<FmeaTable>(&a.body);
    if (!fmea) continue;
    for (std::size_t i = 0; i < fmea->rows.size(); ++i) {
      const auto& row = fmea->rows[i];
      if (!row.safety_guard) continue;
      const std::string path = a.id.ToString() + "/rows/" + std::to_string(i) + "/safety_guard";
      const SafetyGuard* g = project.FindGuard(*row.safety_guard);
      if (!g) {
        out.push_back({path, "unknown guard \"" + *row.safety_guard + "\""});
        continue;
      }
      if (!ElementRef{a.id, "rows/" + std::to_string(i)}.Contains(g->origin))
        out.push_back({path, "guard \"" + g->id + "\" originates at " + g->origin.ToString() +
                                 ", outside this row"});
      if (row.probability_of_safety_guard && *row.probability_of_safety_guard != g->probability)
        out.push_back({path, "row guard probability " + row.probability_of_safety_guard->ToString() +
                                 " differs from guard \"" + g->id + "\" (" + g->probability.ToString() + ")"});
    }
  }

  const auto faults = CollectFaults(project, &out);
  for (const auto& f : faults)
    if (BreaksGrammar(f.display_name) || f.display_name.find(".[") != std::string::npos)
      out.push_back({f.source.ToString(), "fault name may not contain '[' or ']'"});

  std::vector<ContentRelation> accepted;
  for (std::size_t i = 0; i < project.relations.size(); ++i) {
    const auto& r = project.relations[i];
    if (auto issue = CheckRelation(project, faults, accepted, r))
      out.push_back({"relations/" + std::to_string(i), issue->code + ": " + issue->message});
    accepted.push_back(r);
  }

  std::set<std::string> fault_ids;
  for (const auto& f : faults) fault_ids.insert(f.id);
  for (std::size_t i = 0; i < project.assignments.size(); ++i) {
    const auto& as = project.assignments[i];
    const std::string path = "assignments/" + std::to_string(i);
    if (!fault_ids.count(as.fault)) out.push_back({path + "/fault", "unknown fault \"" + as.fault + "\""});
    if (!guard_ids.count(as.guard)) out.push_back({path + "/guard", "unknown guard \"" + as.guard + "\""});
  }
  for (std::size_t i = 0; i < project.iso_annotations.size(); ++i) {
    const auto& an = project.iso_annotations[i];
    const std::string path = "iso_annotations/" + std::to_string(i);
    if (!fault_ids.count(an.fault)) out.push_back({path + "/fault", "unknown fault \"" + an.fault + "\""});
    if (an.severity < 0 || an.severity > 3) out.push_back({path + "/severity", "severity outside S0..S3"});
    if (an.exposure < 0 || an.exposure > 4) out.push_back({path + "/exposure", "exposure outside E0..E4"});
    if (an.controllability < 0 || an.controllability > 3)
      out.push_back({path + "/controllability", "controllability outside C0..C3"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using detail::json;
using detail::JsonReader;

std::string_view ToString(Gate g) { return g == Gate::kAnd ? "and" : "or"; }
std::string_view ToString(Branch b) { return b == Branch::kSuccess ? "success" : "failure"; }
std::string_view ToString(OutcomeKind k) { return k == OutcomeKind::kSafe ? "safe" : "hazardous"; }

int ParseLevel(const JsonReader& r, char letter, int max) {
  const std::string text = r.String();
  if (text.size() == 2 && text[0] == letter && text[1] >= '0' && text[1] <= '0' + max) return text[1] - '0';
  r.Fail(std::string("expected ") + letter + "0.." + letter + std::to_string(max));
}

FtaTree ReadFta(const JsonReader& r) {
  FtaTree tree;
  const auto events = r.At("events");
  for (std::size_t i = 0; i < events.ArraySize(); ++i) {
    const auto e = events.At(i);
    FtaEvent ev;
    ev.id = e.At("id").String();
    ev.name = e.At("name").String();
    if (auto p = e.Find("probability")) ev.probability = p->DecimalValue();
    if (auto p = e.Find("parent")) ev.parent = p->String();
    if (auto g = e.Find("gate")) {
      const auto text = g->String();
      if (text == "and") ev.gate = Gate::kAnd;
      else if (text == "or") ev.gate = Gate::kOr;
      else g->Fail("gate must be \"and\" or \"or\"");
    }
    tree.events.push_back(std::move(ev));
  }
  return tree;
}

FmeaTable ReadFmea(const JsonReader& r) {
  FmeaTable table;
  const auto rows = r.At("rows");
  for (std::size_t i = 0; i < rows.ArraySize(); ++i) {
    const auto row = rows.At(i);
    FmeaRow out;
    out.item = row.OptString("item");
    out.failure_mode = row.At("failure_mode").String();
    out.causal_factors = row.OptString("causal_factors");
    out.immediate_effect = row.OptString("immediate_effect");
    out.system_effect = row.OptString("system_effect");
    out.probability_of_occurrence = row.At("probability_of_occurrence").DecimalValue();
    if (auto g = row.Find("safety_guard")) out.safety_guard = g->String();
    if (auto p = row.Find("probability_of_safety_guard")) out.probability_of_safety_guard = p->DecimalValue();
    table.rows.push_back(std::move(out));
  }
  return table;
}

EtaTree ReadEta(const JsonReader& r) {
  EtaTree tree;
  const auto init = r.At("initiating_event");
  tree.initiating_event = init.At("name").String();
  tree.initiating_probability = init.At("probability").DecimalValue();
  const auto barriers = r.At("barriers");
  for (std::size_t i = 0; i < barriers.ArraySize(); ++i) {
    const auto b = barriers.At(i);
    EtaBarrier out;
    out.name = b.At("name").String();
    out.success_probability = b.At("success").DecimalValue();
    out.failure_probability = b.At("failure").DecimalValue();
    if (auto f = b.Find("failure_event")) out.failure_event = f->String();
    tree.barriers.push_back(std::move(out));
  }
  const auto outcomes = r.At("outcomes");
  for (std::size_t i = 0; i < outcomes.ArraySize(); ++i) {
    const auto o = outcomes.At(i);
    EtaOutcome out;
    out.name = o.At("name").String();
    const auto kind = o.At("kind");
    const auto kind_text = kind.String();
    if (kind_text == "safe") out.kind = OutcomeKind::kSafe;
    else if (kind_text == "hazardous") out.kind = OutcomeKind::kHazardous;
    else kind.Fail("outcome kind must be \"safe\" or \"hazardous\"");
    out.probability = o.At("probability").DecimalValue();
    if (auto path = o.Find("path")) {
      for (std::size_t k = 0; k < path->ArraySize(); ++k) {
        const auto step = path->At(k);
        PathStep s;
        s.barrier = step.At("barrier").String();
        const auto branch = step.At("branch");
        const auto text = branch.String();
        if (text == "success") s.branch = Branch::kSuccess;
        else if (text == "failure") s.branch = Branch::kFailure;
        else branch.Fail("branch must be \"success\" or \"failure\"");
        out.path.push_back(std::move(s));
      }
    }
    tree.outcomes.push_back(std::move(out));
  }
  return tree;
}

ElementRef ReadElementRef(const JsonReader& r) {
  try {
    return ElementRef::Parse(r.String());
  } catch (const ParseError& e) {
    r.Fail(e.what());
  }
}

Project ReadProject(const JsonReader& root) {
  Project p;
  p.name = root.At("name").String();
  const auto systems = root.At("systems");
  for (std::size_t i = 0; i < systems.ArraySize(); ++i) {
    const auto s = systems.At(i);
    p.systems.push_back({s.At("name").String(), s.OptString("description")});
  }
  const auto artifacts = root.At("artifacts");
  for (std::size_t i = 0; i < artifacts.ArraySize(); ++i) {
    const auto a = artifacts.At(i);
    HazardArtifact artifact;
    const auto id = a.At("id");
    try {
      artifact.id = ArtifactId::Parse(id.String());
    } catch (const ParseError& e) {
      id.Fail(e.what());
    }
    artifact.system = a.At("system").String();
    const auto kind = a.At("kind");
    const auto kind_text = kind.String();
    if (kind_text == "fta") artifact.body = ReadFta(a);
    else if (kind_text == "fmea") artifact.body = ReadFmea(a);
    else if (kind_text == "eta") artifact.body = ReadEta(a);
    else kind.Fail("artifact kind must be \"fta\", \"fmea\" or \"eta\"");
    p.artifacts.push_back(std::move(artifact));
  }
  const auto relations = root.At("relations");
  for (std::size_t i = 0; i < relations.ArraySize(); ++i) {
    const auto r = relations.At(i);
    ContentRelation rel;
    const auto kind = r.At("kind");
    auto parsed = RelationKindFromString(kind.String());
    if (!parsed) kind.Fail("relation kind must be influence, inheritance, overlap or supplement");
    rel.kind = *parsed;
    rel.source = r.At("source").String();
    rel.target = r.At("target").String();
    if (auto note = r.Find("note")) rel.note = note->String();
    p.relations.push_back(std::move(rel));
  }
  const auto guards = root.At("guards");
  for (std::size_t i = 0; i < guards.ArraySize(); ++i) {
    const auto g = guards.At(i);
    SafetyGuard guard;
    guard.id = g.At("id").String();
    guard.description = g.OptString("description");
    guard.probability = g.At("probability").DecimalValue();
    guard.origin = ReadElementRef(g.At("origin"));
    p.guards.push_back(std::move(guard));
  }
  if (auto pre = root.Find("preapply_fmea_guards")) p.preapply_fmea_guards = pre->Bool();
  if (auto as = root.Find("assignments")) {
    for (std::size_t i = 0; i < as->ArraySize(); ++i) {
      const auto a = as->At(i);
      p.assignments.push_back({a.At("fault").String(), a.At("guard").String()});
    }
  }
  if (auto iso = root.Find("iso_annotations")) {
    for (std::size_t i = 0; i < iso->ArraySize(); ++i) {
      const auto a = iso->At(i);
      IsoAnnotation an;
      an.fault = a.At("fault").String();
      an.severity = ParseLevel(a.At("severity"), 'S', 3);
      an.exposure = ParseLevel(a.At("exposure"), 'E', 4);
      an.controllability = ParseLevel(a.At("controllability"), 'C', 3);
      an.label = a.OptString("label");
      p.iso_annotations.push_back(std::move(an));
    }
  }
  return p;
}

json WriteArtifact(const HazardArtifact& a) {
  json j = {{"id", a.id.ToString()}, {"system", a.system}};
  if (const auto* fta = std::get_if<FtaTree>(&a.body)) {
    j["kind"] = "fta";
    json events = json::array();
    for (const auto& e : fta->events) {
      json ev = {{"id", e.id}, {"name", e.name}};
      if (e.parent) ev["parent"] = *e.parent;
      if (e.gate) ev["gate"] = ToString(*e.gate);
      if (e.probability) ev["probability"] = e.probability->ToString();
      events.push_back(std::move(ev));
    }
    j["events"] = std::move(events);
  } else if (const auto* fmea = std::get_if<FmeaTable>(&a.body)) {
    j["kind"] = "fmea";
    json rows = json::array();
    for (const auto& r : fmea->rows) {
      json row = {{"item", r.item},
                  {"failure_mode", r.failure_mode},
                  {"causal_factors", r.causal_factors},
                  {"immediate_effect", r.immediate_effect},
                  {"system_effect", r.system_effect},
                  {"probability_of_occurrence", r.probability_of_occurrence.ToString()}};
      if (r.safety_guard) row["safety_guard"] = *r.safety_guard;
      if (r.probability_of_safety_guard)
        row["probability_of_safety_guard"] = r.probability_of_safety_guard->ToString();
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
  } else {
    const auto& eta = std::get<EtaTree>(a.body);
    j["kind"] = "eta";
    j["initiating_event"] = {{"name", eta.initiating_event},
                             {"probability", eta.initiating_probability.ToString()}};
    json barriers = json::array();
    for (const auto& b : eta.barriers) {
      json bj = {{"name", b.name},
                 {"success", b.success_probability.ToString()},
                 {"failure", b.failure_probability.ToString()}};
      if (b.failure_event) bj["failure_event"] = *b.failure_event;
      barriers.push_back(std::move(bj));
    }
    j["barriers"] = std::move(barriers);
    json outcomes = json::array();
    for (const auto& o : eta.outcomes) {
      json path = json::array();
      for (const auto& s : o.path) path.push_back({{"barrier", s.barrier}, {"branch", ToString(s.branch)}});
      outcomes.push_back({{"name", o.name},
                          {"kind", ToString(o.kind)},
                          {"probability", o.probability.ToString()},
                          {"path", std::move(path)}});
    }
    j["outcomes"] = std::move(outcomes);
  }
  return j;
}

}  // namespace

Project ParseProject(std::string_view json_text) {
  const json doc = detail::ParseJsonText(json_text);
  Project project = ReadProject(JsonReader(doc, ""));
  auto diagnostics = ValidateProject(project);
  if (!diagnostics.empty()) throw ValidationError(std::move(diagnostics));
  return project;
}

Project LoadProject(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open project file " + path.string(), path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseProject(buffer.str());
}

std::string SerializeProject(const Project& project) {
  json j;
  j["name"] = project.name;
  j["preapply_fmea_guards"] = project.preapply_fmea_guards;
  json systems = json::array();
  for (const auto& s : project.systems) systems.push_back({{"name", s.name}, {"description", s.description}});
  j["systems"] = std::move(systems);
  json artifacts = json::array();
  for (const auto& a : project.artifacts) artifacts.push_back(WriteArtifact(a));
  j["artifacts"] = std::move(artifacts);
  json guards = json::array();
  for (const auto& g : project.guards)
    guards.push_back({{"id", g.id},
                      {"description", g.description},
                      {"probability", g.probability.ToString()},
                      {"origin", g.origin.ToString()}});
  j["guards"] = std::move(guards);
  json relations = json::array();
  for (const auto& r : project.relations) {
    json rj = {{"kind", ToString(r.kind)}, {"source", r.source}, {"target", r.target}};
    if (r.note) rj["note"] = *r.note;
    relations.push_back(std::move(rj));
  }
  j["relations"] = std::move(relations);
  json assignments = json::array();
  for (const auto& a : project.assignments) assignments.push_back({{"fault", a.fault}, {"guard", a.guard}});
  j["assignments"] = std::move(assignments);
  json iso = json::array();
  for (const auto& a : project.iso_annotations)
    iso.push_back({{"fault", a.fault},
                   {"label", a.label},
                   {"severity", "S" + std::to_string(a.severity)},
                   {"exposure", "E" + std::to_string(a.exposure)},
                   {"controllability", "C" + std::to_string(a.controllability)}});
  j["iso_annotations"] = std::move(iso);
  return j.dump(2) + "\n";
}

void SaveProject(const Project& project, const std::filesystem::path& path) {
  const std::string text = SerializeProject(project);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write " + tmp, tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace critmatrix
