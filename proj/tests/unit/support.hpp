#pragma once

// Shared helpers for the unit tests: fixture paths and a seeded generator of
// small random projects.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "critmatrix/hazard_model.hpp"

namespace testing {

inline std::string Fixture(const std::string& name) { return std::string(CRITMATRIX_FIXTURES) + "/" + name; }

inline const char* kSystem = "Autonomous Car Platooning";

inline std::string Fmea(const std::string& name) { return name + ".[" + kSystem + ".FMEA_0]"; }
inline std::string Fta(const std::string& name) { return name + ".[" + kSystem + ".FTA_0]"; }
inline std::string Eta(const std::string& name) { return name + ".[" + kSystem + ".ETA_0]"; }

/// A generated project plus what the generator put into it, recorded
/// independently of anything the library computes.
struct RandomProject {
  critmatrix::Project project;
  std::vector<std::string> fault_ids;              ///< Index = FMEA row.
  std::vector<std::int64_t> probability_units;     ///< Per fault.
  std::vector<std::vector<std::int64_t>> applied;  ///< Guard probability units applied per fault.
  std::vector<std::string> spare_guards;           ///< Per fault: a candidate not yet applied ("" if none).
};

/// One FMEA table with one fault per row (system_effect left empty), up to
/// `max_edges` fault-to-fault relations plus a few supplement relations, and
/// up to three applied guards per fault.
inline RandomProject MakeRandomProject(std::mt19937_64& rng, int max_faults = 10, int max_edges = 20) {
  using critmatrix::Decimal;
  RandomProject out;
  auto& p = out.project;
  p.name = "random";
  p.systems.push_back({"S", ""});
  p.preapply_fmea_guards = true;

  const int n = std::uniform_int_distribution<int>(1, max_faults)(rng);
  std::uniform_int_distribution<std::int64_t> unit(0, Decimal::kUnitsPerOne);
  std::uniform_int_distribution<std::int64_t> small(0, Decimal::kUnitsPerOne / 10);
  critmatrix::FmeaTable table;
  for (int i = 0; i < n; ++i) {
    critmatrix::FmeaRow row;
    row.item = "item " + std::to_string(i);
    row.failure_mode = "Fault " + std::to_string(i);
    const auto units = unit(rng);
    row.probability_of_occurrence = Decimal::FromUnits(units);
    out.probability_units.push_back(units);
    out.fault_ids.push_back("Fault " + std::to_string(i) + ".[S.FMEA_0]");
    table.rows.push_back(row);
  }
  out.applied.resize(n);
  out.spare_guards.resize(n);

  // Guards: up to four per row, each originating at that row's failure mode.
  // The first may be the row's own FMEA guard (pre-applied); up to two more
  // are applied as assignments; a last one stays spare for what-if tests.
  for (int i = 0; i < n; ++i) {
    const int count = std::uniform_int_distribution<int>(0, 4)(rng);
    const std::string origin = "FMEA_0/rows/" + std::to_string(i) + "/failure_mode";
    int applied = 0;
    for (int g = 0; g < count; ++g) {
      critmatrix::SafetyGuard guard;
      guard.id = "G" + std::to_string(i) + "_" + std::to_string(g);
      const auto units = small(rng);
      guard.probability = Decimal::FromUnits(units);
      guard.origin = critmatrix::ElementRef::Parse(origin);
      p.guards.push_back(guard);
      const bool last = g == count - 1;
      if (last && count > 1) {
        out.spare_guards[i] = guard.id;
      } else if (applied < 3) {
        if (g == 0) {
          table.rows[i].safety_guard = guard.id;
          table.rows[i].probability_of_safety_guard = guard.probability;
        } else {
          p.assignments.push_back({out.fault_ids[i], guard.id});
        }
        out.applied[i].push_back(units);
        ++applied;
      }
    }
  }
  p.artifacts.push_back({critmatrix::ArtifactId{critmatrix::ArtifactKind::kFmea, 0}, "S", table});

  const int edges = std::uniform_int_distribution<int>(0, max_edges)(rng);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<int> kind(0, 2);
  for (int e = 0; e < edges * 3 && static_cast<int>(p.relations.size()) < edges; ++e) {
    const int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    critmatrix::ContentRelation r{static_cast<critmatrix::RelationKind>(kind(rng)), out.fault_ids[a],
                                  out.fault_ids[b], std::nullopt};
    bool dup = false;
    for (const auto& x : p.relations) dup = dup || x == r;
    if (!dup) p.relations.push_back(r);
  }
  // Supplement relations never count toward the impact value.
  if (!p.guards.empty()) {
    std::uniform_int_distribution<std::size_t> guard_pick(0, p.guards.size() - 1);
    const int supplements = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int s = 0; s < supplements; ++s) {
      critmatrix::ContentRelation r{critmatrix::RelationKind::kSupplement, p.guards[guard_pick(rng)].id,
                                    out.fault_ids[pick(rng)], std::nullopt};
      bool dup = false;
      for (const auto& x : p.relations) dup = dup || x == r;
      if (!dup) p.relations.push_back(r);
    }
  }
  return out;
}

}  // namespace testing
