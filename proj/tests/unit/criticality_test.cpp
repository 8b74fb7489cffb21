#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "critmatrix/criticality.hpp"
#include "critmatrix/formats.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace critmatrix;
using testing::Eta;
using testing::Fmea;

namespace {

Decimal D(const char* text) { return Decimal::Parse(text); }

Project Fixture() { return LoadProject(testing::Fixture("platooning.json")); }

// Straight-line band table kept apart from the library's own.
RankBand OracleRank(std::int64_t units) {
  const std::int64_t one = Decimal::kUnitsPerOne;
  if (units <= 0) return RankBand::kNoEffect;
  if (units <= one / 200) return RankBand::kNegligible;
  if (units <= one / 100) return RankBand::kLow;
  if (units <= one * 15 / 100) return RankBand::kMedium;
  if (units <= one * 4 / 10) return RankBand::kHigh;
  if (units <= one * 6 / 10) return RankBand::kVeryHigh;
  return RankBand::kCatastrophic;
}

}  // namespace

TEST_CASE("criticality formulas") {
  CHECK(CriticalityBefore(D("0.02"), D("0.3")) == D("0.32"));
  CHECK(CriticalityBefore(D("0"), D("0")) == D("0"));
  const Decimal guards[] = {D("0.32"), D("0.03")};
  CHECK(FaultCriticality(D("0.03"), D("0.1"), guards) == D("-0.22"));
  CHECK(FaultCriticality(D("0.03"), D("0.1"), {}) == D("0.13"));
  CHECK_THROWS_AS(CriticalityBefore(D("1.1"), D("0")), DomainError);
  CHECK_THROWS_AS(CriticalityBefore(D("-0.1"), D("0")), DomainError);
  CHECK_THROWS_AS(CriticalityBefore(D("0.5"), D("-0.1")), DomainError);
  const Decimal bad[] = {D("-0.01")};
  CHECK_THROWS_AS(FaultCriticality(D("0.5"), D("0.1"), bad), DomainError);
}

TEST_CASE("rank band boundaries are upper inclusive") {
  CHECK(Rank(D("-0.22")) == RankBand::kNoEffect);
  CHECK(Rank(D("0")) == RankBand::kNoEffect);
  CHECK(Rank(Decimal::FromUnits(1)) == RankBand::kNegligible);
  CHECK(Rank(D("0.005")) == RankBand::kNegligible);
  CHECK(Rank(D("0.005000001")) == RankBand::kLow);
  CHECK(Rank(D("0.01")) == RankBand::kLow);
  CHECK(Rank(D("0.15")) == RankBand::kMedium);
  CHECK(Rank(D("0.150000001")) == RankBand::kHigh);
  CHECK(Rank(D("0.4")) == RankBand::kHigh);
  CHECK(Rank(D("0.6")) == RankBand::kVeryHigh);
  CHECK(Rank(D("0.600000001")) == RankBand::kCatastrophic);
  CHECK(Rank(D("2.1")) == RankBand::kCatastrophic);
  CHECK(ToString(RankBand::kVeryHigh) == "VeryHigh");
  CHECK(RankBandFromString("Catastrophic") == RankBand::kCatastrophic);
  CHECK_FALSE(RankBandFromString("Huge").has_value());
}

TEST_CASE("rank agrees with the band oracle on random criticalities") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> units(-Decimal::kUnitsPerOne, 2 * Decimal::kUnitsPerOne);
  std::uniform_int_distribution<std::int64_t> jitter(-3, 3);
  const std::int64_t edges[] = {0, 5'000'000, 10'000'000, 150'000'000, 400'000'000, 600'000'000};
  for (int i = 0; i < 1000; ++i) {
    // Every fourth sample sits next to a band edge.
    const std::int64_t u = i % 4 == 0 ? edges[i / 4 % 6] + jitter(rng) : units(rng);
    CHECK(Rank(Decimal::FromUnits(u)) == OracleRank(u));
  }
}

TEST_CASE("rank is monotone") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> units(-Decimal::kUnitsPerOne, 2 * Decimal::kUnitsPerOne);
  for (int i = 0; i < 1000; ++i) {
    auto a = units(rng), b = units(rng);
    if (a > b) std::swap(a, b);
    CHECK(Rank(Decimal::FromUnits(a)) <= Rank(Decimal::FromUnits(b)));
  }
}

TEST_CASE("fixture matrix matches the expected table") {
  const Fcm fcm = BuildFcm(Fixture());
  std::ifstream in(testing::Fixture("platooning_expected.csv"));
  std::stringstream expected;
  expected << in.rdbuf();
  CHECK(FcmCsv(fcm) == expected.str());
  CHECK(fcm.rows.size() == 25);
  CHECK(fcm.revision == 0);

  const FcmRow* det = fcm.FindRow(Fmea("Detection Failure"));
  REQUIRE(det);
  CHECK(det->criticality_before == D("0.32"));
  CHECK(det->rank_before == RankBand::kHigh);
  CHECK(det->criticality_after == D("0"));
  CHECK(det->rank_after == RankBand::kNoEffect);

  const FcmRow* lidar = fcm.FindRow(Fmea("Lidar Sensor Failure"));
  REQUIRE(lidar);
  CHECK(lidar->criticality_after == D("-0.22"));
  CHECK(lidar->rank_after == RankBand::kNoEffect);
  REQUIRE(lidar->guards.size() == 2);
  CHECK(lidar->guards[0].id == "Reduce Speed and exit platooning");
  CHECK(lidar->guards[1].id == "Check for secondary sensor");

  const FcmRow* wrong = fcm.FindRow(Fmea("Wrong Decision"));
  REQUIRE(wrong);
  CHECK(wrong->criticality_after == D("0.21"));
  CHECK(wrong->rank_after == RankBand::kHigh);
}

TEST_CASE("random projects agree with an integer oracle") {
  std::mt19937_64 rng(20240611);
  int rows_checked = 0;
  for (int trial = 0; trial < 250; ++trial) {
    const auto random = testing::MakeRandomProject(rng);
    REQUIRE(ValidateProject(random.project).empty());
    const Fcm fcm = BuildFcm(random.project);
    REQUIRE(fcm.rows.size() == random.fault_ids.size());

    // Out-degree straight from the relation list, supplements excluded.
    for (std::size_t i = 0; i < random.fault_ids.size(); ++i) {
      std::int64_t outdeg = 0;
      for (const auto& r : random.project.relations)
        if (r.kind != RelationKind::kSupplement && r.source == random.fault_ids[i]) ++outdeg;
      const std::int64_t iv = outdeg * (Decimal::kUnitsPerOne / 10);
      const std::int64_t c = random.probability_units[i] + iv;
      std::int64_t fc = c;
      for (auto g : random.applied[i]) fc -= g;

      const FcmRow* row = fcm.FindRow(random.fault_ids[i]);
      REQUIRE(row);
      CHECK(row->impact_value.units() == iv);
      CHECK(row->criticality_before.units() == c);
      CHECK(row->criticality_after.units() == fc);
      CHECK(row->rank_before == OracleRank(c));
      CHECK(row->rank_after == OracleRank(fc));
      CHECK(row->guards.size() == random.applied[i].size());
      ++rows_checked;
    }
  }
  CHECK(rows_checked >= 200);
}

TEST_CASE("applying a guard is monotone and local to its row") {
  std::mt19937_64 rng(99);
  int applied = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto random = testing::MakeRandomProject(rng);
    const Fcm before = BuildFcm(random.project);
    for (std::size_t i = 0; i < random.fault_ids.size(); ++i) {
      if (random.spare_guards[i].empty()) continue;
      const Fcm after = ApplyGuard(before, random.project, random.fault_ids[i], random.spare_guards[i]);
      ++applied;
      CHECK(after.revision == before.revision + 1);
      for (std::size_t r = 0; r < before.rows.size(); ++r) {
        if (before.rows[r].fault == random.fault_ids[i]) {
          CHECK(after.rows[r].criticality_after <= before.rows[r].criticality_after);
          CHECK(after.rows[r].rank_after <= before.rows[r].rank_after);
          CHECK(after.rows[r].criticality_before == before.rows[r].criticality_before);
          CHECK(after.rows[r].guards.size() == before.rows[r].guards.size() + 1);
        } else {
          CHECK(after.rows[r] == before.rows[r]);
        }
      }
      CHECK_THROWS_AS(ApplyGuard(after, random.project, random.fault_ids[i], random.spare_guards[i]),
                      GuardAlreadyApplied);
      const Fcm undone = RemoveGuard(after, random.fault_ids[i], random.spare_guards[i]);
      CHECK(undone.rows == before.rows);
    }
  }
  CHECK(applied > 50);
}

TEST_CASE("guard application errors") {
  const Project p = Fixture();
  const Fcm fcm = BuildFcm(p);
  const std::string lidar = Fmea("Lidar Sensor Failure");
  CHECK_THROWS_AS(ApplyGuard(fcm, p, "Nope.[S.FTA_0]", "Reduce Speed"), UnknownFault);
  CHECK_THROWS_AS(ApplyGuard(fcm, p, lidar, "No such guard"), UnknownGuard);
  CHECK_THROWS_AS(ApplyGuard(fcm, p, lidar, "Decrease Speed"), GuardNotApplicable);
  CHECK_THROWS_AS(ApplyGuard(fcm, p, lidar, "Check for secondary sensor"), GuardAlreadyApplied);
  CHECK_THROWS_AS(RemoveGuard(fcm, lidar, "Decrease Speed"), GuardNotApplied);
  CHECK_THROWS_AS(RemoveGuard(fcm, "Nope.[S.FTA_0]", "Decrease Speed"), UnknownFault);

  // Guards stay in declaration order whatever order they are applied in.
  Fcm m = RemoveGuard(fcm, lidar, "Reduce Speed and exit platooning");
  m = ApplyGuard(m, p, lidar, "Reduce Speed and exit platooning");
  CHECK(m.revision == 2);
  CHECK(m.FindRow(lidar)->guards == fcm.FindRow(lidar)->guards);
}

TEST_CASE("unresolved faults and their reasons") {
  const Project p = Fixture();
  const Fcm fcm = BuildFcm(p);
  const auto unresolved = UnresolvedFaults(fcm);
  CHECK(unresolved.size() == 23);
  REQUIRE_FALSE(unresolved.empty());
  CHECK(unresolved.front().row.fault == Eta("Car Collision"));
  for (std::size_t i = 1; i < unresolved.size(); ++i) {
    const auto& a = unresolved[i - 1].row;
    const auto& b = unresolved[i].row;
    const bool ordered = a.rank_after > b.rank_after ||
                         (a.rank_after == b.rank_after && (a.criticality_after > b.criticality_after ||
                                                           (a.criticality_after == b.criticality_after &&
                                                            FaultIdLess(a.fault, b.fault))));
    CHECK(ordered);
  }
  auto reason = [&](const std::string& fault) {
    for (const auto& u : unresolved)
      if (u.row.fault == fault) return u.reason;
    FAIL("not unresolved: " << fault);
    return UnresolvedReason::kNoGuardAvailable;
  };
  CHECK(reason(Eta("Mechanical Failure")) == UnresolvedReason::kNoGuardAvailable);
  CHECK(reason(Eta("Proximity Sensor malfunction")) == UnresolvedReason::kGuardInsufficient);
  CHECK(reason(Fmea("Proximity Sensor Failure ")) == UnresolvedReason::kGuardInsufficient);

  // A guard that drops the rank without clearing it leaves the fault partially mitigated.
  Project q = p;
  q.guards.push_back({"Strong", "", D("0.25"), ElementRef::Parse("ETA_0/outcomes/0")});
  q.relations.push_back({RelationKind::kSupplement, "Strong", Eta("Mechanical Failure"), std::nullopt});
  const Fcm partial = ApplyGuard(BuildFcm(q), q, Eta("Mechanical Failure"), "Strong");
  bool found = false;
  for (const auto& u : UnresolvedFaults(partial)) {
    if (u.row.fault != Eta("Mechanical Failure")) continue;
    found = true;
    CHECK(u.row.rank_after == RankBand::kHigh);
    CHECK(u.reason == UnresolvedReason::kPartiallyMitigated);
  }
  CHECK(found);
}

TEST_CASE("iteration report over a guard history") {
  const Project p = Fixture();
  std::vector<Fcm> history{BuildFcm(p)};
  const std::string prox = Fmea("Proximity Sensor Failure ");
  history.push_back(RemoveGuard(history.back(), prox, "Reduce Speed"));
  history.push_back(ApplyGuard(history.back(), p, prox, "Reduce Speed"));
  const auto report = BuildIterationReport(history);
  CHECK(report.deltas.size() == 2);
  CHECK(report.trajectories.size() == 25);
  CHECK_FALSE(report.converged);
  CHECK(report.final_unresolved == 23);
  REQUIRE(report.deltas[0].changes.size() == 1);
  CHECK(report.deltas[0].changes[0].fault == prox);
  CHECK(report.deltas[0].changes[0].criticality_after_before == D("0.08"));
  CHECK(report.deltas[0].changes[0].criticality_after_after == D("0.13"));
  for (const auto& t : report.trajectories) CHECK(t.ranks.size() == 3);
}

TEST_CASE("ISO cross-check") {
  const Project p = Fixture();
  const Fcm fcm = BuildFcm(p);
  const auto report = IsoCrosscheck(fcm, p.iso_annotations);
  CHECK(report.entries.size() == p.iso_annotations.size());
  CHECK(report.inversions.empty());

  // Severity 3 on a Medium fault against severity 1 on a VeryHigh one.
  const std::vector<IsoAnnotation> synthetic{
      {Fmea("Unpredictable Car Behavior"), 3, 4, 3, "hi"},
      {Eta("Mechanical Failure"), 1, 2, 1, "lo"},
  };
  const auto inverted = IsoCrosscheck(fcm, synthetic);
  REQUIRE(inverted.inversions.size() == 1);
  CHECK(inverted.inversions[0].higher_severity_fault == Fmea("Unpredictable Car Behavior"));
  CHECK(inverted.inversions[0].lower_severity_fault == Eta("Mechanical Failure"));
}
