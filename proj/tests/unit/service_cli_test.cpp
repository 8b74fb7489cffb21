#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "critmatrix/formats.hpp"
#include "critmatrix/service.hpp"
#include "doctest.h"
#include "nlohmann/json.hpp"
#include "support.hpp"

using namespace critmatrix;
using nlohmann::json;
using testing::Fmea;

namespace {

namespace fs = std::filesystem;

const std::string kLidar = Fmea("Lidar Sensor Failure");

Session FixtureSession(const fs::path& path = testing::Fixture("platooning.json")) {
  return Session(LoadProject(path.string()), path);
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "critmatrix");
  std::ostringstream out, err;
  const int code = cli::Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path TempDir() {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() / ("critmatrix_test_" + std::to_string(::getpid()) + "_" +
                                                 std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

std::string GuardBody(const std::string& fault, const std::string& guard, std::optional<int> revision = {}) {
  json j = {{"fault", fault}, {"guard", guard}};
  if (revision) j["revision"] = *revision;
  return j.dump();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("read endpoints") {
  Session s = FixtureSession();
  const auto fcm = s.Handle("GET", "/api/fcm", "");
  CHECK(fcm.status == 200);
  CHECK(fcm.revision == 0);
  const auto body = json::parse(fcm.body);
  CHECK(body["rows"].size() == 25);
  CHECK(body["revision"] == 0);

  CHECK(json::parse(s.Handle("GET", "/api/fcm/unresolved", "").body).dump().find("Car Collision") !=
        std::string::npos);
  CHECK(s.Handle("GET", "/api/project", "").status == 200);
  CHECK(s.Handle("GET", "/api/report/iteration", "").status == 200);
  CHECK(json::parse(s.Handle("GET", "/api/report/iso", "").body)["inversions"].empty());

  const auto trace = s.Handle("GET", "/api/trace/" + Fmea("Detection Failure"), "");
  CHECK(trace.status == 200);
  CHECK(json::parse(trace.body)["scope"].size() >= 3);
  CHECK(s.Handle("GET", "/api/trace/Nope.[S.FTA_0]", "").status == 404);

  const auto candidates = s.Handle("GET", "/api/fcm/candidates/" + kLidar, "");
  CHECK(candidates.status == 200);
  CHECK(candidates.body.find("Check for secondary sensor") != std::string::npos);
  CHECK(s.Handle("GET", "/api/fcm/candidates/Nope.[S.FTA_0]", "").status == 404);

  CHECK(s.Handle("GET", "/api/nothing", "").status == 404);
  CHECK(s.Handle("POST", "/api/nothing", "{}").status == 404);
  CHECK(s.Handle("PUT", "/api/fcm", "").status == 405);
}

TEST_CASE("service matrix is byte-identical to the CLI json output") {
  Session s = FixtureSession();
  const auto cli = Cli({"fcm", testing::Fixture("platooning.json"), "--format", "json"});
  CHECK(cli.code == cli::kUnresolved);
  CHECK(cli.out == s.Handle("GET", "/api/fcm", "").body);
}

TEST_CASE("guard mutations") {
  Session s = FixtureSession();
  const std::string guard = "Check for secondary sensor";

  const auto removed = s.Handle("DELETE", "/api/fcm/guard", GuardBody(kLidar, guard, 0));
  REQUIRE(removed.status == 200);
  const auto r = json::parse(removed.body);
  CHECK(r["revision"] == 1);
  CHECK(r["before"]["criticality_after"] == "-0.22");
  CHECK(r["row"]["criticality_after"] == "-0.19");
  CHECK(s.revision() == 1);

  // Stale revision: rejected, nothing changes.
  const auto before = s.Handle("GET", "/api/fcm", "").body;
  const auto stale = s.Handle("POST", "/api/fcm/guard", GuardBody(kLidar, guard, 0));
  CHECK(stale.status == 409);
  CHECK(json::parse(stale.body)["code"] == "StaleRevision");
  CHECK(s.Handle("GET", "/api/fcm", "").body == before);

  CHECK(s.Handle("POST", "/api/fcm/guard", GuardBody(kLidar, guard)).status == 200);
  const auto twice = s.Handle("POST", "/api/fcm/guard", GuardBody(kLidar, guard));
  CHECK(twice.status == 409);
  CHECK(json::parse(twice.body)["code"] == "GuardAlreadyApplied");
  CHECK(s.Handle("POST", "/api/fcm/guard", GuardBody(kLidar, "Decrease Speed")).status == 422);
  CHECK(s.Handle("POST", "/api/fcm/guard", GuardBody("Nope.[S.FTA_0]", guard)).status == 404);
  CHECK(s.Handle("POST", "/api/fcm/guard", GuardBody(kLidar, "Nope")).status == 404);
  CHECK(s.Handle("POST", "/api/fcm/guard", "{").status == 400);
  CHECK(s.Handle("POST", "/api/fcm/guard", "").status == 400);
  CHECK(s.Handle("POST", "/api/fcm/guard", R"({"fault": 3})").status == 400);

  const auto iteration = json::parse(s.Handle("GET", "/api/report/iteration", "").body);
  CHECK(iteration.dump().find("Lidar Sensor Failure") != std::string::npos);
}

TEST_CASE("concurrent mutations at one revision: exactly one wins") {
  Session s = FixtureSession();
  std::atomic<int> ok{0}, conflict{0}, other{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&] {
      const auto r = s.Handle("DELETE", "/api/fcm/guard", GuardBody(kLidar, "Check for secondary sensor", 0));
      (r.status == 200 ? ok : r.status == 409 ? conflict : other)++;
    });
  for (auto& t : threads) t.join();
  CHECK(ok == 1);
  CHECK(conflict == 7);
  CHECK(other == 0);
  CHECK(s.revision() == 1);
}

TEST_CASE("simulation endpoint") {
  Session s = FixtureSession();
  const std::string fog = ReadFile(testing::Fixture("scenario_fog.json"));
  const auto guarded = s.Handle("POST", "/api/sim/run", fog);
  REQUIRE(guarded.status == 200);
  CHECK(json::parse(guarded.body)["collision"] == false);

  const json wrapped = {{"scenario", json::parse(fog)}, {"use_bindings", false}, {"include_trace", true}};
  const auto bare = json::parse(s.Handle("POST", "/api/sim/run", wrapped.dump()).body);
  CHECK(bare["collision"] == true);
  CHECK(bare.contains("trace"));

  // Binding a guard that is no longer in the row is rejected.
  REQUIRE(s.Handle("DELETE", "/api/fcm/guard", GuardBody(Fmea("Detection Failure"), "Reduce Speed and exit platooning"))
              .status == 200);
  CHECK(s.Handle("POST", "/api/sim/run", fog).status == 422);
  CHECK(s.Handle("POST", "/api/sim/run", R"({"config": {"n_vehicles": 1}, "duration": 1, "events": []})").status ==
        400);
}

TEST_CASE("save writes the accepted assignments") {
  const auto dir = TempDir();
  const auto path = dir / "project.json";
  fs::copy_file(testing::Fixture("platooning.json"), path);
  Session s = FixtureSession(path);
  REQUIRE(s.Handle("DELETE", "/api/fcm/guard", GuardBody(kLidar, "Reduce Speed and exit platooning")).status == 200);
  CHECK(s.Handle("POST", "/api/project/save", "").status == 200);
  const Project saved = LoadProject(path.string());
  CHECK(saved.assignments.size() == 1);
  CHECK(BuildFcm(saved).FindRow(kLidar)->guards.size() == 1);
  CHECK(BuildFcm(saved).FindRow(kLidar)->criticality_after == Decimal::Parse("0.1"));
  fs::remove_all(dir);
}

TEST_CASE("port resolution") {
  ::unsetenv("CRITMATRIX_PORT");
  CHECK(ResolvePort(std::nullopt) == 8080);
  CHECK(ResolvePort(9000) == 9000);
  ::setenv("CRITMATRIX_PORT", "8123", 1);
  CHECK(ResolvePort(std::nullopt) == 8123);
  CHECK(ResolvePort(9000) == 9000);
  ::setenv("CRITMATRIX_PORT", "eighty", 1);
  CHECK_THROWS_AS(ResolvePort(std::nullopt), ConfigError);
  ::unsetenv("CRITMATRIX_PORT");
  CHECK_THROWS_AS(ResolvePort(70000), ConfigError);
}

TEST_CASE("command line exit codes") {
  const std::string fixture = testing::Fixture("platooning.json");
  CHECK(Cli({"validate", fixture}).code == cli::kOk);
  CHECK(Cli({"validate", fixture}).out == "OK\n");
  CHECK(Cli({"fcm", fixture, "--format", "csv"}).out == ReadFile(testing::Fixture("platooning_expected.csv")));
  CHECK(Cli({"explode"}).code == cli::kUsage);
  CHECK(Cli({"fcm", fixture, "--format", "xml"}).code == cli::kUsage);
  CHECK(Cli({"fcm", "/nonexistent/project.json"}).code == cli::kError);
  CHECK(Cli({"sim", testing::Fixture("scenario1.json")}).code == cli::kCollision);
  CHECK(Cli({"sim", testing::Fixture("scenario2.json")}).code == cli::kOk);
  CHECK(Cli({"sim", testing::Fixture("scenario_fog.json"), "--fcm", fixture}).code == cli::kOk);
  CHECK(Cli({"sim", testing::Fixture("scenario_fog.json"), "--fcm", fixture, "--no-bindings"}).code ==
        cli::kCollision);

  CHECK(Cli({"whatif", fixture, "--fault", kLidar, "--guard", "Decrease Speed"}).code == cli::kError);
  CHECK(Cli({"whatif", fixture, "--fault", kLidar, "--guard", "Check for secondary sensor"}).code == cli::kError);
}

TEST_CASE("what-if on a project without accepted assignments") {
  Project p = LoadProject(testing::Fixture("platooning.json"));
  p.assignments.clear();
  const auto dir = TempDir();
  const auto path = (dir / "p.json").string();
  SaveProject(p, path);
  const auto lidar = Cli({"whatif", path, "--fault", kLidar, "--guard", "Reduce Speed and exit platooning",
                          "--format", "json"});
  CHECK(lidar.code == cli::kUnresolved);  // other rows stay unresolved
  const auto j = json::parse(lidar.out);
  CHECK(j.dump().find("\"criticality_after\":\"-0.22\"") != std::string::npos);
  CHECK(j.dump().find("NoEffect") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("fully mitigated project exits zero") {
  Project p;
  p.name = "mitigated";
  p.systems.push_back({"S", ""});
  FmeaTable t;
  FmeaRow row;
  row.failure_mode = "Only fault";
  row.probability_of_occurrence = Decimal::Parse("0.1");
  row.safety_guard = "Cover";
  row.probability_of_safety_guard = Decimal::Parse("0.1");
  t.rows.push_back(row);
  p.artifacts.push_back({ArtifactId{ArtifactKind::kFmea, 0}, "S", t});
  p.guards.push_back({"Cover", "", Decimal::Parse("0.1"), ElementRef::Parse("FMEA_0/rows/0")});
  const auto dir = TempDir();
  const auto path = (dir / "p.json").string();
  SaveProject(p, path);
  CHECK(Cli({"fcm", path}).code == cli::kOk);
  fs::remove_all(dir);
}

TEST_CASE("trace reads the project from the environment") {
  ::setenv("CRITMATRIX_PROJECT", testing::Fixture("platooning.json").c_str(), 1);
  const auto r = Cli({"trace", Fmea("Detection Failure")});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("Fail to detect opstacles") != std::string::npos);
  ::unsetenv("CRITMATRIX_PROJECT");
  CHECK(Cli({"trace", Fmea("Detection Failure")}).code == cli::kUsage);
}
