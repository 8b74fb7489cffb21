#include "critmatrix/service.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

#include "critmatrix/formats.hpp"
#include "critmatrix/platoon_sim.hpp"
#include "critmatrix/relation_graph.hpp"
#include "httplib.h"
#include "json_util.hpp"

namespace critmatrix {

namespace {

using detail::json;

int StatusFor(const std::string& code) {
  if (code == "UnknownFault" || code == "UnknownGuard" || code == "EndpointNotFound") return 404;
  if (code == "GuardAlreadyApplied" || code == "GuardNotApplied" || code == "StaleRevision") return 409;
  if (code == "GuardNotApplicable" || code == "GuardNotInRow") return 422;
  return 400;
}

Response ErrorResponse(int status, const std::string& code, const std::string& message, int revision) {
  return {status, ErrorJson(code, message), revision};
}

std::optional<std::string_view> StripPrefix(std::string_view path, std::string_view prefix) {
  if (path.size() <= prefix.size() || path.substr(0, prefix.size()) != prefix) return std::nullopt;
  return path.substr(prefix.size());
}

json ParseBody(std::string_view body) {
  if (body.empty()) throw ParseError("request body is empty");
  json j = detail::ParseJsonText(body);
  if (!j.is_object()) throw ParseError("request body must be a JSON object", "/");
  return j;
}

}  // namespace

Session::Session(Project project, std::filesystem::path project_path)
    : project_(std::move(project)), project_path_(std::move(project_path)) {
  history_.push_back(BuildFcm(project_));
}

int Session::revision() const {
  std::shared_lock lock(mutex_);
  return history_.back().revision;
}

Response Session::Handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    if (method == "GET") {
      std::shared_lock lock(mutex_);
      return Get(path);
    }
    if (method == "POST") return Post(path, body);
    if (method == "DELETE") return Delete(path, body);
    return ErrorResponse(405, "MethodNotAllowed", "method " + std::string(method) + " is not supported", revision());
  } catch (const Error& e) {
    return {StatusFor(e.code()), ErrorJson(e), revision()};
  } catch (const std::exception& e) {
    return ErrorResponse(500, "InternalError", e.what(), revision());
  }
}

Response Session::Get(std::string_view path) {
  const Fcm& current = history_.back();
  const int rev = current.revision;
  if (path == "/api/project") return {200, SerializeProject(project_), rev};
  if (path == "/api/fcm") return {200, FcmJson(current), rev};
  if (path == "/api/fcm/unresolved") return {200, UnresolvedJson(current), rev};
  if (path == "/api/report/iteration") return {200, IterationJson(BuildIterationReport(history_), rev), rev};
  if (path == "/api/report/iso") return {200, IsoJson(IsoCrosscheck(current, project_.iso_annotations), rev), rev};
  if (auto id = StripPrefix(path, "/api/trace/")) {
    const auto graph = FaultTraceabilityGraph::Build(project_);
    return {200, TraceJson(graph, std::string(*id), rev), rev};
  }
  if (auto id = StripPrefix(path, "/api/fcm/candidates/")) {
    const FcmRow* row = current.FindRow(*id);
    if (!row) throw UnknownFault("no fault \"" + std::string(*id) + "\"", std::string(*id));
    return {200, CandidatesJson(GuardCandidates(project_, *id), *row, rev), rev};
  }
  return ErrorResponse(404, "NotFound", "no route GET " + std::string(path), rev);
}

Response Session::Post(std::string_view path, std::string_view body) {
  if (path == "/api/fcm/guard") return MutateGuard(body, true);
  if (path == "/api/sim/run") return RunSimulation(body);
  if (path == "/api/project/save") return Save();
  return ErrorResponse(404, "NotFound", "no route POST " + std::string(path), revision());
}

Response Session::Delete(std::string_view path, std::string_view body) {
  if (path == "/api/fcm/guard") return MutateGuard(body, false);
  return ErrorResponse(404, "NotFound", "no route DELETE " + std::string(path), revision());
}

Response Session::MutateGuard(std::string_view body, bool apply) {
  const json request = ParseBody(body);
  const detail::JsonReader reader(request, "");
  const std::string fault = reader.At("fault").String();
  const std::string guard = reader.At("guard").String();
  const auto expected = reader.Find("revision");

  std::unique_lock lock(mutex_);
  const Fcm& current = history_.back();
  if (expected && expected->Int() != current.revision)
    throw StaleRevision("revision " + std::to_string(expected->Int()) + " is stale; current is " +
                            std::to_string(current.revision),
                        "revision");
  const FcmRow* before = current.FindRow(fault);
  if (!before) throw UnknownFault("no fault \"" + fault + "\"", fault);
  const FcmRow old_row = *before;

  Fcm next = apply ? ApplyGuard(current, project_, fault, guard) : RemoveGuard(current, fault, guard);
  if (apply) {
    project_.assignments.push_back({fault, guard});
  } else {
    std::erase(project_.assignments, GuardAssignment{fault, guard});
  }
  history_.push_back(std::move(next));
  const Fcm& now = history_.back();
  const json out = {{"revision", now.revision},
                    {"before", json::parse(RowJson(old_row))},
                    {"row", json::parse(RowJson(*now.FindRow(fault)))},
                    {"unresolved", UnresolvedFaults(now).size()}};
  return {200, out.dump(2) + "\n", now.revision};
}

Response Session::RunSimulation(std::string_view body) {
  const json request = ParseBody(body);
  const json& doc = request.contains("scenario") ? request.at("scenario") : request;
  const bool use_bindings = request.value("use_bindings", true);
  const bool include_trace = request.value("include_trace", false);
  Scenario scenario = ParseScenario(doc.dump());

  Fcm current;
  {
    std::shared_lock lock(mutex_);
    current = history_.back();
  }
  const BoundGuards guards = use_bindings ? BindGuards(current, scenario.bindings) : BoundGuards{};
  const auto outcome = RunScenario(scenario.config, scenario.events, scenario.duration, guards);
  return {200, OutcomeJson(outcome, include_trace), current.revision};
}

Response Session::Save() {
  std::unique_lock lock(mutex_);
  SaveProject(project_, project_path_);
  const json out = {{"saved", project_path_.string()}, {"revision", history_.back().revision}};
  return {200, out.dump(2) + "\n", history_.back().revision};
}

int ResolvePort(std::optional<int> flag, int fallback) {
  int port = fallback;
  if (flag) {
    port = *flag;
  } else if (const char* env = std::getenv("CRITMATRIX_PORT"); env && *env) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (*end != '\0') throw ConfigError("CRITMATRIX_PORT is not a number: " + std::string(env), "CRITMATRIX_PORT");
    port = static_cast<int>(value);
  }
  if (port < 0 || port > 65535) throw ConfigError("port " + std::to_string(port) + " is out of range", "port");
  return port;
}

int Serve(Session& session, const std::string& host, int port) {
  httplib::Server server;
  auto route = [&session](const httplib::Request& req, httplib::Response& res) {
    const Response r = session.Handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("X-Critmatrix-Revision", std::to_string(r.revision));
    res.set_content(r.body, r.content_type);
  };
  server.Get(".*", route);
  server.Post(".*", route);
  server.Delete(".*", route);
  if (!server.bind_to_port(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  std::cerr << "serving on http://" << host << ":" << port << "\n";
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace critmatrix
