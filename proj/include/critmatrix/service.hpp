#pragma once

/// @file service.hpp
/// Single-project HTTP backend. Requests are routed through Handle(), which
/// is independent of the socket layer so it can be exercised directly.

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "critmatrix/criticality.hpp"
#include "critmatrix/hazard_model.hpp"

namespace critmatrix {

struct Response {
  int status = 200;
  std::string body;
  int revision = 0;  ///< Matrix revision the body reflects.
  std::string content_type = "application/json";
};

/// Holds the project and its matrix history. Reads run concurrently;
/// mutations are serialized and rejected when they carry a stale revision.
class Session {
 public:
  Session(Project project, std::filesystem::path project_path);

  /// `path` is already URL-decoded.
  Response Handle(std::string_view method, std::string_view path, std::string_view body);

  int revision() const;

 private:
  Response Get(std::string_view path);
  Response Post(std::string_view path, std::string_view body);
  Response Delete(std::string_view path, std::string_view body);
  Response MutateGuard(std::string_view body, bool apply);
  Response RunSimulation(std::string_view body);
  Response Save();

  mutable std::shared_mutex mutex_;
  Project project_;
  std::filesystem::path project_path_;
  std::vector<Fcm> history_;
};

/// Port resolution: explicit flag, then CRITMATRIX_PORT, then `fallback`.
/// Throws ConfigError for a malformed value.
int ResolvePort(std::optional<int> flag, int fallback = 8080);

/// Blocks serving `session` until the process stops. Returns 1 when the
/// socket cannot be bound.
int Serve(Session& session, const std::string& host, int port);

}  // namespace critmatrix
