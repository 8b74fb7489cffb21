#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "critmatrix/criticality.hpp"
#include "critmatrix/formats.hpp"
#include "critmatrix/hazard_model.hpp"
#include "critmatrix/platoon_sim.hpp"
#include "critmatrix/relation_graph.hpp"
#include "critmatrix/service.hpp"

namespace critmatrix::cli {

namespace {

int UnresolvedExit(const Fcm& matrix) { return UnresolvedFaults(matrix).empty() ? kOk : kUnresolved; }

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("IoError", "cannot write " + path, path);
  file << text;
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fault criticality analysis for composite hazard models", "critmatrix"};
  app.require_subcommand(1);

  std::string format = "text";
  const std::vector<std::string> formats{"text", "json", "csv"};

  std::string fcm_project;
  auto* fcm = app.add_subcommand("fcm", "Print the fault criticality matrix");
  fcm->add_option("project", fcm_project, "Project file")->required();
  fcm->add_option("--format", format, "text, json or csv")->check(CLI::IsMember(formats));

  std::string whatif_project, whatif_fault, whatif_guard;
  auto* whatif = app.add_subcommand("whatif", "Apply one guard and show the changed row");
  whatif->add_option("project", whatif_project, "Project file")->required();
  whatif->add_option("--fault", whatif_fault, "Qualified fault id")->required();
  whatif->add_option("--guard", whatif_guard, "Guard id")->required();
  whatif->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  std::string trace_fault, trace_project;
  auto* trace = app.add_subcommand("trace", "List every fault reachable from a fault");
  trace->add_option("fault", trace_fault, "Qualified fault id")->required();
  trace->add_option("--project", trace_project, "Project file (default: $CRITMATRIX_PROJECT)");

  std::string sim_scenario, sim_fcm, sim_trace;
  bool sim_no_bindings = false;
  auto* sim = app.add_subcommand("sim", "Run a platoon scenario");
  sim->add_option("scenario", sim_scenario, "Scenario file")->required();
  sim->add_option("--fcm", sim_fcm, "Project file used to validate guard bindings");
  sim->add_option("--trace", sim_trace, "Write the per-step vehicle trace as CSV");
  sim->add_flag("--no-bindings", sim_no_bindings, "Ignore the scenario's guard bindings");
  sim->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  std::string serve_project, serve_host = "127.0.0.1";
  std::optional<int> serve_port;
  auto* serve = app.add_subcommand("serve", "Serve the project over HTTP");
  serve->add_option("project", serve_project, "Project file")->required();
  serve->add_option("--port", serve_port, "Port (default: $CRITMATRIX_PORT or 8080)");
  serve->add_option("--host", serve_host, "Bind address");

  std::string validate_project;
  auto* validate = app.add_subcommand("validate", "Check a project file");
  validate->add_option("project", validate_project, "Project file")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*fcm) {
      const Fcm matrix = BuildFcm(LoadProject(fcm_project));
      if (format == "json") out << FcmJson(matrix);
      else if (format == "csv") out << FcmCsv(matrix);
      else out << FcmText(matrix) << '\n' << UnresolvedText(matrix);
      return UnresolvedExit(matrix);
    }
    if (*whatif) {
      const Project project = LoadProject(whatif_project);
      const Fcm before = BuildFcm(project);
      const Fcm after = ApplyGuard(before, project, whatif_fault, whatif_guard);
      const FcmRow& old_row = *before.FindRow(whatif_fault);
      const FcmRow& new_row = *after.FindRow(whatif_fault);
      if (format == "json") {
        out << "{\"before\":" << RowJson(old_row) << ",\"after\":" << RowJson(new_row) << "}\n";
      } else {
        out << "before:\n" << RowText(old_row) << "after:\n" << RowText(new_row);
      }
      return UnresolvedExit(after);
    }
    if (*trace) {
      if (trace_project.empty()) {
        const char* env = std::getenv("CRITMATRIX_PROJECT");
        if (!env || !*env) {
          err << "trace: no project given (use --project or set CRITMATRIX_PROJECT)\n";
          return kUsage;
        }
        trace_project = env;
      }
      const auto graph = FaultTraceabilityGraph::Build(LoadProject(trace_project));
      for (const auto& id : PropagationScope(graph, trace_fault)) out << id << '\n';
      return kOk;
    }
    if (*sim) {
      const Scenario scenario = LoadScenario(sim_scenario);
      BoundGuards guards;
      if (!sim_no_bindings) {
        guards = sim_fcm.empty() ? BoundGuards(scenario.bindings)
                                 : BindGuards(BuildFcm(LoadProject(sim_fcm)), scenario.bindings);
      }
      const auto outcome = RunScenario(scenario.config, scenario.events, scenario.duration, guards);
      if (!sim_trace.empty()) WriteFile(sim_trace, TraceCsv(outcome));
      out << (format == "json" ? OutcomeJson(outcome, false) : OutcomeText(outcome));
      return outcome.collision ? kCollision : kOk;
    }
    if (*serve) {
      const int port = ResolvePort(serve_port);
      Session session(LoadProject(serve_project), serve_project);
      return Serve(session, serve_host, port);
    }
    if (*validate) {
      LoadProject(validate_project);
      out << "OK\n";
      return kOk;
    }
  } catch (const ValidationError& e) {
    err << e.what() << '\n';
    return kError;
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace critmatrix::cli
