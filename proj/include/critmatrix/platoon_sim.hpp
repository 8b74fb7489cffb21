#pragma once

/// @file platoon_sim.hpp
/// Deterministic discrete-time platoon simulator with fault injection and
/// safety-guard activation.
///
/// Vehicle 0 is the leader. Followers in CACC mode track their predecessor
/// through V2V messages delayed by the reaction delay; ACC and DISSOLVED
/// vehicles use their own range sensor instead. Kinematics use explicit
/// Euler with the speed floored at zero.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "critmatrix/criticality.hpp"
#include "critmatrix/errors.hpp"

namespace critmatrix {

enum class DriveMode { kCacc, kAcc, kDissolved };

std::string_view ToString(DriveMode mode);

struct PlatoonConfig {
  int n_vehicles = 6;
  double initial_speed = 25.0;   ///< m/s
  double standstill_gap = 2.0;   ///< d0, m
  double time_gap = 1.0;         ///< h, s
  double k_p = 0.2;              ///< 1/s^2
  double k_v = 0.7;              ///< 1/s
  double k_a = 0.0;              ///< Predecessor acceleration feed-forward; 0 gives the plain law.
  double a_min = -6.0;           ///< m/s^2
  double a_max = 2.5;
  double reaction_delay = 0.8;   ///< tau, s
  double dt = 0.1;               ///< s
  int lane_count = 2;
  double vehicle_length = 5.0;   ///< m
  double sensor_range = 60.0;    ///< m, before any DetectionDegraded factor
};

/// Throws ConfigError naming the first violated field.
void ValidateConfig(const PlatoonConfig& config);

struct VehicleState {
  int id = 0;
  int lane = 0;
  double position = 0.0;      ///< Front bumper, m.
  double speed = 0.0;
  double acceleration = 0.0;  ///< Effective acceleration over the last step.
  DriveMode mode = DriveMode::kCacc;

  bool operator==(const VehicleState&) const = default;
};

/// CACC follower law: clamp(k_p(gap - (d0 + h*v)) + k_v(v_pred - v) + k_a*a_pred).
double CaccAcceleration(const PlatoonConfig& config, double gap, double speed, double predecessor_speed,
                        double predecessor_acceleration);

/// Leader front bumper at 0, followers behind it at the target gap d0 + h*v.
std::vector<VehicleState> InitPlatoon(const PlatoonConfig& config);

// ---------------------------------------------------------------------------
// Events

enum class GuardKind { kReduceSpeed, kChangeLane, kActivateAcc, kDissolvePlatoon, kExitPlatoon };

std::string_view ToString(GuardKind kind);
std::optional<GuardKind> GuardKindFromString(std::string_view text);

/// `target` is the speed for ReduceSpeed, the lane for ChangeLane and the
/// vehicle for ExitPlatoon; unused otherwise.
struct GuardActivation {
  GuardKind kind = GuardKind::kReduceSpeed;
  double target = 0.0;

  bool operator==(const GuardActivation&) const = default;
};

struct ObstacleAppears {
  int lane = 0;
  double position = 0.0;
};

/// Infrastructure warning about a hazard that becomes physical lead_time
/// seconds after the warning.
struct RsuWarning {
  int lane = 0;
  double position = 0.0;
  double lead_time = 0.0;
};

struct CommFailure {
  int from_vehicle = 0;
  int to_vehicle = 1;
  double duration = 0.0;
};

struct DetectionDegraded {
  int vehicle = 0;
  double range_factor = 1.0;
};

using EventBody = std::variant<ObstacleAppears, RsuWarning, CommFailure, DetectionDegraded, GuardActivation>;

struct ScenarioEvent {
  double time = 0.0;
  EventBody body;
  /// Fault this event realises; used to look up guard bindings.
  std::optional<std::string> fault;
};

std::string Describe(const EventBody& body);

// ---------------------------------------------------------------------------
// Guard bindings

struct GuardBinding {
  std::string fault;
  std::string guard;  ///< Guard id that must be in the fault's FCM row.
  std::vector<GuardActivation> activations;
};

/// Validated bindings. Activations for a fired fault are emitted as
/// GuardActivation events at the firing time and take effect after tau.
class BoundGuards {
 public:
  BoundGuards() = default;
  explicit BoundGuards(std::vector<GuardBinding> bindings) : bindings_(std::move(bindings)) {}

  std::vector<GuardActivation> Activations(std::string_view fault) const;
  const std::vector<GuardBinding>& bindings() const { return bindings_; }
  /// Faults bound although their rank after guards is already NoEffect.
  const std::vector<std::string>& redundant() const { return redundant_; }

 private:
  friend BoundGuards BindGuards(const Fcm&, std::vector<GuardBinding>);
  std::vector<GuardBinding> bindings_;
  std::vector<std::string> redundant_;
};

/// Throws UnknownFault or GuardNotInRow.
BoundGuards BindGuards(const Fcm& matrix, std::vector<GuardBinding> bindings);

// ---------------------------------------------------------------------------
// Running

struct TraceStep {
  double time = 0.0;
  std::vector<VehicleState> vehicles;
  std::vector<std::string> fired;  ///< Events and guard effects at this step.
  double min_gap = 0.0;            ///< Smallest same-lane gap at this step; +inf if none.
};

struct CollisionInfo {
  double time = 0.0;
  std::string rear;   ///< "V<i>"
  std::string front;  ///< "V<i>" or "obstacle <k>"
};

struct ScenarioOutcome {
  bool collision = false;
  std::optional<CollisionInfo> first_collision;
  double min_gap = 0.0;  ///< Over all steps; +inf if no two objects ever share a lane.
  std::vector<TraceStep> trace;
  std::vector<std::string> redundant_bindings;
};

struct Scenario {
  std::string name;
  PlatoonConfig config;
  std::vector<ScenarioEvent> events;
  double duration = 0.0;
  std::vector<GuardBinding> bindings;
};

/// Throws ConfigError. Trace length is ceil(duration / dt) + 1.
ScenarioOutcome RunScenario(const PlatoonConfig& config, std::vector<ScenarioEvent> events, double duration,
                            const BoundGuards& guards = {});

/// Same, starting from explicit vehicle states (one per vehicle, ids 0..n-1).
ScenarioOutcome RunScenarioFrom(const PlatoonConfig& config, std::vector<VehicleState> initial,
                                std::vector<ScenarioEvent> events, double duration, const BoundGuards& guards = {});

/// v*tau + v^2 / (2|a|). Throws DomainError unless v >= 0, tau >= 0, a < 0.
double StoppingDistance(double speed, double reaction_delay, double deceleration);

/// Parses a scenario document. Throws ParseError or ConfigError.
Scenario ParseScenario(std::string_view json_text);
Scenario LoadScenario(const std::string& path);

/// time,vehicle,lane,position,speed,acceleration,mode
std::string TraceCsv(const ScenarioOutcome& outcome);

}  // namespace critmatrix
