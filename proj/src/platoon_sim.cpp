#include "critmatrix/platoon_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json_util.hpp"

namespace critmatrix {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string Vehicle(int i) { return "V" + std::to_string(i); }

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string_view ToString(DriveMode mode) {
  switch (mode) {
    case DriveMode::kCacc: return "CACC";
    case DriveMode::kAcc: return "ACC";
    case DriveMode::kDissolved: return "DISSOLVED";
  }
  return "?";
}

std::string_view ToString(GuardKind kind) {
  switch (kind) {
    case GuardKind::kReduceSpeed: return "ReduceSpeed";
    case GuardKind::kChangeLane: return "ChangeLane";
    case GuardKind::kActivateAcc: return "ActivateAcc";
    case GuardKind::kDissolvePlatoon: return "DissolvePlatoon";
    case GuardKind::kExitPlatoon: return "ExitPlatoon";
  }
  return "?";
}

std::optional<GuardKind> GuardKindFromString(std::string_view text) {
  for (auto k : {GuardKind::kReduceSpeed, GuardKind::kChangeLane, GuardKind::kActivateAcc,
                 GuardKind::kDissolvePlatoon, GuardKind::kExitPlatoon})
    if (ToString(k) == text) return k;
  return std::nullopt;
}

void ValidateConfig(const PlatoonConfig& c) {
  auto fail = [](const char* field, const std::string& why) { throw ConfigError(std::string(field) + " " + why, field); };
  if (c.n_vehicles < 2) fail("n_vehicles", "must be at least 2");
  if (!(c.dt > 0)) fail("dt", "must be positive");
  if (!(c.a_min < 0)) fail("a_min", "must be negative");
  if (!(c.a_max > 0)) fail("a_max", "must be positive");
  if (!(c.time_gap > 0)) fail("time_gap", "must be positive");
  if (!(c.standstill_gap > 0)) fail("standstill_gap", "must be positive");
  if (!(c.initial_speed >= 0)) fail("initial_speed", "must not be negative");
  if (!(c.reaction_delay >= 0)) fail("reaction_delay", "must not be negative");
  if (c.lane_count < 1) fail("lane_count", "must be at least 1");
  if (!(c.vehicle_length >= 0)) fail("vehicle_length", "must not be negative");
  if (!(c.sensor_range > 0)) fail("sensor_range", "must be positive");
  for (double g : {c.k_p, c.k_v, c.k_a})
    if (!std::isfinite(g)) fail("gains", "must be finite");
}

std::vector<VehicleState> InitPlatoon(const PlatoonConfig& config) {
  ValidateConfig(config);
  const double spacing = config.standstill_gap + config.time_gap * config.initial_speed + config.vehicle_length;
  std::vector<VehicleState> out;
  for (int i = 0; i < config.n_vehicles; ++i)
    out.push_back({i, 0, -i * spacing, config.initial_speed, 0.0, DriveMode::kCacc});
  return out;
}

double CaccAcceleration(const PlatoonConfig& c, double gap, double speed, double predecessor_speed,
                        double predecessor_acceleration) {
  const double a = c.k_p * (gap - (c.standstill_gap + c.time_gap * speed)) + c.k_v * (predecessor_speed - speed) +
                   c.k_a * predecessor_acceleration;
  return std::clamp(a, c.a_min, c.a_max);
}

std::string Describe(const EventBody& body) {
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ObstacleAppears>)
          return "ObstacleAppears(lane=" + std::to_string(e.lane) + ", position=" + Num(e.position) + ")";
        else if constexpr (std::is_same_v<T, RsuWarning>)
          return "RsuWarning(lane=" + std::to_string(e.lane) + ", position=" + Num(e.position) +
                 ", lead_time=" + Num(e.lead_time) + ")";
        else if constexpr (std::is_same_v<T, CommFailure>)
          return "CommFailure(" + Vehicle(e.from_vehicle) + "->" + Vehicle(e.to_vehicle) +
                 ", duration=" + Num(e.duration) + ")";
        else if constexpr (std::is_same_v<T, DetectionDegraded>)
          return "DetectionDegraded(" + Vehicle(e.vehicle) + ", range_factor=" + Num(e.range_factor) + ")";
        else {
          std::string s = "GuardActivation(" + std::string(ToString(e.kind));
          if (e.kind == GuardKind::kReduceSpeed || e.kind == GuardKind::kChangeLane ||
              e.kind == GuardKind::kExitPlatoon)
            s += " " + Num(e.target);
          return s + ")";
        }
      },
      body);
}

// ---------------------------------------------------------------------------
// Bindings

std::vector<GuardActivation> BoundGuards::Activations(std::string_view fault) const {
  std::vector<GuardActivation> out;
  for (const auto& b : bindings_)
    if (b.fault == fault) out.insert(out.end(), b.activations.begin(), b.activations.end());
  return out;
}

BoundGuards BindGuards(const Fcm& matrix, std::vector<GuardBinding> bindings) {
  BoundGuards bound;
  for (const auto& b : bindings) {
    const FcmRow* row = matrix.FindRow(b.fault);
    if (!row) throw UnknownFault("no fault \"" + b.fault + "\"", b.fault);
    const bool in_row =
        std::any_of(row->guards.begin(), row->guards.end(), [&](const AppliedGuard& g) { return g.id == b.guard; });
    if (!in_row) throw GuardNotInRow("guard \"" + b.guard + "\" is not applied to \"" + b.fault + "\"", b.fault);
    if (row->rank_after == RankBand::kNoEffect &&
        std::find(bound.redundant_.begin(), bound.redundant_.end(), b.fault) == bound.redundant_.end())
      bound.redundant_.push_back(b.fault);
  }
  bound.bindings_ = std::move(bindings);
  return bound;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

void ValidateEvent(const PlatoonConfig& c, const ScenarioEvent& ev) {
  auto fail = [](const std::string& why) { throw ConfigError("event: " + why, "events"); };
  auto lane_ok = [&](int lane) { return lane >= 0 && lane < c.lane_count; };
  auto vehicle_ok = [&](int v) { return v >= 0 && v < c.n_vehicles; };
  if (!(ev.time >= 0) || !std::isfinite(ev.time)) fail("time must be finite and not negative");
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ObstacleAppears>) {
          if (!lane_ok(e.lane)) fail("lane " + std::to_string(e.lane) + " does not exist");
        } else if constexpr (std::is_same_v<T, RsuWarning>) {
          if (!lane_ok(e.lane)) fail("lane " + std::to_string(e.lane) + " does not exist");
          if (!(e.lead_time >= 0)) fail("lead_time must not be negative");
        } else if constexpr (std::is_same_v<T, CommFailure>) {
          if (!vehicle_ok(e.from_vehicle) || !vehicle_ok(e.to_vehicle)) fail("comm failure vehicle does not exist");
          if (!(e.duration >= 0)) fail("comm failure duration must not be negative");
        } else if constexpr (std::is_same_v<T, DetectionDegraded>) {
          if (!vehicle_ok(e.vehicle)) fail("vehicle " + std::to_string(e.vehicle) + " does not exist");
          if (!(e.range_factor >= 0)) fail("range_factor must not be negative");
        } else {
          if (e.kind == GuardKind::kChangeLane && !lane_ok(static_cast<int>(e.target)))
            fail("lane " + Num(e.target) + " does not exist");
          if (e.kind == GuardKind::kExitPlatoon && (e.target < 1 || e.target >= c.n_vehicles))
            fail("vehicle " + Num(e.target) + " cannot exit the platoon");
          if (e.kind == GuardKind::kReduceSpeed && !(e.target >= 0)) fail("target speed must not be negative");
        }
      },
      ev.body);
}

struct Obstacle {
  int lane = 0;
  double position = 0.0;
  double active_from = 0.0;
};

struct CommWindow {
  int from = 0;
  int to = 0;
  double start = 0.0;
  double end = 0.0;
};

struct PendingEffect {
  double due = 0.0;
  GuardActivation activation;
};

struct Snapshot {
  std::vector<double> position;
  std::vector<double> speed;
  std::vector<double> acceleration;
};

class Simulator {
 public:
  Simulator(const PlatoonConfig& config, std::vector<VehicleState> initial, std::vector<ScenarioEvent> events,
            const BoundGuards& guards)
      : c_(config), events_(std::move(events)), guards_(guards), vehicles_(std::move(initial)) {
    v_ref_ = c_.initial_speed;
    range_factor_.assign(c_.n_vehicles, 1.0);
    detected_since_.assign(c_.n_vehicles, std::nullopt);
    last_message_.assign(c_.n_vehicles, std::nullopt);
    delay_steps_ = static_cast<long>(std::lround(c_.reaction_delay / c_.dt));
  }

  ScenarioOutcome Run(double duration) {
    ScenarioOutcome out;
    out.min_gap = kInf;
    const long steps = static_cast<long>(std::ceil(duration / c_.dt - kEps));
    std::size_t next_event = 0;
    for (long k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * c_.dt;
      TraceStep step;
      step.time = t;

      while (next_event < events_.size() && events_[next_event].time <= t + kEps)
        Fire(events_[next_event++], step.fired);
      ApplyDueEffects(t, step.fired);
      for (auto& o : pending_obstacles_)
        if (o.active_from <= t + kEps) obstacles_.push_back(o);
      std::erase_if(pending_obstacles_, [&](const Obstacle& o) { return o.active_from <= t + kEps; });

      step.min_gap = CheckGaps(t, out);
      out.min_gap = std::min(out.min_gap, step.min_gap);
      step.vehicles = vehicles_;
      out.trace.push_back(std::move(step));
      Record();
      if (k == steps) break;
      Advance(k, t);
    }
    out.collision = out.min_gap <= 0;
    out.redundant_bindings = guards_.redundant();
    return out;
  }

 private:
  void Fire(const ScenarioEvent& ev, std::vector<std::string>& fired) {
    fired.push_back(Describe(ev.body));
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, ObstacleAppears>) {
            pending_obstacles_.push_back({e.lane, e.position, ev.time});
          } else if constexpr (std::is_same_v<T, RsuWarning>) {
            pending_obstacles_.push_back({e.lane, e.position, ev.time + e.lead_time});
          } else if constexpr (std::is_same_v<T, CommFailure>) {
            comm_.push_back({e.from_vehicle, e.to_vehicle, ev.time, ev.time + e.duration});
          } else if constexpr (std::is_same_v<T, DetectionDegraded>) {
            range_factor_[e.vehicle] = e.range_factor;
          } else {
            Schedule(ev.time, e);
          }
        },
        ev.body);
    if (ev.fault) {
      for (const auto& a : guards_.Activations(*ev.fault)) {
        fired.push_back("binding " + *ev.fault + " -> " + std::string(ToString(a.kind)));
        Schedule(ev.time, a);
      }
    }
  }

  void Schedule(double time, const GuardActivation& a) {
    pending_.push_back({time + c_.reaction_delay, a});
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const PendingEffect& x, const PendingEffect& y) { return x.due < y.due; });
  }

  void ApplyDueEffects(double t, std::vector<std::string>& fired) {
    while (!pending_.empty() && pending_.front().due <= t + kEps) {
      const GuardActivation a = pending_.front().activation;
      pending_.erase(pending_.begin());
      fired.push_back("effect " + Describe(a));
      switch (a.kind) {
        case GuardKind::kReduceSpeed: v_ref_ = a.target; break;
        case GuardKind::kChangeLane:
          for (auto& v : vehicles_) v.lane = static_cast<int>(a.target);
          break;
        case GuardKind::kActivateAcc:
          for (auto& v : vehicles_)
            if (v.id != 0 && v.mode == DriveMode::kCacc) v.mode = DriveMode::kAcc;
          break;
        case GuardKind::kDissolvePlatoon:
          for (auto& v : vehicles_)
            if (v.id != 0) v.mode = DriveMode::kDissolved;
          break;
        case GuardKind::kExitPlatoon: vehicles_[static_cast<std::size_t>(a.target)].mode = DriveMode::kDissolved; break;
      }
    }
  }

  struct Body {
    double rear;
    double front;
    std::string label;
  };

  double CheckGaps(double t, ScenarioOutcome& out) const {
    double smallest = kInf;
    for (int lane = 0; lane < c_.lane_count; ++lane) {
      std::vector<Body> bodies;
      for (const auto& v : vehicles_)
        if (v.lane == lane) bodies.push_back({v.position - c_.vehicle_length, v.position, Vehicle(v.id)});
      for (std::size_t i = 0; i < obstacles_.size(); ++i)
        if (obstacles_[i].lane == lane)
          bodies.push_back({obstacles_[i].position, obstacles_[i].position, "obstacle " + std::to_string(i)});
      std::stable_sort(bodies.begin(), bodies.end(), [](const Body& a, const Body& b) { return a.rear > b.rear; });
      for (std::size_t i = 1; i < bodies.size(); ++i) {
        const double gap = bodies[i - 1].rear - bodies[i].front;
        smallest = std::min(smallest, gap);
        if (gap <= 0 && !out.first_collision) out.first_collision = CollisionInfo{t, bodies[i].label, bodies[i - 1].label};
      }
    }
    return smallest;
  }

  void Record() {
    Snapshot s;
    for (const auto& v : vehicles_) {
      s.position.push_back(v.position);
      s.speed.push_back(v.speed);
      s.acceleration.push_back(v.acceleration);
    }
    history_.push_back(std::move(s));
  }

  // Nearest vehicle or obstacle ahead in the same lane: (gap, speed, is_obstacle).
  struct Ahead {
    double gap = kInf;
    double speed = 0.0;
    bool obstacle = false;
  };

  Ahead NearestAhead(const VehicleState& me) const {
    Ahead best;
    for (const auto& v : vehicles_) {
      if (v.id == me.id || v.lane != me.lane || v.position <= me.position) continue;
      const double gap = v.position - c_.vehicle_length - me.position;
      if (gap < best.gap) best = {gap, v.speed, false};
    }
    for (const auto& o : obstacles_) {
      if (o.lane != me.lane || o.position < me.position) continue;
      const double gap = o.position - me.position;
      if (gap < best.gap) best = {gap, 0.0, true};
    }
    return best;
  }

  double Clamp(double a) const { return std::clamp(a, c_.a_min, c_.a_max); }

  double FollowLaw(double gap, double time_gap, double own_speed, double front_speed) const {
    return c_.k_p * (gap - (c_.standstill_gap + time_gap * own_speed)) + c_.k_v * (front_speed - own_speed);
  }

  bool CommFailed(int from, int to, double t) const {
    return std::any_of(comm_.begin(), comm_.end(), [&](const CommWindow& w) {
      return w.from == from && w.to == to && w.start <= t + kEps && t + kEps < w.end;
    });
  }

  double Control(std::size_t i, long k, double t) {
    const VehicleState& me = vehicles_[i];
    const double range = c_.sensor_range * range_factor_[i];
    const Ahead ahead = NearestAhead(me);
    const bool sensed = ahead.gap <= range;

    if (sensed && ahead.obstacle) {
      if (!detected_since_[i]) detected_since_[i] = t;
    } else {
      detected_since_[i].reset();
    }
    if (detected_since_[i] && t + kEps >= *detected_since_[i] + c_.reaction_delay) return c_.a_min;

    const double cruise = c_.k_v * (v_ref_ - me.speed);
    if (i == 0 || me.mode != DriveMode::kCacc) {
      const double h = me.mode == DriveMode::kDissolved ? 2 * c_.time_gap : c_.time_gap;
      double a = cruise;
      if (sensed && !ahead.obstacle) a = std::min(a, FollowLaw(ahead.gap, h, me.speed, ahead.speed));
      return Clamp(a);
    }

    // CACC: delayed predecessor message, dead-reckoned to now; held while the link is down.
    long msg = std::max(0L, k - delay_steps_);
    const int pred = static_cast<int>(i) - 1;
    if (CommFailed(pred, static_cast<int>(i), t) && last_message_[i]) msg = *last_message_[i];
    else last_message_[i] = msg;
    const Snapshot& s = history_[static_cast<std::size_t>(msg)];
    const double age = t - static_cast<double>(msg) * c_.dt;
    const double gap = s.position[pred] + s.speed[pred] * age - c_.vehicle_length - me.position;
    return CaccAcceleration(c_, gap, me.speed, s.speed[pred], s.acceleration[pred]);
  }

  void Advance(long k, double t) {
    std::vector<double> commanded(vehicles_.size());
    for (std::size_t i = 0; i < vehicles_.size(); ++i) commanded[i] = Control(i, k, t);
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      auto& v = vehicles_[i];
      const double old_speed = v.speed;
      v.position += old_speed * c_.dt;
      v.speed = std::max(0.0, old_speed + commanded[i] * c_.dt);
      v.acceleration = (v.speed - old_speed) / c_.dt;
    }
  }

  PlatoonConfig c_;
  std::vector<ScenarioEvent> events_;
  const BoundGuards& guards_;
  std::vector<VehicleState> vehicles_;
  std::vector<Obstacle> obstacles_;
  std::vector<Obstacle> pending_obstacles_;
  std::vector<CommWindow> comm_;
  std::vector<PendingEffect> pending_;
  std::vector<Snapshot> history_;
  std::vector<double> range_factor_;
  std::vector<std::optional<double>> detected_since_;
  std::vector<std::optional<long>> last_message_;
  double v_ref_ = 0.0;
  long delay_steps_ = 0;
};

}  // namespace

ScenarioOutcome RunScenario(const PlatoonConfig& config, std::vector<ScenarioEvent> events, double duration,
                            const BoundGuards& guards) {
  return RunScenarioFrom(config, InitPlatoon(config), std::move(events), duration, guards);
}

ScenarioOutcome RunScenarioFrom(const PlatoonConfig& config, std::vector<VehicleState> initial,
                                std::vector<ScenarioEvent> events, double duration, const BoundGuards& guards) {
  ValidateConfig(config);
  if (initial.size() != static_cast<std::size_t>(config.n_vehicles))
    throw ConfigError("expected " + std::to_string(config.n_vehicles) + " initial vehicle states", "initial");
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const auto& v = initial[i];
    if (v.id != static_cast<int>(i) || v.lane < 0 || v.lane >= config.lane_count || !(v.speed >= 0))
      throw ConfigError("initial state of vehicle " + std::to_string(i) + " is invalid", "initial");
  }
  if (!(duration >= 0) || !std::isfinite(duration)) throw ConfigError("duration must be finite and not negative", "duration");
  for (const auto& ev : events) ValidateEvent(config, ev);
  for (const auto& b : guards.bindings())
    for (const auto& a : b.activations) ValidateEvent(config, ScenarioEvent{0.0, a, std::nullopt});
  std::stable_sort(events.begin(), events.end(),
                   [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.time < b.time; });
  Simulator sim(config, std::move(initial), std::move(events), guards);
  return sim.Run(duration);
}

double StoppingDistance(double speed, double reaction_delay, double deceleration) {
  if (!(speed >= 0)) throw DomainError("speed must not be negative", "speed");
  if (!(reaction_delay >= 0)) throw DomainError("reaction delay must not be negative", "reaction_delay");
  if (!(deceleration < 0)) throw DomainError("deceleration must be negative", "deceleration");
  return speed * reaction_delay + speed * speed / (2 * -deceleration);
}

// ---------------------------------------------------------------------------
// Scenario files

namespace {

using detail::JsonReader;

GuardActivation ReadActivation(const JsonReader& r) {
  GuardActivation a;
  const auto guard = r.At("guard");
  auto kind = GuardKindFromString(guard.String());
  if (!kind) guard.Fail("unknown guard kind \"" + guard.String() + "\"");
  a.kind = *kind;
  a.target = r.OptNumber("target", 0.0);
  return a;
}

ScenarioEvent ReadEvent(const JsonReader& r) {
  ScenarioEvent ev;
  ev.time = r.At("time").Number();
  if (auto f = r.Find("fault")) ev.fault = f->String();
  const auto type = r.At("type");
  const std::string t = type.String();
  if (t == "ObstacleAppears") ev.body = ObstacleAppears{r.At("lane").Int(), r.At("position").Number()};
  else if (t == "RsuWarning")
    ev.body = RsuWarning{r.At("lane").Int(), r.At("position").Number(), r.OptNumber("lead_time", 0.0)};
  else if (t == "CommFailure")
    ev.body = CommFailure{r.At("from_vehicle").Int(), r.At("to_vehicle").Int(), r.At("duration").Number()};
  else if (t == "DetectionDegraded")
    ev.body = DetectionDegraded{r.At("vehicle").Int(), r.At("range_factor").Number()};
  else if (t == "GuardActivation") ev.body = ReadActivation(r);
  else type.Fail("unknown event type \"" + t + "\"");
  return ev;
}

PlatoonConfig ReadConfig(const JsonReader& r) {
  PlatoonConfig c;
  c.n_vehicles = r.OptInt("n_vehicles", c.n_vehicles);
  c.initial_speed = r.OptNumber("initial_speed", c.initial_speed);
  c.standstill_gap = r.OptNumber("standstill_gap", c.standstill_gap);
  c.time_gap = r.OptNumber("time_gap", c.time_gap);
  c.k_p = r.OptNumber("k_p", c.k_p);
  c.k_v = r.OptNumber("k_v", c.k_v);
  c.k_a = r.OptNumber("k_a", c.k_a);
  c.a_min = r.OptNumber("a_min", c.a_min);
  c.a_max = r.OptNumber("a_max", c.a_max);
  c.reaction_delay = r.OptNumber("reaction_delay", c.reaction_delay);
  c.dt = r.OptNumber("dt", c.dt);
  c.lane_count = r.OptInt("lane_count", c.lane_count);
  c.vehicle_length = r.OptNumber("vehicle_length", c.vehicle_length);
  c.sensor_range = r.OptNumber("sensor_range", c.sensor_range);
  return c;
}

}  // namespace

Scenario ParseScenario(std::string_view json_text) {
  const auto doc = detail::ParseJsonText(json_text);
  const JsonReader root(doc, "");
  Scenario s;
  s.name = root.OptString("name");
  s.config = ReadConfig(root.At("config"));
  s.duration = root.At("duration").Number();
  if (auto events = root.Find("events"))
    for (std::size_t i = 0; i < events->ArraySize(); ++i) s.events.push_back(ReadEvent(events->At(i)));
  if (auto bindings = root.Find("bindings")) {
    for (std::size_t i = 0; i < bindings->ArraySize(); ++i) {
      const auto b = bindings->At(i);
      GuardBinding binding;
      binding.fault = b.At("fault").String();
      binding.guard = b.At("guard").String();
      const auto acts = b.At("activations");
      for (std::size_t k = 0; k < acts.ArraySize(); ++k) binding.activations.push_back(ReadActivation(acts.At(k)));
      s.bindings.push_back(std::move(binding));
    }
  }
  ValidateConfig(s.config);
  for (const auto& ev : s.events) ValidateEvent(s.config, ev);
  return s;
}

Scenario LoadScenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file " + path, path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseScenario(buffer.str());
}

std::string TraceCsv(const ScenarioOutcome& outcome) {
  std::string out = "time,vehicle,lane,position,speed,acceleration,mode\n";
  char line[256];
  for (const auto& step : outcome.trace) {
    for (const auto& v : step.vehicles) {
      std::snprintf(line, sizeof line, "%.3f,%d,%d,%.6f,%.6f,%.6f,%s\n", step.time, v.id, v.lane, v.position,
                    v.speed, v.acceleration, std::string(ToString(v.mode)).c_str());
      out += line;
    }
  }
  return out;
}

}  // namespace critmatrix
