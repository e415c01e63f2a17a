#include "oow/gateway.hpp"

#include "json_codec.hpp"
#include "oow/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace oow::gateway {

using codec::json;

std::string state_message(const Snapshot& s) {
  json bodies = json::array();
  for (const auto& b : s.bodies) {
    json bj = codec::pose(b.pose);
    bj["id"] = b.id;
    bodies.push_back(std::move(bj));
  }
  json cams = json::array();
  for (const auto& c : s.cameras) cams.push_back(codec::pose(c));
  json j = {{"t", "state"},
            {"time", s.time},
            {"joints", s.joints},
            {"ee", codec::pose(s.ee)},
            {"target", codec::vec3(s.target)},
            {"bodies", std::move(bodies)},
            {"cameras", std::move(cams)},
            {"selected", s.selected},
            {"score", s.score},
            {"timer", std::string(mission::timer_name(s.timer))},
            {"phase", std::string(mission::phase_name(s.phase))},
            {"attached", s.attached}};
  return j.dump();
}

std::string event_message(const telemetry::SessionEvent& event) {
  json j = codec::event(event);
  j["t"] = "event";
  return j.dump();
}

std::string error_message(const std::string& msg) { return json{{"t", "error"}, {"msg", msg}}.dump(); }

control::InputCommand parse_input_message(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw Error("message is not valid JSON");
  }
  if (!j.is_object() || j.value("t", std::string{}) != "input") {
    throw Error("expected a message with \"t\":\"input\"");
  }
  try {
    return codec::input_command(j);
  } catch (const json::exception& e) {
    throw Error(e.what());
  }
}

// --------------------------------------------------------------------------
// Pilot scripts

namespace {

Waypoint waypoint_from(const json& j) {
  Waypoint w;
  w.dwell = j.value("dwell", 0.0);
  w.tolerance = j.value("tolerance", w.tolerance);
  const json& to = j.at("to");
  if (to.is_array()) {
    w.anchor = Anchor::World;
    w.offset = codec::vec3(to);
  } else {
    const auto anchor = to.at("anchor").get<std::string>();
    if (anchor == "fixture") {
      w.anchor = Anchor::Fixture;
    } else if (anchor == "dock") {
      w.anchor = Anchor::Dock;
    } else if (anchor == "start") {
      w.anchor = Anchor::Start;
    } else if (anchor == "world") {
      w.anchor = Anchor::World;
    } else {
      throw Error("unknown waypoint anchor '" + anchor + "'");
    }
    if (to.contains("offset")) w.offset = codec::vec3(to.at("offset"));
  }
  if (!w.offset.allFinite() || !std::isfinite(w.dwell) || w.dwell < 0.0 || !(w.tolerance > 0.0)) {
    throw Error("waypoint values must be finite, dwell >= 0, tolerance > 0");
  }
  return w;
}

}  // namespace

PilotScript parse_pilot(const std::string& json_text) {
  PilotScript script;
  try {
    const json j = json::parse(json_text);
    script.max_time = j.value("max_time", script.max_time);
    for (const auto& s : j.at("steps")) {
      const auto op = s.at("op").get<std::string>();
      if (op == "move") {
        script.steps.emplace_back(waypoint_from(s));
      } else if (op == "grapple") {
        script.steps.emplace_back(GrappleStep{});
      } else if (op == "release") {
        script.steps.emplace_back(ReleaseStep{});
      } else if (op == "camera") {
        const int sel = s.at("select").get<int>();
        if (sel < 0 || sel > 3) throw Error("camera select must be 0..3");
        script.steps.emplace_back(CameraStep{sel});
      } else if (op == "idle") {
        script.steps.emplace_back(IdleStep{s.at("seconds").get<double>()});
      } else if (op == "wrist") {
        WristStep w;
        w.command = {s.value("roll", 0.0), s.value("pitch", 0.0), s.value("yaw", 0.0)};
        w.seconds = s.at("seconds").get<double>();
        script.steps.emplace_back(w);
      } else {
        throw Error("unknown pilot op '" + op + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("pilot script: ") + e.what());
  }
  return script;
}

PilotScript load_pilot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pilot script " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_pilot(buf.str());
}

// --------------------------------------------------------------------------
// Autopilot

namespace {

struct Sample {
  control::Axes axes;
  control::ButtonSet buttons;
  bool operator==(const Sample&) const = default;
};

class Autopilot {
 public:
  Autopilot(const PilotScript& script, const Engine& engine)
      : script_(script),
        start_(engine.ee().position),
        predicted_target_(engine.target()),
        predicted_camera_(engine.rig().selected) {}

  bool done() const { return index_ >= script_.steps.size(); }

  Sample sample(const Engine& e) {
    const double now = e.time();
    Sample out;
    while (!done()) {
      if (!step_started_) {
        step_started_ = true;
        step_t0_ = now;
        stage_ = 0;
        presses_left_ = 0;
      }
      bool advance = false;
      out = std::visit([&](const auto& step) { return run(step, e, now, advance); },
                       script_.steps[index_]);
      if (!advance) break;
      ++index_;
      step_started_ = false;
      out = {};
    }
    if (out == Sample{}) {
      if (!neutral_since_) neutral_since_ = now;
    } else {
      neutral_since_.reset();
    }
    return out;
  }

 private:
  double settle(const Engine& e) const { return e.config().latency + 2.0 * e.dt(); }

  Eigen::Vector3d resolve(const Waypoint& w, const Engine& e) const {
    switch (w.anchor) {
      case Anchor::World: return w.offset;
      case Anchor::Start: return start_ + w.offset;
      case Anchor::Fixture: return e.fixture().position + w.offset;
      case Anchor::Dock: {
        // Module relative to the end-effector; before a grapple assume the
        // ideal one (end-effector exactly on the fixture). The end-effector
        // keeps its current orientation, so only the lever arm is rotated.
        const Eigen::Isometry3d rel = e.attachment().attached()
                                          ? e.attachment().relative()
                                          : e.scenario().fixture_offset.isometry().inverse();
        return e.scenario().dock.position - e.ee().orientation * rel.translation() + w.offset;
      }
    }
    return w.offset;
  }

  Sample run(const Waypoint& w, const Engine& e, double now, bool& advance) {
    if (neutral_since_ && now - *neutral_since_ >= settle(e)) predicted_target_ = e.target();
    const Eigen::Vector3d goal = resolve(w, e);
    if (arrived_at_) {
      if (now - *arrived_at_ >= w.dwell) {
        arrived_at_.reset();
        advance = true;
      }
      return {};
    }
    const Eigen::Vector3d remaining = goal - predicted_target_;
    if (remaining.norm() <= w.tolerance && (e.ee().position - goal).norm() <= w.tolerance) {
      arrived_at_ = now;
      if (w.dwell <= 0.0) {
        arrived_at_.reset();
        advance = true;
      }
      return {};
    }
    const auto& gains = e.scenario().gains;
    const double reach = gains.speed * e.dt();
    const Eigen::Quaterniond cam =
        e.rig().cameras[static_cast<std::size_t>(e.rig().selected)].pose.orientation;
    const Eigen::Vector3d local = cam.conjugate() * remaining;
    auto stick = [&](double v) {
      const double a = std::clamp(v / reach, -1.0, 1.0);
      return std::abs(a) < gains.deadzone ? 0.0 : a;
    };
    Sample s;
    s.axes.lx = stick(local.x());
    s.axes.ly = -stick(local.y());
    double depth = 0.0;
    if (local.z() > 0.5 * reach) {
      s.buttons.set(control::Button::R2);
      depth = 1.0;
    } else if (local.z() < -0.5 * reach) {
      s.buttons.set(control::Button::L2);
      depth = -1.0;
    }
    predicted_target_ += cam * Eigen::Vector3d(s.axes.lx, -s.axes.ly, depth) * reach;
    return s;
  }

  Sample press_and_wait(control::Button b, const Engine& e, double now, bool& advance,
                        bool (*settled)(const Engine&)) {
    Sample s;
    if (stage_ == 0) {
      s.buttons.set(b);
      stage_ = 1;
      sent_at_ = now;
      return s;
    }
    if (settled(e) || now - sent_at_ >= settle(e) + 0.1) advance = true;
    return s;
  }

  Sample run(const GrappleStep&, const Engine& e, double now, bool& advance) {
    return press_and_wait(control::Button::Cross, e, now, advance,
                          [](const Engine& en) { return en.task().phase != mission::Phase::Approach; });
  }

  Sample run(const ReleaseStep&, const Engine& e, double now, bool& advance) {
    return press_and_wait(control::Button::Triangle, e, now, advance,
                          [](const Engine& en) { return en.task().phase != mission::Phase::Grappled; });
  }

  Sample run(const CameraStep& c, const Engine& e, double now, bool& advance) {
    if (stage_ == 0) {
      presses_left_ = (c.select - predicted_camera_ + 4) % 4;
      stage_ = 1;
    }
    if (stage_ == 1) {
      if (presses_left_ == 0) {
        stage_ = 3;
        sent_at_ = now;
        return {};
      }
      Sample s;
      s.buttons.set(control::Button::R1);
      predicted_camera_ = (predicted_camera_ + 1) % 4;
      --presses_left_;
      stage_ = 2;
      return s;
    }
    if (stage_ == 2) {  // release between presses so each one is an edge
      stage_ = 1;
      return {};
    }
    if (now - sent_at_ >= settle(e)) advance = true;
    return {};
  }

  Sample run(const IdleStep& idle, const Engine&, double now, bool& advance) {
    if (now - step_t0_ >= idle.seconds) advance = true;
    return {};
  }

  Sample run(const WristStep& w, const Engine&, double now, bool& advance) {
    if (now - step_t0_ >= w.seconds) {
      advance = true;
      return {};
    }
    Sample s;
    s.axes.rx = std::clamp(w.command.yaw, -1.0, 1.0);
    s.axes.ry = -std::clamp(w.command.pitch, -1.0, 1.0);
    if (w.command.roll > 0.0) s.buttons.set(control::Button::Circle);
    if (w.command.roll < 0.0) s.buttons.set(control::Button::Square);
    return s;
  }

  const PilotScript& script_;
  Eigen::Vector3d start_;
  std::size_t index_ = 0;
  bool step_started_ = false;
  double step_t0_ = 0.0;
  int stage_ = 0;
  int presses_left_ = 0;
  double sent_at_ = 0.0;
  std::optional<double> arrived_at_;
  std::optional<double> neutral_since_ = 0.0;
  Eigen::Vector3d predicted_target_;
  int predicted_camera_;
};

}  // namespace

HeadlessResult run_headless(const Scenario& scenario, const mission::TrialConfig& config,
                            const PilotScript& script, const HeadlessOptions& options) {
  Engine engine(scenario, config, options.log_sink);
  Autopilot pilot(script, engine);
  HeadlessResult result;
  if (options.record_snapshots) result.snapshots.push_back(engine.snapshot());

  Sample last;
  std::uint64_t seq = 0;
  double last_sent = 0.0;
  const int every = std::max(1, options.snapshot_every);
  while (!engine.finished()) {
    const double now = engine.time();
    const Sample s = pilot.sample(engine);
    if (!(s == last)) {
      engine.submit({now, ++seq, s.axes, s.buttons});
      last = s;
      last_sent = now;
    }
    if (pilot.done() && now - last_sent >= config.latency + engine.dt()) {
      engine.end("script_end");
      break;
    }
    if (now >= script.max_time) {
      engine.end("max_time");
      break;
    }
    engine.step();
    if (options.record_snapshots && engine.tick() % every == 0) {
      result.snapshots.push_back(engine.snapshot());
    }
  }
  result.log = engine.log();
  return result;
}

// --------------------------------------------------------------------------
// Replay

mission::TrialConfig logged_config(const telemetry::SessionLog& log) {
  if (!log.started()) throw Error("log has no trial_start");
  return std::get<telemetry::TrialStart>(log.events().front().payload).config;
}

telemetry::SessionLog replay(const telemetry::SessionLog& recorded, const Scenario& scenario,
                             const mission::TrialConfig& config) {
  if (!recorded.started()) throw ReplayRefused("recorded log has no trial_start");
  const auto& start = std::get<telemetry::TrialStart>(recorded.events().front().payload);
  if (!(start.config == config)) throw ReplayRefused("trial config differs from the recorded one");
  const std::string hash = scenario_hash(scenario);
  if (hash != start.scenario_hash) {
    throw ReplayRefused("scenario hash " + hash + " differs from recorded " + start.scenario_hash);
  }

  auto to_tick = [&](double t) { return static_cast<std::int64_t>(std::llround(t * scenario.tick_hz)); };

  std::optional<std::pair<std::int64_t, std::string>> external_end;
  if (recorded.ended()) {
    const auto& last = recorded.events().back();
    const auto& end = std::get<telemetry::TrialEnd>(last.payload);
    if (end.reason != "docked" && end.reason != "timeout") {
      external_end = {to_tick(last.time), end.reason};
    }
  }

  Engine engine(scenario, config);
  const auto& events = recorded.events();
  std::size_t next = 0;
  auto advance_inputs = [&] {
    while (next < events.size() && !std::holds_alternative<telemetry::Input>(events[next].payload)) ++next;
  };
  advance_inputs();
  while (!engine.finished()) {
    while (next < events.size() && to_tick(events[next].time) <= engine.tick()) {
      engine.submit(std::get<telemetry::Input>(events[next].payload).command);
      ++next;
      advance_inputs();
    }
    if (external_end && engine.tick() >= external_end->first) {
      engine.end(external_end->second);
      break;
    }
    if (!external_end && !recorded.ended() && next >= events.size()) {
      // Recording cut off mid-trial: stop where it stopped.
      if (engine.tick() >= to_tick(events.back().time)) break;
    }
    engine.step();
  }
  return engine.log();
}

}  // namespace oow::gateway
