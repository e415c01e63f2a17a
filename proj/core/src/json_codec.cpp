#include "json_codec.hpp"

#include "oow/error.hpp"

#include <cmath>

namespace oow::codec {

namespace {

template <typename T>
T need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("field '") + key + "' has the wrong type");
  }
}

double need_finite(const json& j, const char* key) {
  const auto v = need<double>(j, key);
  if (!std::isfinite(v)) throw Error(std::string("field '") + key + "' is not finite");
  return v;
}

}  // namespace

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json quat(const Eigen::Quaterniond& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

Eigen::Quaterniond quat(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error("expected a quaternion [w, x, y, z]");
  Eigen::Quaterniond q(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
  if (q.norm() < 1e-12) throw Error("zero quaternion");
  return q.normalized();
}

json pose(const kinematics::Pose& p) { return {{"p", vec3(p.position)}, {"q", quat(p.orientation)}}; }

kinematics::Pose pose(const json& j) {
  kinematics::Pose p;
  if (j.contains("p")) p.position = vec3(j.at("p"));
  if (j.contains("q")) p.orientation = quat(j.at("q"));
  return p;
}

json trial_config(const mission::TrialConfig& c) {
  return {{"latency", c.latency},
          {"tp", c.time_pressure},
          {"obstacles", c.obstacles},
          {"block", std::string(mission::block_name(c.block))},
          {"trial_index", c.trial_index},
          {"seed", c.seed}};
}

mission::TrialConfig trial_config(const json& j) {
  mission::TrialConfig c;
  c.latency = need_finite(j, "latency");
  if (c.latency < 0.0) throw Error("latency must be >= 0");
  c.time_pressure = need<bool>(j, "tp");
  c.obstacles = need<bool>(j, "obstacles");
  const auto block = need<std::string>(j, "block");
  auto b = mission::block_from_name(block);
  if (!b) throw Error("unknown block '" + block + "'");
  c.block = *b;
  c.trial_index = need<int>(j, "trial_index");
  c.seed = need<std::uint64_t>(j, "seed");
  return c;
}

json input_command(const control::InputCommand& c) {
  json buttons = json::array();
  for (auto b : control::kAllButtons) {
    if (c.buttons.has(b)) buttons.push_back(std::string(control::button_name(b)));
  }
  return {{"seq", c.seq},
          {"ts", c.timestamp},
          {"axes", {{"lx", c.axes.lx}, {"ly", c.axes.ly}, {"rx", c.axes.rx}, {"ry", c.axes.ry}}},
          {"buttons", buttons}};
}

control::InputCommand input_command(const json& j) {
  control::InputCommand c;
  c.seq = need<std::uint64_t>(j, "seq");
  c.timestamp = need_finite(j, "ts");
  const json& axes = j.contains("axes") ? j.at("axes") : json::object();
  if (!axes.is_object()) throw Error("'axes' must be an object");
  auto axis = [&](const char* key) {
    if (!axes.contains(key)) return 0.0;
    const double v = need_finite(axes, key);
    if (v < -1.0 || v > 1.0) throw Error(std::string("axis '") + key + "' outside [-1, 1]");
    return v;
  };
  c.axes = {axis("lx"), axis("ly"), axis("rx"), axis("ry")};
  if (j.contains("buttons")) {
    const json& bs = j.at("buttons");
    if (!bs.is_array()) throw Error("'buttons' must be an array");
    for (const auto& name : bs) {
      if (!name.is_string()) throw Error("button names must be strings");
      auto b = control::button_from_name(name.get<std::string>());
      if (!b) throw Error("unknown button '" + name.get<std::string>() + "'");
      c.buttons.set(*b);
    }
  }
  return c;
}

json event(const telemetry::SessionEvent& e) {
  using namespace telemetry;
  json j = {{"v", kSchemaVersion}, {"time", e.time}, {"kind", std::string(e.kind())}};
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, TrialStart>) {
          j["config"] = trial_config(p.config);
          j["scenario"] = p.scenario_hash;
        } else if constexpr (std::is_same_v<P, Collision>) {
          j["a"] = p.body_a;
          j["b"] = p.body_b;
        } else if constexpr (std::is_base_of_v<Subtask, P>) {
          j["dist"] = p.dist;
          j["angle"] = p.angle_deg;
          j["q"] = p.quality;
          j["score"] = p.score;
        } else if constexpr (std::is_same_v<P, CameraSwitch>) {
          j["index"] = p.index;
        } else if constexpr (std::is_same_v<P, Input>) {
          j["input"] = input_command(p.command);
        } else if constexpr (std::is_same_v<P, TrialEnd>) {
          j["reason"] = p.reason;
          j["final_score"] = p.final_score;
        }
      },
      e.payload);
  return j;
}

telemetry::SessionEvent event(const json& j) {
  using namespace telemetry;
  if (!j.is_object()) throw Error("event must be a JSON object");
  const int v = need<int>(j, "v");
  if (v != kSchemaVersion) throw Error("unsupported schema version " + std::to_string(v));
  SessionEvent e;
  e.time = need_finite(j, "time");
  const auto kind = need<std::string>(j, "kind");
  auto subtask = [&](Subtask& s) {
    s.dist = need_finite(j, "dist");
    s.angle_deg = need_finite(j, "angle");
    s.quality = need_finite(j, "q");
    s.score = need_finite(j, "score");
  };
  if (kind == "trial_start") {
    e.payload = TrialStart{trial_config(j.at("config")), need<std::string>(j, "scenario")};
  } else if (kind == "collision") {
    e.payload = Collision{need<std::string>(j, "a"), need<std::string>(j, "b")};
  } else if (kind == "grapple") {
    Grapple g;
    subtask(g);
    e.payload = g;
  } else if (kind == "dock") {
    Dock d;
    subtask(d);
    e.payload = d;
  } else if (kind == "camera_switch") {
    e.payload = CameraSwitch{need<int>(j, "index")};
  } else if (kind == "latch") {
    e.payload = Latch{};
  } else if (kind == "unlatch") {
    e.payload = Unlatch{};
  } else if (kind == "input") {
    if (!j.contains("input")) throw Error("missing field 'input'");
    e.payload = Input{input_command(j.at("input"))};
  } else if (kind == "trial_end") {
    e.payload = TrialEnd{need<std::string>(j, "reason"), need_finite(j, "final_score")};
  } else {
    throw Error("unknown event kind '" + kind + "'");
  }
  return e;
}

}  // namespace oow::codec
