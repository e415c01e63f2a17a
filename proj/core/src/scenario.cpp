#include "oow/scenario.hpp"

#include "json_codec.hpp"
#include "oow/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace oow {

namespace {

using codec::json;

world::Body body_from(const json& j, world::BodyKind kind, const std::string& default_id) {
  world::Body b;
  b.kind = kind;
  b.id = j.value("id", default_id);
  b.pose = codec::pose(j);
  if (j.contains("sphere")) {
    b.shape = world::Sphere{j.at("sphere").get<double>()};
  } else if (j.contains("box")) {
    b.shape = world::Box{codec::vec3(j.at("box"))};
  } else {
    throw Error("body '" + b.id + "' needs a 'sphere' radius or 'box' half extents");
  }
  if (!world::shape_valid(b.shape)) throw Error("body '" + b.id + "' has invalid dimensions");
  return b;
}

json body_to(const world::Body& b) {
  json j = codec::pose(b.pose);
  j["id"] = b.id;
  if (const auto* s = std::get_if<world::Sphere>(&b.shape)) j["sphere"] = s->radius;
  if (const auto* x = std::get_if<world::Box>(&b.shape)) j["box"] = codec::vec3(x->half_extents);
  return j;
}

kinematics::ArmModel arm_from(const json& j, const std::filesystem::path& base_dir) {
  kinematics::ArmModel arm;
  if (j.contains("table")) {
    arm = kinematics::load_arm(base_dir / j.at("table").get<std::string>());
  } else {
    std::vector<double> vmax;
    for (const auto& row : j.at("dh")) {
      if (!row.is_array() || row.size() != 5) throw Error("dh rows are [theta_offset, d, a, alpha, vmax]");
      arm.dh.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                        row[3].get<double>()});
      vmax.push_back(row[4].get<double>());
    }
    arm.max_velocity = Eigen::Map<Eigen::VectorXd>(vmax.data(), static_cast<Eigen::Index>(vmax.size()));
    arm.wrist_rate = j.value("wrist_rate", 0.5);
  }
  if (j.contains("base")) arm.base = codec::pose(j.at("base")).isometry();
  return arm;
}

json arm_to(const kinematics::ArmModel& arm) {
  json rows = json::array();
  for (std::size_t i = 0; i < arm.dh.size(); ++i) {
    const auto& r = arm.dh[i];
    rows.push_back({r.theta_offset, r.d, r.a, r.alpha, arm.max_velocity[static_cast<Eigen::Index>(i)]});
  }
  return {{"dh", rows},
          {"wrist_rate", arm.wrist_rate},
          {"base", codec::pose(kinematics::Pose::from_isometry(arm.base))}};
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    Scenario s;
    s.arm = arm_from(j.at("arm"), base_dir);
    const auto n = static_cast<Eigen::Index>(s.arm.joint_count());
    s.start_joints = Eigen::VectorXd::Zero(n);
    if (j.contains("start_joints")) {
      const auto& q = j.at("start_joints");
      if (q.size() != s.arm.joint_count()) throw Error("start_joints length does not match the arm");
      for (Eigen::Index i = 0; i < n; ++i) s.start_joints[i] = q[static_cast<std::size_t>(i)].get<double>();
    }
    s.link_radius = j.value("link_radius", s.link_radius);
    if (j.contains("ik")) {
      const auto& ik = j.at("ik");
      s.ik.step = ik.value("step", s.ik.step);
      s.ik.eps = ik.value("eps", s.ik.eps);
      s.ik.max_iter = ik.value("max_iter", s.ik.max_iter);
    }
    for (const auto& b : j.value("iss", json::array())) {
      s.iss.push_back(body_from(b, world::BodyKind::Iss, "iss"));
    }
    int k = 1;
    for (const auto& b : j.value("obstacles", json::array())) {
      s.obstacles.push_back(body_from(b, world::BodyKind::Obstacle, "O" + std::to_string(k++)));
    }
    const auto& m = j.at("module");
    s.module = body_from(m, world::BodyKind::Module, "module");
    s.fixture_offset = codec::pose(m.at("fixture"));
    s.dock = codec::pose(j.at("dock"));

    const auto& cams = j.at("cameras");
    if (!cams.is_array() || cams.size() != 4) throw Error("exactly 4 cameras are required");
    for (std::size_t i = 0; i < 4; ++i) {
      auto& c = s.cameras[i];
      const auto& cj = cams[i];
      c.mount = cj.value("mount", control::Camera::kFixed);
      if (c.mount != control::Camera::kFixed && (c.mount < 0 || c.mount > n)) {
        throw Error("camera " + std::to_string(i) + " mount frame out of range");
      }
      c.mount_offset = codec::pose(cj);
      c.pan = cj.value("pan", 0.0);
      c.tilt = cj.value("tilt", 0.0);
    }
    s.initial_camera = j.value("initial_camera", 0);
    if (s.initial_camera < 0 || s.initial_camera > 3) throw Error("initial_camera must be 0..3");
    if (j.contains("control")) {
      const auto& c = j.at("control");
      s.gains.speed = c.value("speed", s.gains.speed);
      s.gains.pan_rate = c.value("pan_rate", s.gains.pan_rate);
      s.gains.deadzone = c.value("deadzone", s.gains.deadzone);
    }
    s.tick_hz = j.value("tick_hz", s.tick_hz);
    s.broadcast_every = j.value("broadcast_every", s.broadcast_every);
    if (s.tick_hz <= 0 || s.broadcast_every <= 0) throw Error("tick_hz and broadcast_every must be positive");
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("scenario schema error: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["arm"] = arm_to(s.arm);
  j["start_joints"] = std::vector<double>(s.start_joints.data(), s.start_joints.data() + s.start_joints.size());
  j["link_radius"] = s.link_radius;
  j["ik"] = {{"step", s.ik.step}, {"eps", s.ik.eps}, {"max_iter", s.ik.max_iter}};
  j["iss"] = json::array();
  for (const auto& b : s.iss) j["iss"].push_back(body_to(b));
  j["obstacles"] = json::array();
  for (const auto& b : s.obstacles) j["obstacles"].push_back(body_to(b));
  j["module"] = body_to(s.module);
  j["module"]["fixture"] = codec::pose(s.fixture_offset);
  j["dock"] = codec::pose(s.dock);
  j["cameras"] = json::array();
  for (const auto& c : s.cameras) {
    json cj = codec::pose(c.mount_offset);
    cj["mount"] = c.mount;
    cj["pan"] = c.pan;
    cj["tilt"] = c.tilt;
    j["cameras"].push_back(cj);
  }
  j["initial_camera"] = s.initial_camera;
  j["control"] = {{"speed", s.gains.speed}, {"pan_rate", s.gains.pan_rate}, {"deadzone", s.gains.deadzone}};
  j["tick_hz"] = s.tick_hz;
  j["broadcast_every"] = s.broadcast_every;
  return j.dump();
}

std::string scenario_hash(const Scenario& scenario) {
  const std::string text = scenario_to_json(scenario);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

kinematics::Pose fixture_pose(const Scenario& scenario, const kinematics::Pose& module_pose) {
  return kinematics::Pose::from_isometry(module_pose.isometry() * scenario.fixture_offset.isometry());
}

}  // namespace oow
