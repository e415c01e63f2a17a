#include "oow/engine.hpp"

#include "oow/error.hpp"

#include <algorithm>

namespace oow {

using kinematics::Pose;

Engine::Engine(Scenario scenario, mission::TrialConfig config, std::ostream* log_sink)
    : scenario_(std::move(scenario)),
      config_(config),
      hash_(oow::scenario_hash(scenario_)),
      queue_(config.latency),
      module_(scenario_.module),
      obstacles_(config.obstacles ? scenario_.obstacles : std::vector<world::Body>{}),
      log_(log_sink) {
  if (static_cast<std::size_t>(scenario_.start_joints.size()) != scenario_.arm.joint_count()) {
    throw DimensionError("start_joints does not match the arm");
  }
  joints_.angles = scenario_.start_joints;
  rig_.cameras = scenario_.cameras;
  rig_.selected = scenario_.initial_camera;
  refresh_kinematics();
  target_ = ee_.position;
  log_.append({0.0, telemetry::TrialStart{config_, hash_}});
}

double Engine::time() const { return static_cast<double>(tick_) / scenario_.tick_hz; }

Pose Engine::fixture() const { return fixture_pose(scenario_, module_.pose); }

void Engine::refresh_kinematics() {
  auto fk = kinematics::forward_kinematics(scenario_.arm, joints_);
  frames_ = std::move(fk.frames);
  ee_ = fk.end_effector;
  control::update_rig(rig_, frames_);
  if (attachment_.attached()) module_.pose = attachment_.follow(ee_);
}

void Engine::submit(const control::InputCommand& cmd) {
  if (finished()) throw StateError("trial has ended");
  queue_.push(cmd);
  log_.append({time(), telemetry::Input{cmd}});
}

void Engine::end(const std::string& reason) {
  if (!finished()) finish(reason);
}

void Engine::finish(const std::string& reason) {
  log_.append({time(), telemetry::TrialEnd{reason, task_.score}});
}

void Engine::handle_edges(const control::InputCommand& cmd) {
  const auto delta = control::map_input(cmd, rig_, dt(), scenario_.gains, held_);
  if (delta.camera_cycle != 0) {
    rig_.selected = ((rig_.selected + delta.camera_cycle) % 4 + 4) % 4;
    log_.append({time(), telemetry::CameraSwitch{rig_.selected}});
  }
  if (delta.latch == control::Latch::Grapple && task_.phase == mission::Phase::Approach) {
    auto attempt = mission::try_grapple(ee_, fixture(), task_);
    if (attempt.accepted) {
      task_ = attempt.state;
      attachment_.attach(ee_, module_);
      const auto& g = *task_.grapple;
      log_.append({time(), telemetry::Latch{}});
      log_.append({time(), telemetry::Grapple{{g.dist, g.angle_deg, g.quality, task_.score}}});
    }
  } else if (delta.latch == control::Latch::Release && task_.phase == mission::Phase::Grappled) {
    auto attempt = mission::try_dock(module_.pose, scenario_.dock, task_);
    if (attempt.accepted) {
      task_ = attempt.state;
      attachment_.detach();
      const auto& d = *task_.dock;
      log_.append({time(), telemetry::Unlatch{}});
      log_.append({time(), telemetry::Dock{{d.dist, d.angle_deg, d.quality, task_.score}}});
    }
  }
}

void Engine::move(double /*now*/) {
  const double h = dt();
  // Edges were consumed when the command was released.
  const auto delta = control::map_input(active_, rig_, h, scenario_.gains, active_.buttons);

  auto& cam = rig_.cameras[static_cast<std::size_t>(rig_.selected)];
  cam.pan += delta.pan_delta;
  cam.tilt += delta.tilt_delta;
  target_ += delta.target_delta;

  const Eigen::VectorXd before = joints_.angles;
  kinematics::IkOptions ik = scenario_.ik;
  ik.dt = h;
  joints_ = kinematics::solve_ik(scenario_.arm, target_, joints_, ik).joints;
  if (scenario_.arm.joint_count() >= 7) {
    joints_ = kinematics::apply_wrist(scenario_.arm, joints_, delta.wrist, h);
  }
  const Eigen::VectorXd cap = scenario_.arm.max_velocity * h;
  joints_.angles = before + (joints_.angles - before).cwiseMax(-cap).cwiseMin(cap);
  refresh_kinematics();
}

std::vector<world::Body> Engine::scene_bodies() const {
  std::vector<world::Body> bodies;
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    const Eigen::Vector3d p0 = frames_[i - 1].translation();
    const Eigen::Vector3d p1 = frames_[i].translation();
    if ((p1 - p0).norm() < 1e-9) continue;
    world::Body link;
    link.id = "link" + std::to_string(i);
    link.kind = world::BodyKind::ArmLink;
    link.shape = world::Capsule{scenario_.link_radius, p0, p1};
    bodies.push_back(std::move(link));
  }
  bodies.push_back(module_);
  for (const auto& b : scenario_.iss) bodies.push_back(b);
  for (const auto& b : obstacles_) bodies.push_back(b);
  return bodies;
}

void Engine::collide(double now) {
  world::integrate(obstacles_, dt());
  auto bodies = scene_bodies();
  const auto contacts = monitor_.detect(bodies, now);
  auto by_id = [&](const std::string& id) -> const world::Body& {
    return *std::find_if(bodies.begin(), bodies.end(), [&](const auto& b) { return b.id == id; });
  };
  for (const auto& c : contacts) {
    world::resolve_contact(c, bodies, dt());
    if (c.is_new && world::pair_scored(by_id(c.body_a), by_id(c.body_b))) {
      task_ = mission::add_collision(task_);
      log_.append({now, telemetry::Collision{c.body_a, c.body_b}});
    }
  }
  for (auto& ob : obstacles_) {
    ob.velocity = by_id(ob.id).velocity;
  }
}

void Engine::step() {
  if (finished()) return;
  ++tick_;
  const double now = time();
  task_ = mission::set_clock(task_, now);

  for (const auto& cmd : queue_.pop_ready(now)) {
    handle_edges(cmd);
    held_ = cmd.buttons;
    active_ = cmd;
    if (mission::finished(task_)) break;
  }
  if (task_.phase == mission::Phase::Docked) {
    finish("docked");
    return;
  }

  move(now);
  collide(now);

  task_ = mission::check_timeout(task_, config_.time_pressure);
  if (task_.phase == mission::Phase::TimedOut) finish("timeout");
}

Snapshot Engine::snapshot() const {
  Snapshot s;
  s.time = time();
  s.joints.assign(joints_.angles.data(), joints_.angles.data() + joints_.angles.size());
  s.ee = ee_;
  s.target = target_;
  s.bodies.push_back({module_.id, module_.pose});
  for (const auto& b : obstacles_) s.bodies.push_back({b.id, b.pose});
  for (std::size_t i = 0; i < 4; ++i) s.cameras[i] = rig_.cameras[i].pose;
  s.selected = rig_.selected;
  s.score = task_.score;
  s.timer = mission::timer_state(task_.elapsed, config_.time_pressure);
  s.phase = task_.phase;
  s.attached = attachment_.attached();
  return s;
}

std::vector<telemetry::SessionEvent> Engine::events_since(std::size_t index) const {
  const auto& ev = log_.events();
  if (index >= ev.size()) return {};
  return {ev.begin() + static_cast<std::ptrdiff_t>(index), ev.end()};
}

}  // namespace oow
