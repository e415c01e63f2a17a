#pragma once

#include "oow/control.hpp"
#include "oow/mission.hpp"
#include "oow/scenario.hpp"
#include "oow/telemetry.hpp"
#include "oow/world.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oow {

struct BodyPose {
  std::string id;
  kinematics::Pose pose;
};

/// Immutable view of the engine after a tick, as broadcast to the cockpit.
struct Snapshot {
  double time = 0.0;
  std::vector<double> joints;
  kinematics::Pose ee;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  std::vector<BodyPose> bodies;
  std::array<kinematics::Pose, 4> cameras;
  int selected = 0;
  double score = 0.0;
  mission::TimerColor timer = mission::TimerColor::White;
  mission::Phase phase = mission::Phase::Approach;
  bool attached = false;
};

/// One trial of the teleoperation task on a fixed timestep. All inputs go
/// through the latency queue; the session log records both the inputs and
/// everything that happened, so a run is reproducible from the log alone.
class Engine {
 public:
  Engine(Scenario scenario, mission::TrialConfig config, std::ostream* log_sink = nullptr);

  std::int64_t tick() const { return tick_; }
  double time() const;
  double dt() const { return 1.0 / scenario_.tick_hz; }

  /// Queue a command; it is logged as an input event at the current time.
  /// Throws OrderingError for a non-increasing seq.
  void submit(const control::InputCommand& cmd);
  /// Advance one tick. No-op once the trial has ended.
  void step();
  bool finished() const { return log_.ended(); }
  /// End the trial for an external reason (disconnect, script_end, ...).
  void end(const std::string& reason);

  Snapshot snapshot() const;
  /// Events appended since the given index (for streaming to a client).
  std::vector<telemetry::SessionEvent> events_since(std::size_t index) const;

  const telemetry::SessionLog& log() const { return log_; }
  const mission::TaskState& task() const { return task_; }
  const mission::TrialConfig& config() const { return config_; }
  const Scenario& scenario() const { return scenario_; }
  const std::string& scenario_hash() const { return hash_; }

  const control::CameraRig& rig() const { return rig_; }
  const kinematics::JointState& joints() const { return joints_; }
  const kinematics::Pose& ee() const { return ee_; }
  const Eigen::Vector3d& target() const { return target_; }
  const world::Body& module() const { return module_; }
  const std::vector<world::Body>& obstacles() const { return obstacles_; }
  const world::ModuleAttachment& attachment() const { return attachment_; }
  kinematics::Pose fixture() const;

 private:
  void refresh_kinematics();
  void handle_edges(const control::InputCommand& cmd);
  void move(double now);
  void collide(double now);
  void finish(const std::string& reason);
  std::vector<world::Body> scene_bodies() const;

  Scenario scenario_;
  mission::TrialConfig config_;
  std::string hash_;

  std::int64_t tick_ = 0;
  control::DelayQueue queue_;
  control::InputCommand active_;  // controller state currently in effect
  control::ButtonSet held_;

  kinematics::JointState joints_;
  std::vector<Eigen::Isometry3d> frames_;
  kinematics::Pose ee_;
  Eigen::Vector3d target_;
  control::CameraRig rig_;

  world::Body module_;
  std::vector<world::Body> obstacles_;
  world::ModuleAttachment attachment_;
  world::CollisionMonitor monitor_;

  mission::TaskState task_;
  telemetry::SessionLog log_;
};

}  // namespace oow
