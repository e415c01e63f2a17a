#pragma once

#include "oow/control.hpp"
#include "oow/kinematics.hpp"
#include "oow/world.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace oow {

/// Everything about the scene that does not change between trials: arm
/// geometry, ISS hull, obstacles O1-O3, research module, dock, cameras and
/// control gains. Loaded from a JSON scenario file (docs/scenario.md).
struct Scenario {
  kinematics::ArmModel arm;
  Eigen::VectorXd start_joints;
  double link_radius = 0.2;
  kinematics::IkOptions ik;

  std::vector<world::Body> iss;        // boxes
  std::vector<world::Body> obstacles;  // spheres
  world::Body module;                  // box
  kinematics::Pose fixture_offset;     // grapple fixture in the module frame
  kinematics::Pose dock;               // ideal module pose at the dock

  std::array<control::Camera, 4> cameras;
  int initial_camera = 0;
  control::ControlGains gains;

  int tick_hz = 50;
  int broadcast_every = 2;  // snapshots per tick divisor (50 Hz -> 25 Hz)
};

Scenario parse_scenario(const std::string& json_text,
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
/// Canonical JSON with the arm table inlined; the hash is computed over it.
std::string scenario_to_json(const Scenario& scenario);
/// FNV-1a 64 over the canonical JSON, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

kinematics::Pose fixture_pose(const Scenario& scenario, const kinematics::Pose& module_pose);

}  // namespace oow
