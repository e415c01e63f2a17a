#pragma once

#include "oow/engine.hpp"
#include "oow/error.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace oow::gateway {

// Wire messages (text frames, one JSON object each).
std::string state_message(const Snapshot& snapshot);
std::string event_message(const telemetry::SessionEvent& event);
std::string error_message(const std::string& msg);
/// Decodes {"t":"input",...}; throws Error describing the problem.
control::InputCommand parse_input_message(const std::string& text);

/// Where a waypoint lives. `Fixture` is the grapple fixture, `Dock` the
/// end-effector position that puts the grappled module on the dock, `Start`
/// the initial end-effector position.
enum class Anchor { World, Fixture, Dock, Start };

struct Waypoint {
  Anchor anchor = Anchor::World;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  double dwell = 0.0;        // s of neutral input after arrival
  double tolerance = 0.05;   // m
};
struct GrappleStep {};
struct ReleaseStep {};
struct CameraStep {
  int select = 0;
};
struct IdleStep {
  double seconds = 0.0;
};
struct WristStep {
  kinematics::WristCommand command;
  double seconds = 0.0;
};

using PilotStep = std::variant<Waypoint, GrappleStep, ReleaseStep, CameraStep, IdleStep, WristStep>;

struct PilotScript {
  std::vector<PilotStep> steps;
  double max_time = 600.0;  // s; the run ends with reason max_time here
};

PilotScript parse_pilot(const std::string& json_text);
PilotScript load_pilot(const std::filesystem::path& path);

struct HeadlessOptions {
  bool record_snapshots = false;
  int snapshot_every = 1;  // ticks
  std::ostream* log_sink = nullptr;
};

struct HeadlessResult {
  telemetry::SessionLog log;
  std::vector<Snapshot> snapshots;
};

/// Drives an engine with a scripted pilot on simulated time. The pilot
/// only produces controller samples (in the selected camera's frame) and
/// sends one whenever the sample changes.
HeadlessResult run_headless(const Scenario& scenario, const mission::TrialConfig& config,
                            const PilotScript& script, const HeadlessOptions& options = {});

class ReplayRefused : public Error {
 public:
  using Error::Error;
};

/// Re-executes the recorded inputs. Throws ReplayRefused when the config
/// or scenario hash differs from the one in the log's trial_start.
telemetry::SessionLog replay(const telemetry::SessionLog& recorded, const Scenario& scenario,
                             const mission::TrialConfig& config);

/// The trial config stored in a log.
mission::TrialConfig logged_config(const telemetry::SessionLog& log);

}  // namespace oow::gateway
