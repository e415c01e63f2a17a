#pragma once

#include "oow/kinematics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oow::mission {

enum class Block { Familiarisation, TimePressure, Latency };

std::string_view block_name(Block b);
std::optional<Block> block_from_name(std::string_view name);

/// Confound settings for one trial.
struct TrialConfig {
  double latency = 0.0;  // s, any value >= 0
  bool time_pressure = false;
  bool obstacles = true;
  Block block = Block::TimePressure;
  int trial_index = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

// Scoring constants.
inline constexpr double kStartScore = 300.0;
inline constexpr double kDecayPoints = 10.0;
inline constexpr double kDecayPeriod = 10.0;  // s
inline constexpr double kCollisionPenalty = 100.0;
inline constexpr double kGrappleRadius = 1.0;  // m, inclusive
inline constexpr double kDockRadius = 3.0;     // m, inclusive
inline constexpr double kTimeLimit = 240.0;    // s, under time pressure
inline constexpr double kYellowAt = 180.0;
inline constexpr double kRedAt = 210.0;

/// Connection quality: 100 / (dist + 0.1) + 5000 / (theta_deg + 5).
double quality_score(double dist, double theta_deg);

enum class Phase { Approach, Grappled, Docked, TimedOut };

std::string_view phase_name(Phase p);

struct SubtaskEvent {
  double time = 0.0;
  double dist = 0.0;
  double angle_deg = 0.0;
  double quality = 0.0;
};

struct TaskState {
  Phase phase = Phase::Approach;
  double score = kStartScore;
  double elapsed = 0.0;
  std::optional<SubtaskEvent> grapple;
  std::optional<SubtaskEvent> dock;
  int collisions = 0;
};

/// 300 - 10 floor(elapsed / 10) - 100 collisions + sum of Q.
double score_of(const TaskState& state);

struct Attempt {
  TaskState state;
  bool accepted = false;
};

/// Throws StateError unless phase is Approach.
Attempt try_grapple(const kinematics::Pose& ee, const kinematics::Pose& fixture, TaskState state);
/// Throws StateError unless phase is Grappled.
Attempt try_dock(const kinematics::Pose& module, const kinematics::Pose& dock, TaskState state);

/// Advance the clock by dt. Frozen once the trial has ended.
TaskState tick_score(TaskState state, double dt);
/// Same as tick_score but sets the clock directly (the engine derives time
/// from an integer tick count to avoid drift).
TaskState set_clock(TaskState state, double elapsed);
TaskState add_collision(TaskState state);
/// Moves to TimedOut when time pressure is on and the limit is reached.
TaskState check_timeout(TaskState state, bool time_pressure);

bool finished(const TaskState& state);

enum class TimerColor { White, Yellow, Red, Expired };

std::string_view timer_name(TimerColor c);
TimerColor timer_state(double elapsed, bool time_pressure);

struct ProtocolOptions {
  int familiarisation_runs = 1;  // runs without obstacles before the obstacle run
};

/// Familiarisation runs, then the time-pressure block (three shuffled
/// repetitions of {TP, 0.5 s, neither}), then the latency block (shuffled
/// {0.5, 1.0, 1.5} without TP, then a fresh shuffle with TP).
std::vector<TrialConfig> generate_protocol(std::uint64_t seed, const ProtocolOptions& options = {});

}  // namespace oow::mission
