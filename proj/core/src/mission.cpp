#include "oow/mission.hpp"

#include "oow/error.hpp"

#include <array>
#include <cmath>
#include <random>

namespace oow::mission {

namespace {

// Unbiased draw in [0, n) straight from the engine's output, so the
// protocol order does not depend on the standard library's distributions.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

template <typename T, std::size_t N>
void shuffle(std::array<T, N>& items, std::mt19937_64& rng) {
  for (std::size_t i = N - 1; i > 0; --i) {
    std::swap(items[i], items[draw_below(rng, i + 1)]);
  }
}

}  // namespace

std::string_view block_name(Block b) {
  switch (b) {
    case Block::Familiarisation: return "familiarisation";
    case Block::TimePressure: return "tp_block";
    case Block::Latency: return "latency_block";
  }
  return "?";
}

std::optional<Block> block_from_name(std::string_view name) {
  for (Block b : {Block::Familiarisation, Block::TimePressure, Block::Latency}) {
    if (block_name(b) == name) return b;
  }
  return std::nullopt;
}

double quality_score(double dist, double theta_deg) {
  if (!(dist >= 0.0) || !(theta_deg >= 0.0) || theta_deg > 180.0) {
    throw ParameterError("quality_score needs dist >= 0 and theta in [0, 180]");
  }
  return 100.0 / (dist + 0.1) + 5000.0 / (theta_deg + 5.0);
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::Approach: return "Approach";
    case Phase::Grappled: return "Grappled";
    case Phase::Docked: return "Docked";
    case Phase::TimedOut: return "TimedOut";
  }
  return "?";
}

double score_of(const TaskState& s) {
  double q = 0.0;
  if (s.grapple) q += s.grapple->quality;
  if (s.dock) q += s.dock->quality;
  return kStartScore - kDecayPoints * std::floor(s.elapsed / kDecayPeriod) -
         kCollisionPenalty * s.collisions + q;
}

Attempt try_grapple(const kinematics::Pose& ee, const kinematics::Pose& fixture, TaskState state) {
  if (state.phase != Phase::Approach) throw StateError("grapple requires the Approach phase");
  const double dist = (ee.position - fixture.position).norm();
  if (dist > kGrappleRadius) return {state, false};
  const double angle = kinematics::angular_distance_deg(ee.orientation, fixture.orientation);
  state.grapple = SubtaskEvent{state.elapsed, dist, angle, quality_score(dist, angle)};
  state.phase = Phase::Grappled;
  state.score = score_of(state);
  return {state, true};
}

Attempt try_dock(const kinematics::Pose& module, const kinematics::Pose& dock, TaskState state) {
  if (state.phase != Phase::Grappled) throw StateError("dock requires the Grappled phase");
  const double dist = (module.position - dock.position).norm();
  if (dist > kDockRadius) return {state, false};
  const double angle = kinematics::angular_distance_deg(module.orientation, dock.orientation);
  state.dock = SubtaskEvent{state.elapsed, dist, angle, quality_score(dist, angle)};
  state.phase = Phase::Docked;
  state.score = score_of(state);
  return {state, true};
}

bool finished(const TaskState& state) {
  return state.phase == Phase::Docked || state.phase == Phase::TimedOut;
}

TaskState set_clock(TaskState state, double elapsed) {
  if (finished(state)) return state;
  state.elapsed = elapsed;
  state.score = score_of(state);
  return state;
}

TaskState tick_score(TaskState state, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  return set_clock(state, state.elapsed + dt);
}

TaskState add_collision(TaskState state) {
  if (finished(state)) return state;
  ++state.collisions;
  state.score = score_of(state);
  return state;
}

TaskState check_timeout(TaskState state, bool time_pressure) {
  if (finished(state) || !time_pressure) return state;
  if (state.elapsed >= kTimeLimit) state.phase = Phase::TimedOut;
  return state;
}

std::string_view timer_name(TimerColor c) {
  switch (c) {
    case TimerColor::White: return "white";
    case TimerColor::Yellow: return "yellow";
    case TimerColor::Red: return "red";
    case TimerColor::Expired: return "expired";
  }
  return "?";
}

TimerColor timer_state(double elapsed, bool time_pressure) {
  if (!(elapsed >= 0.0)) throw ParameterError("elapsed must be >= 0");
  if (!time_pressure) return TimerColor::White;
  if (elapsed >= kTimeLimit) return TimerColor::Expired;
  if (elapsed >= kRedAt) return TimerColor::Red;
  if (elapsed >= kYellowAt) return TimerColor::Yellow;
  return TimerColor::White;
}

std::vector<TrialConfig> generate_protocol(std::uint64_t seed, const ProtocolOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<TrialConfig> out;
  int index = 0;
  auto add = [&](double latency, bool tp, bool obstacles, Block block) {
    out.push_back(TrialConfig{latency, tp, obstacles, block, index++, seed});
  };

  for (int i = 0; i < options.familiarisation_runs; ++i) add(0.0, false, false, Block::Familiarisation);
  add(0.0, false, true, Block::Familiarisation);

  enum class Cond { Tp, Lat, Neither };
  for (int rep = 0; rep < 3; ++rep) {
    std::array<Cond, 3> order = {Cond::Tp, Cond::Lat, Cond::Neither};
    shuffle(order, rng);
    for (Cond c : order) {
      add(c == Cond::Lat ? 0.5 : 0.0, c == Cond::Tp, true, Block::TimePressure);
    }
  }

  for (bool tp : {false, true}) {
    std::array<double, 3> lat = {0.5, 1.0, 1.5};
    shuffle(lat, rng);
    for (double l : lat) add(l, tp, true, Block::Latency);
  }
  return out;
}

}  // namespace oow::mission
