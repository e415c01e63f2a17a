#pragma once

#include "oow/control.hpp"
#include "oow/mission.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace oow::telemetry {

inline constexpr int kSchemaVersion = 1;

struct TrialStart {
  mission::TrialConfig config;
  std::string scenario_hash;
  friend bool operator==(const TrialStart&, const TrialStart&) = default;
};
struct Collision {
  std::string body_a;
  std::string body_b;
  friend bool operator==(const Collision&, const Collision&) = default;
};
/// Grapple or dock outcome. `score` is the cumulative score right after it.
struct Subtask {
  double dist = 0.0;
  double angle_deg = 0.0;
  double quality = 0.0;
  double score = 0.0;
  friend bool operator==(const Subtask&, const Subtask&) = default;
};
struct Grapple : Subtask {};
struct Dock : Subtask {};
struct CameraSwitch {
  int index = 0;
  friend bool operator==(const CameraSwitch&, const CameraSwitch&) = default;
};
struct Latch {
  friend bool operator==(const Latch&, const Latch&) = default;
};
struct Unlatch {
  friend bool operator==(const Unlatch&, const Unlatch&) = default;
};
/// A command as it entered the delay queue; `time` of the event is the
/// engine time at arrival. Recorded so sessions can be replayed.
struct Input {
  control::InputCommand command;
  friend bool operator==(const Input&, const Input&) = default;
};
struct TrialEnd {
  std::string reason;  // docked | timeout | disconnect | script_end | max_time | aborted
  double final_score = 0.0;
  friend bool operator==(const TrialEnd&, const TrialEnd&) = default;
};

using Payload =
    std::variant<TrialStart, Collision, Grapple, Dock, CameraSwitch, Latch, Unlatch, Input, TrialEnd>;

struct SessionEvent {
  double time = 0.0;
  Payload payload;

  std::string_view kind() const;
  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

/// Append-only event log for one trial. Optionally mirrors every appended
/// line to a stream and flushes it.
class SessionLog {
 public:
  SessionLog() = default;
  explicit SessionLog(std::ostream* sink) : sink_(sink) {}

  /// Throws OrderingError on time regression and StateError on lifecycle
  /// violations (missing trial_start, a second start, events after end).
  void append(SessionEvent event);

  const std::vector<SessionEvent>& events() const { return events_; }
  bool started() const { return !events_.empty(); }
  bool ended() const;
  void set_sink(std::ostream* sink) { sink_ = sink; }

  friend bool operator==(const SessionLog& a, const SessionLog& b) { return a.events_ == b.events_; }

 private:
  std::vector<SessionEvent> events_;
  std::ostream* sink_ = nullptr;
};

std::string to_json_line(const SessionEvent& event);
SessionEvent parse_json_line(const std::string& line, std::size_t lineno);

std::string export_log(const SessionLog& log);
/// Throws ParseError carrying the 1-based line number.
SessionLog import_log(const std::string& text);
SessionLog read_log_file(const std::string& path);
void write_log_file(const SessionLog& log, const std::string& path);

struct PerformanceRecord {
  std::optional<double> grasp_time;
  std::optional<double> dock_time;
  std::optional<double> grasp_distance;
  std::optional<double> grasp_angle;
  std::optional<double> dock_distance;
  std::optional<double> dock_angle;
  std::optional<double> grasp_score;
  std::optional<double> dock_score;
  std::optional<double> final_score;
  int n_collisions = 0;

  friend bool operator==(const PerformanceRecord&, const PerformanceRecord&) = default;
};

/// Measure names in table order, with their category (eff/prec/score/coll).
struct MeasureInfo {
  const char* name;
  const char* category;
};
const std::vector<MeasureInfo>& measure_catalog();
std::optional<double> measure_value(const PerformanceRecord& r, std::string_view name);

PerformanceRecord extract_performance(const SessionLog& log);

/// Score reconstructed from the logged events alone.
double recompute_score(const SessionLog& log);

}  // namespace oow::telemetry
