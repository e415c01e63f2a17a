#include "oow/telemetry.hpp"

#include "json_codec.hpp"
#include "oow/error.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace oow::telemetry {

std::string_view SessionEvent::kind() const {
  static constexpr std::string_view kNames[] = {"trial_start", "collision", "grapple",
                                                "dock",        "camera_switch", "latch",
                                                "unlatch",     "input",     "trial_end"};
  return kNames[payload.index()];
}

bool SessionLog::ended() const {
  return !events_.empty() && std::holds_alternative<TrialEnd>(events_.back().payload);
}

void SessionLog::append(SessionEvent event) {
  const bool is_start = std::holds_alternative<TrialStart>(event.payload);
  if (events_.empty() && !is_start) throw StateError("first event must be trial_start");
  if (!events_.empty() && is_start) throw StateError("trial already started");
  if (ended()) throw StateError("trial already ended");
  if (!std::isfinite(event.time)) throw OrderingError("event time is not finite");
  if (!events_.empty() && event.time < events_.back().time) {
    throw OrderingError("event time " + std::to_string(event.time) + " precedes " +
                        std::to_string(events_.back().time));
  }
  events_.push_back(std::move(event));
  if (sink_) {
    *sink_ << to_json_line(events_.back()) << '\n';
    sink_->flush();
  }
}

std::string to_json_line(const SessionEvent& event) { return codec::event(event).dump(); }

SessionEvent parse_json_line(const std::string& line, std::size_t lineno) {
  codec::json j;
  try {
    j = codec::json::parse(line);
  } catch (const codec::json::parse_error& e) {
    throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
  }
  try {
    return codec::event(j);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(lineno, e.what());
  } catch (const codec::json::exception& e) {
    throw ParseError(lineno, e.what());
  }
}

std::string export_log(const SessionLog& log) {
  std::string out;
  for (const auto& e : log.events()) {
    out += to_json_line(e);
    out += '\n';
  }
  return out;
}

SessionLog import_log(const std::string& text) {
  SessionLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SessionEvent e = parse_json_line(line, lineno);
    try {
      log.append(std::move(e));
    } catch (const Error& err) {
      throw ParseError(lineno, err.what());
    }
  }
  if (!log.started()) throw ParseError(lineno, "log has no trial_start");
  // A file written incrementally always ends in a newline; anything else
  // means the last record was cut off.
  if (!text.empty() && text.back() != '\n') throw ParseError(lineno, "truncated final line");
  return log;
}

SessionLog read_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return import_log(buf.str());
}

void write_log_file(const SessionLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << export_log(log);
}

const std::vector<MeasureInfo>& measure_catalog() {
  static const std::vector<MeasureInfo> kCatalog = {
      {"grasp_time", "eff"},      {"dock_time", "eff"},     {"grasp_distance", "prec"},
      {"grasp_angle", "prec"},    {"dock_distance", "prec"}, {"dock_angle", "prec"},
      {"grasp_score", "score"},   {"dock_score", "score"},   {"final_score", "score"},
      {"n_collisions", "coll"},
  };
  return kCatalog;
}

std::optional<double> measure_value(const PerformanceRecord& r, std::string_view name) {
  if (name == "grasp_time") return r.grasp_time;
  if (name == "dock_time") return r.dock_time;
  if (name == "grasp_distance") return r.grasp_distance;
  if (name == "grasp_angle") return r.grasp_angle;
  if (name == "dock_distance") return r.dock_distance;
  if (name == "dock_angle") return r.dock_angle;
  if (name == "grasp_score") return r.grasp_score;
  if (name == "dock_score") return r.dock_score;
  if (name == "final_score") return r.final_score;
  if (name == "n_collisions") return static_cast<double>(r.n_collisions);
  throw Error("unknown measure '" + std::string(name) + "'");
}

PerformanceRecord extract_performance(const SessionLog& log) {
  const auto& ev = log.events();
  if (ev.empty() || !std::holds_alternative<TrialStart>(ev.front().payload)) {
    throw ParseError(1, "log does not begin with trial_start");
  }
  const double start = ev.front().time;
  PerformanceRecord r;
  std::optional<double> grapple_time;
  for (const auto& e : ev) {
    if (const auto* g = std::get_if<Grapple>(&e.payload)) {
      grapple_time = e.time;
      r.grasp_time = e.time - start;
      r.grasp_distance = g->dist;
      r.grasp_angle = g->angle_deg;
      r.grasp_score = g->score;
    } else if (const auto* d = std::get_if<Dock>(&e.payload)) {
      if (grapple_time) r.dock_time = e.time - *grapple_time;
      r.dock_distance = d->dist;
      r.dock_angle = d->angle_deg;
      r.dock_score = d->score;
    } else if (std::holds_alternative<Collision>(e.payload)) {
      ++r.n_collisions;
    } else if (const auto* end = std::get_if<TrialEnd>(&e.payload)) {
      r.final_score = end->final_score;
    }
  }
  return r;
}

double recompute_score(const SessionLog& log) {
  const auto& ev = log.events();
  if (ev.empty()) throw StateError("empty log");
  double q = 0.0;
  int collisions = 0;
  for (const auto& e : ev) {
    if (const auto* g = std::get_if<Grapple>(&e.payload)) q += g->quality;
    if (const auto* d = std::get_if<Dock>(&e.payload)) q += d->quality;
    if (std::holds_alternative<Collision>(e.payload)) ++collisions;
  }
  const double elapsed = ev.back().time - ev.front().time;
  return mission::kStartScore - mission::kDecayPoints * std::floor(elapsed / mission::kDecayPeriod) -
         mission::kCollisionPenalty * collisions + q;
}

}  // namespace oow::telemetry
