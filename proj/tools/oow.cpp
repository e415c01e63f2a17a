// oow: command line front end for the simulator and the analysis toolkit.

#include "oow/dsp.hpp"
#include "oow/engine.hpp"
#include "oow/gateway.hpp"
#include "oow/mission.hpp"
#include "oow/riemann.hpp"
#include "oow/scenario.hpp"
#include "oow/server.hpp"
#include "oow/stats.hpp"
#include "oow/synthgen.hpp"
#include "oow/telemetry.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oow;

namespace {

struct TrialArgs {
  double latency = 0.0;
  bool tp = false;
  bool no_obstacles = false;
  int trial_index = 0;
  std::uint64_t seed = 0;
  std::string block = "tp_block";

  mission::TrialConfig config() const {
    mission::TrialConfig c;
    c.latency = latency;
    c.time_pressure = tp;
    c.obstacles = !no_obstacles;
    c.trial_index = trial_index;
    c.seed = seed;
    const auto b = mission::block_from_name(block);
    if (!b) throw ParameterError("unknown block '" + block + "'");
    c.block = *b;
    return c;
  }
};

/// Scenario used when --scenario is not given: $OOW_CONFIG_DIR, then
/// ./config, then the installed copy, then the source tree.
std::string default_scenario() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("OOW_CONFIG_DIR")) dirs.emplace_back(env);
  dirs.emplace_back("config");
  dirs.emplace_back(OOW_INSTALLED_CONFIG_DIR);
  dirs.emplace_back(OOW_SOURCE_CONFIG_DIR);
  for (const auto& d : dirs) {
    if (fs::exists(d / "scenario.json")) return (d / "scenario.json").string();
  }
  return "config/scenario.json";
}

void add_trial_options(CLI::App* cmd, TrialArgs& t) {
  cmd->add_option("--latency", t.latency, "Injected command latency in seconds")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--tp", t.tp, "Enable the 4 minute time limit");
  cmd->add_flag("--no-obstacles", t.no_obstacles, "Remove obstacles O1-O3");
  cmd->add_option("--trial-index", t.trial_index, "Trial index recorded in the log");
  cmd->add_option("--seed", t.seed, "Trial seed recorded in the log");
  cmd->add_option("--block", t.block, "familiarisation | tp_block | latency_block");
}

json metrics_json(const riemann::ClassMetrics& m) {
  json conf = json::array();
  for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) row.push_back(m.confusion(r, c));
    conf.push_back(row);
  }
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}, {"classes", m.classes}, {"confusion", conf}};
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

dsp::ChannelConfig resolve_channels(const std::string& name, const std::string& presets_file) {
  const auto presets = presets_file.empty() ? dsp::default_channel_presets() : dsp::load_channel_presets(presets_file);
  if (name.find(',') != std::string::npos) {
    dsp::ChannelConfig custom{"custom", {}};
    std::stringstream ss(name);
    std::string item;
    while (std::getline(ss, item, ',')) custom.channels.push_back(item);
    return custom;
  }
  return dsp::find_preset(presets, name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oow: teleoperation simulator and workload analysis"};
  app.require_subcommand(1);

  // serve ---------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "Run one live session over WebSocket");
  std::string serve_scenario = default_scenario();
  std::string serve_log;
  int port = gateway::default_port();
  double serve_max_time = 0.0;
  TrialArgs serve_trial;
  serve->add_option("--scenario", serve_scenario, "Scenario JSON")->check(CLI::ExistingFile);
  serve->add_option("--port", port, "Listen port (0 picks one; default OOW_PORT or 8765)")->check(CLI::Range(0, 65535));
  serve->add_option("--log", serve_log, "Session log output (JSON Lines)");
  serve->add_option("--max-time", serve_max_time, "End the trial after this many seconds (0 = never)");
  add_trial_options(serve, serve_trial);

  // headless ------------------------------------------------------------
  auto* headless = app.add_subcommand("headless", "Run a scripted pilot on simulated time");
  std::string hl_scenario = default_scenario();
  std::string pilot, hl_out, hl_snapshots;
  int snapshot_every = 1;
  TrialArgs hl_trial;
  headless->add_option("--scenario", hl_scenario, "Scenario JSON")->check(CLI::ExistingFile);
  headless->add_option("--pilot", pilot, "Pilot script JSON")->required()->check(CLI::ExistingFile);
  headless->add_option("--out", hl_out, "Session log output")->required();
  headless->add_option("--snapshots", hl_snapshots, "Optional snapshot stream (JSON Lines)");
  headless->add_option("--snapshot-every", snapshot_every, "Ticks between recorded snapshots")->check(CLI::PositiveNumber);
  add_trial_options(headless, hl_trial);

  // replay --------------------------------------------------------------
  auto* replay = app.add_subcommand("replay", "Re-execute the inputs of a recorded session");
  std::string rp_in, rp_scenario = default_scenario(), rp_out;
  replay->add_option("--in", rp_in, "Recorded session log")->required()->check(CLI::ExistingFile);
  replay->add_option("--scenario", rp_scenario, "Scenario JSON used for the recording")->check(CLI::ExistingFile);
  replay->add_option("--out", rp_out, "Write the replayed log here");

  // protocol ------------------------------------------------------------
  auto* protocol = app.add_subcommand("protocol", "Print the trial sequence for one subject");
  std::uint64_t protocol_seed = 0;
  int fam_runs = 1;
  protocol->add_option("--seed", protocol_seed, "Shuffle seed");
  protocol->add_option("--fam-runs", fam_runs, "Familiarisation runs without obstacles")->check(CLI::NonNegativeNumber);

  // analyze -------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "EEG and performance analysis");
  analyze->require_subcommand(1);
  std::string presets_file;
  analyze->add_option("--presets", presets_file, "Channel preset file (default: built-in presets)");

  auto* pre = analyze->add_subcommand("preprocess", "Filter one recording");
  std::string pre_in, pre_out, pre_method = "BP", pre_channels;
  double pre_fs = 250.0;
  pre->add_option("--in", pre_in, "Recording (.csv or .f32)")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out, "Output recording (.csv or .f32)")->required();
  pre->add_option("--method", pre_method, "none|ICA|BP|WT|ICA+BP|ICA+WT|BP+WT|ICA+BP+WT");
  pre->add_option("--channels", pre_channels, "Preset name or comma-separated channel list");
  pre->add_option("--fs", pre_fs, "Sampling rate for CSV input");

  auto* cv = analyze->add_subcommand("cv", "Leave-one-subject-out MDM cross-validation");
  std::string cv_data, cv_out, cv_method = "BP", cv_channels = "central_diamond", cv_paradigm = "five_class";
  double shrinkage = 0.01;
  cv->add_option("--data", cv_data, "Directory of recordings (one subdirectory per subject)")->required()->check(CLI::ExistingDirectory);
  cv->add_option("--paradigm", cv_paradigm, "five_class | latency | time_pressure");
  cv->add_option("--method", cv_method, "Preprocessing method");
  cv->add_option("--channels", cv_channels, "Preset name or comma-separated channel list");
  cv->add_option("--shrinkage", shrinkage, "Covariance shrinkage")->check(CLI::Range(0.0, 0.999));
  cv->add_option("--out", cv_out, "Report JSON (default stdout)");

  auto* st = analyze->add_subcommand("stats", "ANOVA of performance measures against one factor");
  std::string st_in, st_out, st_factor = "latency";
  st->add_option("--measures", st_in, "Measure table (JSON Lines)")->required()->check(CLI::ExistingFile);
  st->add_option("--factor", st_factor, "latency | tp");
  st->add_option("--out", st_out, "Report JSON (default stdout)");

  auto* ms = analyze->add_subcommand("measures", "Extract performance measures from session logs");
  std::vector<std::string> ms_logs;
  std::string ms_subject, ms_out;
  ms->add_option("logs", ms_logs, "Session log files")->required()->check(CLI::ExistingFile);
  ms->add_option("--subject", ms_subject, "Subject id (default: parent directory name)");
  ms->add_option("--out", ms_out, "Measure table output (JSON Lines)")->required();

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Synthetic recordings");
  synth->require_subcommand(1);
  auto* gen = synth->add_subcommand("gen", "Generate a synthetic dataset");
  std::string gen_spec, gen_out;
  int gen_subjects = 10;
  std::uint64_t gen_seed = 1;
  gen->add_option("--spec", gen_spec, "Generator spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--subjects", gen_subjects, "Number of subjects")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      const Scenario scenario = load_scenario(serve_scenario);
      std::ofstream log_file;
      gateway::ServeOptions opts;
      opts.port = static_cast<std::uint16_t>(port);
      opts.max_time = serve_max_time;
      if (!serve_log.empty()) {
        log_file.open(serve_log);
        if (!log_file) throw Error("cannot write " + serve_log);
        opts.log_sink = &log_file;
      }
      opts.on_listening = [](std::uint16_t p) { std::cerr << "listening on port " << p << std::endl; };
      const auto log = gateway::serve(scenario, serve_trial.config(), opts);
      std::cout << "final score " << telemetry::recompute_score(log) << '\n';
    } else if (*headless) {
      const Scenario scenario = load_scenario(hl_scenario);
      std::ofstream log_file(hl_out);
      if (!log_file) throw Error("cannot write " + hl_out);
      gateway::HeadlessOptions opts;
      opts.log_sink = &log_file;
      opts.record_snapshots = !hl_snapshots.empty();
      opts.snapshot_every = snapshot_every;
      const auto result = gateway::run_headless(scenario, hl_trial.config(), gateway::load_pilot(pilot), opts);
      if (!hl_snapshots.empty()) {
        std::ofstream snaps(hl_snapshots);
        for (const auto& s : result.snapshots) snaps << gateway::state_message(s) << '\n';
      }
      const auto perf = telemetry::extract_performance(result.log);
      std::cout << "final score " << perf.final_score.value_or(telemetry::recompute_score(result.log))
                << ", collisions " << perf.n_collisions << '\n';
    } else if (*replay) {
      const auto recorded = telemetry::read_log_file(rp_in);
      const Scenario scenario = load_scenario(rp_scenario);
      const auto replayed = gateway::replay(recorded, scenario, gateway::logged_config(recorded));
      if (!rp_out.empty()) telemetry::write_log_file(replayed, rp_out);
      const double a = telemetry::recompute_score(recorded);
      const double b = telemetry::recompute_score(replayed);
      std::cout << "recorded score " << a << ", replayed score " << b << '\n';
      return a == b ? 0 : 3;
    } else if (*protocol) {
      mission::ProtocolOptions opts;
      opts.familiarisation_runs = fam_runs;
      for (const auto& c : mission::generate_protocol(protocol_seed, opts)) {
        std::cout << json{{"trial_index", c.trial_index},
                          {"block", std::string(mission::block_name(c.block))},
                          {"latency", c.latency},
                          {"tp", c.time_pressure},
                          {"obstacles", c.obstacles},
                          {"seed", c.seed}}
                         .dump()
                  << '\n';
      }
    } else if (*analyze) {
      if (*pre) {
        dsp::Recording rec = dsp::read_recording(pre_in, pre_fs);
        rec = dsp::preprocess(rec, dsp::method_from_name(pre_method));
        if (!pre_channels.empty()) rec = dsp::select_channels(rec, resolve_channels(pre_channels, presets_file));
        dsp::write_recording(rec, pre_out);
      } else if (*cv) {
        const auto recs = synthgen::load_dataset(cv_data);
        const auto method = dsp::method_from_name(cv_method);
        const auto paradigm = riemann::paradigm_from_name(cv_paradigm);
        const auto epochs = riemann::prepare_epochs(recs, method, resolve_channels(cv_channels, presets_file));
        riemann::CvOptions opts;
        opts.shrinkage = shrinkage;
        const auto report = riemann::loso_cv(epochs, paradigm, opts);
        json folds = json::array();
        for (const auto& f : report.folds) {
          json jf = {{"subject", f.subject}, {"train_epochs", f.train_size}, {"test_epochs", f.test_size}};
          if (f.metrics) jf["metrics"] = metrics_json(*f.metrics);
          if (f.error) jf["error"] = *f.error;
          folds.push_back(jf);
        }
        write_json({{"paradigm", riemann::paradigm_name(paradigm)},
                    {"method", dsp::method_name(method)},
                    {"channels", cv_channels},
                    {"epochs", epochs.size()},
                    {"mean_accuracy", report.mean_accuracy},
                    {"mean_macro_f1", report.mean_macro_f1},
                    {"folds", folds}},
                   cv_out);
        std::cerr << "mean accuracy " << report.mean_accuracy << ", macro F1 " << report.mean_macro_f1 << '\n';
      } else if (*st) {
        const auto table = stats::read_measures(st_in);
        const auto factor = stats::factor_from_name(st_factor);
        json rows = json::array();
        for (const auto& cell : stats::factor_analysis(table, factor)) {
          json r = {{"measure", cell.measure},
                    {"category", cell.category},
                    {"n_with", cell.n_with},
                    {"n_without", cell.n_without}};
          if (cell.anova) {
            r["F"] = cell.anova->f;
            r["p"] = cell.anova->p;
            r["direction"] = cell.direction == "up" ? "↑" : "↓";
          }
          if (cell.error) r["error"] = *cell.error;
          rows.push_back(r);
        }
        write_json({{"factor", stats::factor_name(factor)}, {"measures", rows}}, st_out);
      } else if (*ms) {
        stats::MeasureTable table;
        for (const auto& path : ms_logs) {
          const auto log = telemetry::read_log_file(path);
          const auto config = gateway::logged_config(log);
          const auto perf = telemetry::extract_performance(log);
          const std::string subject =
              ms_subject.empty() ? fs::absolute(path).parent_path().filename().string() : ms_subject;
          for (const auto& info : telemetry::measure_catalog()) {
            if (const auto v = telemetry::measure_value(perf, info.name)) {
              table.push_back({subject, config.trial_index, config, info.name, *v});
            }
          }
        }
        stats::check_unique(table);
        stats::write_measures(table, ms_out);
      }
    } else if (*synth) {
      const auto spec = synthgen::load_gen_spec(gen_spec);
      const auto files = synthgen::generate_dataset(spec, gen_subjects, gen_seed, gen_out);
      std::cout << "wrote " << files.size() << " recordings under " << gen_out << '\n';
    }
  } catch (const gateway::ReplayRefused& e) {
    std::cerr << "replay refused: " << e.what() << '\n';
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
