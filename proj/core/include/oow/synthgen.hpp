#pragma once

#include "oow/dsp.hpp"
#include "oow/mission.hpp"
#include "oow/riemann.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oow::synthgen {

struct Tone {
  double hz = 0.0;
  double amplitude = 0.0;
};

struct ClassSpec {
  std::string label;
  mission::TrialConfig config;  // stamped on every generated trial
  riemann::SpdMatrix target;    // spatial covariance, channels x channels
  std::vector<Tone> tones;      // added to every channel
};

struct GenOptions {
  int trials_per_class = 2;
  double trial_seconds = 20.0;
  double fs = 250.0;
  /// Defaults to the first d names of the standard montage.
  std::vector<std::string> channel_names;
};

/// Trials ordered class by class. Each is target^1/2 times white Gaussian
/// noise plus tones; trial_index counts from 1 across the subject.
std::vector<dsp::Recording> gen_subject(const std::vector<ClassSpec>& specs, const std::string& subject,
                                        std::uint64_t seed, const GenOptions& options = {});

struct ArtifactOptions {
  double blink_rate = 0.0;       // per minute
  double blink_amplitude = 5.0;  // peak, in units of the FP1 standard deviation
  double emg_level = 0.0;        // RMS relative to each channel's standard deviation
  double line_hz = 50.0;
  double line_amplitude = 0.0;
  std::uint64_t seed = 7;
};

struct ArtifactTruth {
  std::vector<double> blink_times;  // s, peak positions
};

/// Blinks: 0.4 s raised-cosine bumps, full strength on FP channels and
/// weaker on AF, F and the rest. EMG: white noise band-limited above 30 Hz.
/// Line: sinusoid at line_hz on all channels.
dsp::Recording inject_artifacts(const dsp::Recording& rec, const ArtifactOptions& options,
                                ArtifactTruth* truth = nullptr);

/// Per-channel blink weight used by inject_artifacts.
double blink_weight(const std::string& channel);

/// Random SPD matrix with eigenvalues spread over [1, 1 + spread] in a
/// random orthonormal basis.
riemann::SpdMatrix random_spd(int d, double spread, std::uint64_t seed);

/// Five-class specs labelled per the five-class paradigm. With `identical`
/// all classes share one target; otherwise each class gets its own.
std::vector<ClassSpec> five_class_specs(int d, double spread, std::uint64_t seed, bool identical = false);

/// Generator description for the CLI:
/// {"fs", "trial_seconds", "trials_per_class", "channels": [...] | "preset name",
///  "classes": [{"label", "config": {...}, "target": {"diag": [...]} | {"matrix": [[...]]}
///               | {"random": {"spread", "seed"}}, "tones": [[hz, amp], ...]}],
///  "artifacts": {"blink_rate", "blink_amplitude", "emg_level", "line_hz", "line_amplitude"}}
struct GenSpec {
  std::vector<ClassSpec> classes;
  GenOptions options;
  std::optional<ArtifactOptions> artifacts;
};

GenSpec parse_gen_spec(const std::string& json_text);
GenSpec load_gen_spec(const std::filesystem::path& path);

/// Writes subject directories `<out>/S01/trial_01.f32` (+ sidecars).
std::vector<std::filesystem::path> generate_dataset(const GenSpec& spec, int subjects, std::uint64_t seed,
                                                    const std::filesystem::path& out_dir);

/// Reads every .f32 / .csv recording under a directory tree, sorted by path.
std::vector<dsp::Recording> load_dataset(const std::filesystem::path& dir);

}  // namespace oow::synthgen
