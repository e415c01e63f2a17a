#include "oow/synthgen.hpp"
#include "oow/error.hpp"

#include "json_codec.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace oow::synthgen {

namespace {

using std::numbers::pi;

Eigen::MatrixXd white(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index t = 0; t < cols; ++t) {
    for (Eigen::Index c = 0; c < rows; ++c) z(c, t) = normal(rng);
  }
  return z;
}

std::vector<std::string> default_names(Eigen::Index d) {
  const auto& montage = dsp::standard_montage();
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < d; ++i) {
    out.push_back(i < static_cast<Eigen::Index>(montage.size()) ? montage[static_cast<std::size_t>(i)]
                                                                : "X" + std::to_string(i + 1));
  }
  return out;
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

std::vector<dsp::Recording> gen_subject(const std::vector<ClassSpec>& specs, const std::string& subject,
                                        std::uint64_t seed, const GenOptions& options) {
  if (specs.empty()) throw ParameterError("no class specs");
  if (!(options.fs > 0.0)) throw ParameterError("sampling rate must be positive");
  if (options.trials_per_class < 1) throw ParameterError("trials_per_class must be >= 1");
  const auto samples = static_cast<Eigen::Index>(std::llround(options.trial_seconds * options.fs));
  if (samples < 2) throw ParameterError("trial too short");

  std::mt19937_64 rng(seed);
  std::vector<dsp::Recording> out;
  int trial_index = 0;
  for (const auto& spec : specs) {
    if (!riemann::is_spd(spec.target, 1e-12)) {
      throw ParameterError("target of class '" + spec.label + "' is not SPD");
    }
    const Eigen::Index d = spec.target.rows();
    const Eigen::MatrixXd root = riemann::sqrtm(spec.target);
    const auto names = options.channel_names.empty() ? default_names(d) : options.channel_names;
    if (static_cast<Eigen::Index>(names.size()) != d) {
      throw DimensionError("class '" + spec.label + "' target is " + std::to_string(d) + "x" +
                           std::to_string(d) + " but " + std::to_string(names.size()) + " channel names given");
    }
    for (int k = 0; k < options.trials_per_class; ++k) {
      dsp::Recording rec;
      rec.fs = options.fs;
      rec.channel_names = names;
      rec.subject = subject;
      rec.label = spec.label;
      rec.data = root * white(d, samples, rng);
      for (const auto& tone : spec.tones) {
        for (Eigen::Index t = 0; t < samples; ++t) {
          rec.data.col(t).array() += tone.amplitude * std::sin(2.0 * pi * tone.hz * static_cast<double>(t) / options.fs);
        }
      }
      mission::TrialConfig cfg = spec.config;
      cfg.trial_index = ++trial_index;
      rec.trial = cfg;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

double blink_weight(const std::string& channel) {
  if (starts_with(channel, "FP") || starts_with(channel, "Fp")) return 1.0;
  if (starts_with(channel, "AF")) return 0.6;
  if (starts_with(channel, "FC")) return 0.15;
  if (starts_with(channel, "F")) return 0.3;
  return 0.05;
}

dsp::Recording inject_artifacts(const dsp::Recording& rec, const ArtifactOptions& options, ArtifactTruth* truth) {
  rec.validate();
  dsp::Recording out = rec;
  std::mt19937_64 rng(options.seed);
  const Eigen::Index n = rec.samples();
  const double duration = static_cast<double>(n) / rec.fs;

  auto channel_sd = [&](Eigen::Index c) {
    const Eigen::ArrayXd x = rec.data.row(c).transpose().array();
    const double m = x.mean();
    return std::sqrt((x - m).square().mean());
  };

  if (options.blink_rate > 0.0 && options.blink_amplitude != 0.0 && n > 0) {
    Eigen::Index ref = rec.channel_index("FP1");
    const double scale = options.blink_amplitude * (ref >= 0 ? channel_sd(ref) : 1.0);
    const double interval = 60.0 / options.blink_rate;
    const double half_width = 0.2;
    std::uniform_real_distribution<double> jitter(-0.25 * interval, 0.25 * interval);
    for (double t0 = 0.5 * interval; t0 < duration; t0 += interval) {
      const double peak = std::clamp(t0 + jitter(rng), half_width, std::max(half_width, duration - half_width));
      if (truth) truth->blink_times.push_back(peak);
      const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil((peak - half_width) * rec.fs)));
      const auto hi = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor((peak + half_width) * rec.fs)));
      for (Eigen::Index s = lo; s <= hi; ++s) {
        const double u = (static_cast<double>(s) / rec.fs - peak) / half_width;
        const double bump = 0.5 * (1.0 + std::cos(pi * u));
        for (Eigen::Index c = 0; c < rec.channels(); ++c) {
          out.data(c, s) += scale * blink_weight(rec.channel_names[static_cast<std::size_t>(c)]) * bump;
        }
      }
    }
  }

  if (options.emg_level > 0.0 && n > 8) {
    const double nyq = rec.fs / 2.0;
    const dsp::Sos hp = dsp::design_bandpass(30.0, 0.9 * nyq, rec.fs);
    std::normal_distribution<double> normal;
    for (Eigen::Index c = 0; c < rec.channels(); ++c) {
      Eigen::VectorXd noise(n);
      for (Eigen::Index s = 0; s < n; ++s) noise[s] = normal(rng);
      noise = dsp::sosfilt(hp, noise);
      const double rms = std::sqrt(noise.squaredNorm() / static_cast<double>(n));
      if (rms > 0.0) out.data.row(c) += (options.emg_level * channel_sd(c) / rms) * noise.transpose();
    }
  }

  if (options.line_amplitude != 0.0) {
    if (!(options.line_hz > 0.0)) throw ParameterError("line frequency must be positive");
    for (Eigen::Index s = 0; s < n; ++s) {
      out.data.col(s).array() +=
          options.line_amplitude * std::sin(2.0 * pi * options.line_hz * static_cast<double>(s) / rec.fs);
    }
  }
  return out;
}

riemann::SpdMatrix random_spd(int d, double spread, std::uint64_t seed) {
  if (d < 1) throw ParameterError("dimension must be >= 1");
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd g = white(d, d, rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev[i] = 1.0 + spread * uni(rng);
  const Eigen::MatrixXd m = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

std::vector<ClassSpec> five_class_specs(int d, double spread, std::uint64_t seed, bool identical) {
  const std::vector<mission::TrialConfig> configs = {
      {0.0, false, true, mission::Block::TimePressure, 0, 0},
      {0.0, true, true, mission::Block::TimePressure, 0, 0},
      {0.5, false, true, mission::Block::Latency, 0, 0},
      {0.5, true, true, mission::Block::TimePressure, 0, 0},
      {1.0, false, true, mission::Block::Latency, 0, 0},
  };
  std::vector<ClassSpec> out;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    ClassSpec s;
    s.config = configs[k];
    s.label = riemann::label_for(s.config, riemann::Paradigm::FiveClass);
    s.target = random_spd(d, spread, identical ? seed : seed + 1000003ULL * (k + 1));
    out.push_back(std::move(s));
  }
  return out;
}

// Spec files -----------------------------------------------------------------

GenSpec parse_gen_spec(const std::string& json_text) {
  using codec::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("generator spec: ") + e.what());
  }
  GenSpec spec;
  try {
    spec.options.fs = j.value("fs", 250.0);
    spec.options.trial_seconds = j.value("trial_seconds", 20.0);
    spec.options.trials_per_class = j.value("trials_per_class", 2);
    if (j.contains("channels")) {
      const auto& ch = j.at("channels");
      if (ch.is_string()) {
        spec.options.channel_names = dsp::find_preset(dsp::default_channel_presets(), ch.get<std::string>()).channels;
      } else {
        spec.options.channel_names = ch.get<std::vector<std::string>>();
      }
    }
    const int d_default = spec.options.channel_names.empty() ? 32 : static_cast<int>(spec.options.channel_names.size());
    for (const auto& c : j.at("classes")) {
      ClassSpec cs;
      if (c.contains("config")) {
        // Partial configs are fine here; absent keys keep their defaults.
        json full = codec::trial_config(mission::TrialConfig{});
        full.update(c.at("config"));
        cs.config = codec::trial_config(full);
      }
      cs.label = c.value("label", riemann::label_for(cs.config, riemann::Paradigm::FiveClass));
      const json& t = c.at("target");
      if (t.contains("diag")) {
        const auto v = t.at("diag").get<std::vector<double>>();
        cs.target = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).asDiagonal();
      } else if (t.contains("matrix")) {
        const auto rows = t.at("matrix").get<std::vector<std::vector<double>>>();
        cs.target.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows.size()) throw ParseError(0, "target matrix must be square");
          for (std::size_t k = 0; k < rows.size(); ++k) {
            cs.target(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
          }
        }
      } else if (t.contains("random")) {
        const json& r = t.at("random");
        cs.target = random_spd(r.value("dim", d_default), r.value("spread", 4.0), r.value("seed", 1ULL));
      } else {
        throw ParseError(0, "class '" + cs.label + "' target needs diag, matrix or random");
      }
      if (!riemann::is_spd(cs.target, 1e-12)) throw ParseError(0, "class '" + cs.label + "' target is not SPD");
      if (c.contains("tones")) {
        for (const auto& tone : c.at("tones")) cs.tones.push_back({tone.at(0).get<double>(), tone.at(1).get<double>()});
      }
      spec.classes.push_back(std::move(cs));
    }
    if (j.contains("artifacts")) {
      const json& a = j.at("artifacts");
      ArtifactOptions ao;
      ao.blink_rate = a.value("blink_rate", 0.0);
      ao.blink_amplitude = a.value("blink_amplitude", ao.blink_amplitude);
      ao.emg_level = a.value("emg_level", 0.0);
      ao.line_hz = a.value("line_hz", 50.0);
      ao.line_amplitude = a.value("line_amplitude", 0.0);
      spec.artifacts = ao;
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("generator spec: ") + e.what());
  }
  if (spec.classes.empty()) throw ParseError(0, "generator spec has no classes");
  return spec;
}

GenSpec load_gen_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gen_spec(ss.str());
}

std::vector<std::filesystem::path> generate_dataset(const GenSpec& spec, int subjects, std::uint64_t seed,
                                                    const std::filesystem::path& out_dir) {
  if (subjects < 1) throw ParameterError("subject count must be >= 1");
  std::vector<std::filesystem::path> written;
  for (int s = 1; s <= subjects; ++s) {
    char sid[16];
    std::snprintf(sid, sizeof sid, "S%02d", s);
    const std::uint64_t subject_seed = std::mt19937_64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(s)))();
    auto recs = gen_subject(spec.classes, sid, subject_seed, spec.options);
    const auto dir = out_dir / sid;
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (spec.artifacts) {
        ArtifactOptions ao = *spec.artifacts;
        ao.seed = subject_seed + i;
        recs[i] = inject_artifacts(recs[i], ao);
      }
      char name[32];
      std::snprintf(name, sizeof name, "trial_%02zu.f32", i + 1);
      dsp::write_binary(recs[i], dir / name);
      written.push_back(dir / name);
    }
  }
  return written;
}

std::vector<dsp::Recording> load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext == ".f32" || ext == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<dsp::Recording> out;
  for (const auto& f : files) {
    dsp::Recording r = dsp::read_recording(f);
    if (f.extension() == ".csv") r.subject = f.parent_path().filename().string();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace oow::synthgen
