#include "oow/dsp.hpp"
#include "oow/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace oow::dsp {

void Recording::validate() const {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw ParameterError("sampling rate must be positive");
  if (static_cast<Eigen::Index>(channel_names.size()) != data.rows()) {
    throw DimensionError("recording has " + std::to_string(data.rows()) + " rows but " +
                         std::to_string(channel_names.size()) + " channel names");
  }
  std::set<std::string> seen;
  for (const auto& name : channel_names) {
    if (!seen.insert(name).second) throw ParameterError("duplicate channel name '" + name + "'");
  }
  if (!data.allFinite()) throw ParameterError("recording contains NaN or Inf");
}

Eigen::Index Recording::channel_index(const std::string& name) const {
  const auto it = std::find(channel_names.begin(), channel_names.end(), name);
  return it == channel_names.end() ? -1 : static_cast<Eigen::Index>(it - channel_names.begin());
}

const std::vector<std::string>& standard_montage() {
  static const std::vector<std::string> names = {
      "FP1", "FP2", "AF3", "AF4", "F7",  "F3",  "Fz",  "F4",  "F8",  "FC5", "FC1",
      "FC2", "FC6", "T7",  "C3",  "Cz",  "C4",  "T8",  "CP5", "CP1", "CP2", "CP6",
      "P7",  "P3",  "Pz",  "P4",  "P8",  "PO7", "PO3", "PO4", "PO8", "Oz"};
  return names;
}

// Channel presets --------------------------------------------------------

namespace {

// Keep in sync with config/channels.json.
constexpr const char* kDefaultPresets = R"({
  "central_diamond": ["Cz", "FC1", "FC2", "CP1", "CP2", "C3", "C4", "Pz", "Fz"],
  "central_x": ["Cz", "FC1", "FC2", "CP1", "CP2", "F3", "F4", "P3", "P4"],
  "frontal": ["FP1", "FP2", "AF3", "AF4", "F7", "F3", "Fz", "F4", "F8"],
  "parietal": ["CP1", "CP2", "P7", "P3", "Pz", "P4", "P8", "PO3", "PO4"],
  "parallel": ["AF3", "F3", "FC1", "C3", "CP1", "P3", "AF4", "F4", "FC2", "C4", "CP2", "P4"],
  "rocket": ["Fz", "FC1", "FC2", "C3", "Cz", "C4", "CP1", "CP2", "Pz", "PO3", "PO4", "Oz"]
})";

}  // namespace

std::vector<ChannelConfig> parse_channel_presets(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("channel presets: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(0, "channel presets must be a JSON object");
  std::vector<ChannelConfig> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_array()) throw ParseError(0, "preset '" + it.key() + "' must be a list");
    ChannelConfig c{it.key(), {}};
    for (const auto& ch : it.value()) {
      if (!ch.is_string()) throw ParseError(0, "preset '" + it.key() + "' has a non-string channel");
      c.channels.push_back(ch.get<std::string>());
    }
    if (c.channels.empty()) throw ParseError(0, "preset '" + it.key() + "' is empty");
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ChannelConfig> load_channel_presets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_channel_presets(ss.str());
}

const std::vector<ChannelConfig>& default_channel_presets() {
  static const std::vector<ChannelConfig> presets = parse_channel_presets(kDefaultPresets);
  return presets;
}

ChannelConfig find_preset(const std::vector<ChannelConfig>& presets, const std::string& name) {
  for (const auto& p : presets) {
    if (p.name == name) return p;
  }
  throw ParameterError("unknown channel preset '" + name + "'");
}

Recording select_channels(const Recording& rec, const ChannelConfig& config) {
  if (config.channels.empty()) throw ParameterError("channel selection is empty");
  Recording out = rec;
  out.data.resize(static_cast<Eigen::Index>(config.channels.size()), rec.samples());
  out.channel_names = config.channels;
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    const Eigen::Index c = rec.channel_index(config.channels[i]);
    if (c < 0) throw ParameterError("unknown channel '" + config.channels[i] + "'");
    out.data.row(static_cast<Eigen::Index>(i)) = rec.data.row(c);
  }
  return out;
}

// Windowing and band power ------------------------------------------------

std::vector<Epoch> window(const Recording& rec, double seconds) {
  const double exact = rec.fs * seconds;
  const auto len = static_cast<Eigen::Index>(std::llround(exact));
  if (len <= 0 || std::abs(exact - static_cast<double>(len)) > 1e-9) {
    throw ParameterError("window length fs*seconds must be a positive integer");
  }
  std::vector<Epoch> out;
  for (Eigen::Index start = 0; start + len <= rec.samples(); start += len) {
    Epoch e;
    e.data = rec.data.middleCols(start, len);
    e.label = rec.label;
    e.subject = rec.subject;
    e.trial = rec.trial;
    e.trial_index = rec.trial ? rec.trial->trial_index : 0;
    out.push_back(std::move(e));
  }
  return out;
}

double band_power(const Eigen::MatrixXd& data, double fs, double lo, double hi) {
  const Eigen::Index n = data.cols();
  if (n == 0 || data.rows() == 0) return 0.0;
  if (!(fs > 0.0)) throw ParameterError("sampling rate must be positive");
  const double df = fs / static_cast<double>(n);
  const auto k_lo = static_cast<Eigen::Index>(std::ceil(lo / df - 1e-9));
  const auto k_hi = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(hi / df + 1e-9)), n / 2);

  std::vector<double> cos_t(static_cast<std::size_t>(n)), sin_t(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    cos_t[static_cast<std::size_t>(i)] = std::cos(a);
    sin_t[static_cast<std::size_t>(i)] = std::sin(a);
  }

  double total = 0.0;
  for (Eigen::Index c = 0; c < data.rows(); ++c) {
    double p = 0.0;
    for (Eigen::Index k = std::max<Eigen::Index>(k_lo, 0); k <= k_hi; ++k) {
      double re = 0.0, im = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        const auto idx = static_cast<std::size_t>((k * t) % n);
        re += data(c, t) * cos_t[idx];
        im -= data(c, t) * sin_t[idx];
      }
      // One-sided periodogram density times bin width.
      const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
      p += (edge ? 1.0 : 2.0) * (re * re + im * im) / (fs * static_cast<double>(n)) * df;
    }
    total += p;
  }
  return total / static_cast<double>(data.rows());
}

double beta_power(const Epoch& epoch, double fs) { return band_power(epoch.data, fs, 13.0, 30.0); }

// Preprocessing ------------------------------------------------------------

std::string method_name(Method m) {
  switch (m) {
    case Method::None: return "none";
    case Method::ICA: return "ICA";
    case Method::BP: return "BP";
    case Method::WT: return "WT";
    case Method::ICA_BP: return "ICA+BP";
    case Method::ICA_WT: return "ICA+WT";
    case Method::BP_WT: return "BP+WT";
    case Method::ICA_BP_WT: return "ICA+BP+WT";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  std::string up;
  for (char ch : name) up += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (Method m : {Method::None, Method::ICA, Method::BP, Method::WT, Method::ICA_BP, Method::ICA_WT,
                   Method::BP_WT, Method::ICA_BP_WT}) {
    std::string cand;
    for (char ch : method_name(m)) cand += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (cand == up) return m;
  }
  throw ParameterError("unknown preprocessing method '" + name + "'");
}

Recording preprocess(const Recording& rec, Method method, const PreprocessOptions& options) {
  rec.validate();
  Recording out = rec;
  for (double f0 : {50.0, 100.0}) {
    if (f0 < rec.fs / 2.0) out = notch(out, f0, options.notch_q);
  }
  const bool ica = method == Method::ICA || method == Method::ICA_BP || method == Method::ICA_WT ||
                   method == Method::ICA_BP_WT;
  const bool bp = method == Method::BP || method == Method::ICA_BP || method == Method::BP_WT ||
                  method == Method::ICA_BP_WT;
  const bool wt = method == Method::WT || method == Method::ICA_WT || method == Method::BP_WT ||
                  method == Method::ICA_BP_WT;
  if (ica) out = ica_clean(out, options.ica).cleaned;
  if (bp) out = bandpass(out, options.bp_lo, options.bp_hi);
  if (wt) out = wavelet_reduce(out);
  return out;
}

}  // namespace oow::dsp
