#pragma once

#include "oow/mission.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oow::dsp {

/// Multichannel recording, channels x samples.
struct Recording {
  Eigen::MatrixXd data;
  double fs = 250.0;
  std::vector<std::string> channel_names;
  std::string subject;
  std::optional<mission::TrialConfig> trial;
  std::string label;  // workload class when known

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }
  /// Throws ParameterError on fs <= 0, duplicate names, name/row mismatch or NaN/Inf.
  void validate() const;
  Eigen::Index channel_index(const std::string& name) const;  // -1 if absent
};

/// The 32 electrode labels of the default cap layout, in storage order.
const std::vector<std::string>& standard_montage();

/// Second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using Sos = std::vector<Biquad>;

Sos design_notch(double f0, double q, double fs);
/// Butterworth band-pass: order-4 high-pass at lo cascaded with order-4
/// low-pass at hi (bilinear transform, prewarped).
Sos design_bandpass(double lo, double hi, double fs, int order = 4);

/// Single causal pass, zero initial state.
Eigen::VectorXd sosfilt(const Sos& sos, const Eigen::VectorXd& x);
/// Zero-phase forward-backward filtering with odd-reflection padding and
/// steady-state initial conditions.
Eigen::VectorXd sosfiltfilt(const Sos& sos, const Eigen::VectorXd& x);

/// Magnitude response |H(f)| of a cascade (single pass).
double magnitude(const Sos& sos, double f, double fs);

Recording notch(const Recording& rec, double f0, double q = 30.0);
Recording bandpass(const Recording& rec, double lo = 2.0, double hi = 60.0);

// Wavelets ---------------------------------------------------------------

/// Daubechies-4 (8-tap) decomposition low-pass filter.
const std::array<double, 8>& db4_lowpass();

struct WaveletDecomposition {
  std::vector<Eigen::VectorXd> details;  // details[0] finest .. details[L-1] coarsest
  Eigen::VectorXd approximation;
  Eigen::Index original_length = 0;
};

/// Periodized multilevel DWT. The signal is first extended symmetrically to
/// a multiple of 2^levels; reconstruction crops back.
WaveletDecomposition wavedec(const Eigen::VectorXd& x, int levels = 6);
Eigen::VectorXd waverec(const WaveletDecomposition& dec);

/// 6-level decomposition with the finest detail band and the final
/// approximation zeroed before reconstruction.
Recording wavelet_reduce(const Recording& rec);

// ICA --------------------------------------------------------------------

struct IcaOptions {
  std::string eog_channel = "FP1";
  double eog_corr_threshold = 0.7;
  double kurtosis_threshold = 5.0;
  std::uint64_t seed = 42;
  int max_iter = 400;
  double tol = 1e-6;
};

struct IcaResult {
  Recording cleaned;
  bool converged = true;
  std::vector<int> rejected;     // component indices
  Eigen::MatrixXd mixing;        // channels x components
  Eigen::MatrixXd sources;       // components x samples
};

/// Deflationary FastICA (logcosh contrast) on whitened data.
/// Returns mixing matrix and sources only; no rejection.
IcaResult fastica(const Eigen::MatrixXd& data, const IcaOptions& options = {});

/// Rejects components correlated with the EOG channel or with extreme
/// kurtosis and remixes the rest. On non-convergence the input is returned
/// unchanged with converged = false.
IcaResult ica_clean(const Recording& rec, const IcaOptions& options = {});

double excess_kurtosis(const Eigen::VectorXd& x);

// Channel selection, windowing, band power ---------------------------------

struct ChannelConfig {
  std::string name;
  std::vector<std::string> channels;
};

/// Presets (central_diamond, central_x, frontal, parietal, parallel, rocket)
/// from a JSON file { "name": ["Cz", ...], ... }.
std::vector<ChannelConfig> load_channel_presets(const std::filesystem::path& path);
std::vector<ChannelConfig> parse_channel_presets(const std::string& json_text);
/// Built-in copy of config/channels.json.
const std::vector<ChannelConfig>& default_channel_presets();
ChannelConfig find_preset(const std::vector<ChannelConfig>& presets, const std::string& name);

Recording select_channels(const Recording& rec, const ChannelConfig& config);

struct Epoch {
  Eigen::MatrixXd data;  // channels x (2 fs)
  std::string label;
  std::string subject;
  int trial_index = 0;
  std::optional<mission::TrialConfig> trial;
};

/// Disjoint 2 s windows; a trailing partial window is dropped.
std::vector<Epoch> window(const Recording& rec, double seconds = 2.0);

/// Mean over channels of periodogram power in [lo, hi] Hz.
double band_power(const Eigen::MatrixXd& data, double fs, double lo, double hi);
double beta_power(const Epoch& epoch, double fs = 250.0);

enum class Method { None, ICA, BP, WT, ICA_BP, ICA_WT, BP_WT, ICA_BP_WT };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct PreprocessOptions {
  IcaOptions ica;
  double notch_q = 30.0;
  double bp_lo = 2.0;
  double bp_hi = 60.0;
};

/// Notch at 50 and 100 Hz (those below Nyquist), then the named stages in
/// the order ICA, BP, WT.
Recording preprocess(const Recording& rec, Method method, const PreprocessOptions& options = {});

// I/O --------------------------------------------------------------------

/// CSV: header row of channel names, one sample per row.
Recording read_csv(const std::filesystem::path& path, double fs = 250.0);
void write_csv(const Recording& rec, const std::filesystem::path& path);

/// Little-endian float32, sample-major (all channels of sample 0, then
/// sample 1, ...), with a JSON sidecar `<stem>.json` holding the metadata.
void write_binary(const Recording& rec, const std::filesystem::path& f32_path);
Recording read_binary(const std::filesystem::path& f32_path);

/// Reads .csv or .f32 by extension.
Recording read_recording(const std::filesystem::path& path, double csv_fs = 250.0);
void write_recording(const Recording& rec, const std::filesystem::path& path);

}  // namespace oow::dsp
