#include "oow/dsp.hpp"
#include "oow/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace oow::dsp {

namespace {

using std::numbers::pi;

/// Bilinear transform of an analog biquad (n2 s^2 + n1 s + n0) / (d2 s^2 + d1 s + d0).
Biquad bilinear(double n2, double n1, double n0, double d2, double d1, double d0, double fs) {
  const double k = 2.0 * fs;
  const double k2 = k * k;
  const double a0 = d2 * k2 + d1 * k + d0;
  Biquad q;
  q.b0 = (n2 * k2 + n1 * k + n0) / a0;
  q.b1 = (2.0 * n0 - 2.0 * n2 * k2) / a0;
  q.b2 = (n2 * k2 - n1 * k + n0) / a0;
  q.a1 = (2.0 * d0 - 2.0 * d2 * k2) / a0;
  q.a2 = (d2 * k2 - d1 * k + d0) / a0;
  return q;
}

/// Butterworth sections at cutoff fc. Odd orders get a first-order section
/// written as a biquad with zero s^2 terms.
Sos butterworth(int order, double fc, double fs, bool highpass) {
  const double wc = 2.0 * fs * std::tan(pi * fc / fs);
  Sos sos;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = pi * (2.0 * k + order + 1) / (2.0 * order);
    const double re = wc * std::cos(theta);  // negative
    const double mag2 = wc * wc;
    if (highpass) {
      sos.push_back(bilinear(1.0, 0.0, 0.0, 1.0, -2.0 * re, mag2, fs));
    } else {
      sos.push_back(bilinear(0.0, 0.0, mag2, 1.0, -2.0 * re, mag2, fs));
    }
  }
  if (order % 2 == 1) {
    if (highpass) {
      sos.push_back(bilinear(0.0, 1.0, 0.0, 0.0, 1.0, wc, fs));
    } else {
      sos.push_back(bilinear(0.0, 0.0, wc, 0.0, 1.0, wc, fs));
    }
  }
  return sos;
}

/// Steady-state state vector of each section for a unit step input.
std::vector<std::array<double, 2>> sos_zi(const Sos& sos) {
  std::vector<std::array<double, 2>> zi;
  double gain = 1.0;
  for (const auto& q : sos) {
    const double y = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double z2 = q.b2 - q.a2 * y;
    const double z1 = q.b1 - q.a1 * y + z2;
    zi.push_back({z1 * gain, z2 * gain});
    gain *= y;
  }
  return zi;
}

Eigen::VectorXd run(const Sos& sos, const Eigen::VectorXd& x, std::vector<std::array<double, 2>> z) {
  Eigen::VectorXd y = x;
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad& q = sos[s];
    double z1 = z[s][0];
    double z2 = z[s][1];
    for (Eigen::Index n = 0; n < y.size(); ++n) {
      const double in = y[n];
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      y[n] = out;
    }
  }
  return y;
}

Recording per_channel(const Recording& rec, const Sos& sos) {
  Recording out = rec;
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    out.data.row(c) = sosfiltfilt(sos, rec.data.row(c).transpose()).transpose();
  }
  return out;
}

}  // namespace

Sos design_notch(double f0, double q, double fs) {
  if (!(fs > 0.0)) throw ParameterError("sampling rate must be positive");
  if (!(f0 > 0.0 && f0 < fs / 2.0)) {
    throw ParameterError("notch frequency " + std::to_string(f0) + " Hz outside (0, Nyquist)");
  }
  if (!(q > 0.0)) throw ParameterError("notch quality factor must be positive");
  // -3 dB bandwidth of f0 / q, placed through the bilinear transform.
  const double w0 = 2.0 * pi * f0 / fs;
  const double beta = std::tan(pi * (f0 / q) / fs);
  const double gain = 1.0 / (1.0 + beta);
  Biquad b;
  b.b0 = gain;
  b.b1 = -2.0 * gain * std::cos(w0);
  b.b2 = gain;
  b.a1 = -2.0 * gain * std::cos(w0);
  b.a2 = 2.0 * gain - 1.0;
  return {b};
}

Sos design_bandpass(double lo, double hi, double fs, int order) {
  if (!(fs > 0.0)) throw ParameterError("sampling rate must be positive");
  if (!(lo > 0.0 && lo < hi && hi < fs / 2.0)) {
    throw ParameterError("invalid band [" + std::to_string(lo) + ", " + std::to_string(hi) +
                         "] Hz for fs " + std::to_string(fs));
  }
  if (order < 1) throw ParameterError("filter order must be >= 1");
  Sos sos = butterworth(order, lo, fs, true);
  Sos lp = butterworth(order, hi, fs, false);
  sos.insert(sos.end(), lp.begin(), lp.end());
  return sos;
}

Eigen::VectorXd sosfilt(const Sos& sos, const Eigen::VectorXd& x) {
  return run(sos, x, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
}

Eigen::VectorXd sosfiltfilt(const Sos& sos, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n == 0) return x;
  const Eigen::Index padlen = std::min<Eigen::Index>(3 * (2 * static_cast<Eigen::Index>(sos.size()) + 1), n - 1);

  Eigen::VectorXd ext(n + 2 * padlen);
  for (Eigen::Index i = 0; i < padlen; ++i) ext[i] = 2.0 * x[0] - x[padlen - i];
  ext.segment(padlen, n) = x;
  for (Eigen::Index i = 0; i < padlen; ++i) ext[padlen + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  const auto zi = sos_zi(sos);
  auto scaled = [&](double v) {
    auto z = zi;
    for (auto& s : z) {
      s[0] *= v;
      s[1] *= v;
    }
    return z;
  };

  Eigen::VectorXd y = run(sos, ext, scaled(ext[0]));
  y.reverseInPlace();
  y = run(sos, y, scaled(y[0]));
  y.reverseInPlace();
  return y.segment(padlen, n);
}

double magnitude(const Sos& sos, double f, double fs) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * pi * f / fs);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& q : sos) {
    h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  }
  return std::abs(h);
}

Recording notch(const Recording& rec, double f0, double q) {
  return per_channel(rec, design_notch(f0, q, rec.fs));
}

Recording bandpass(const Recording& rec, double lo, double hi) {
  return per_channel(rec, design_bandpass(lo, hi, rec.fs));
}

}  // namespace oow::dsp
