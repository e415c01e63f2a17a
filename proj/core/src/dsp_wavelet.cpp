#include "oow/dsp.hpp"
#include "oow/error.hpp"

namespace oow::dsp {

const std::array<double, 8>& db4_lowpass() {
  static const std::array<double, 8> h = {
      0.2303778133088965,   0.7148465705529157,  0.6308807679298589,  -0.027983769416859854,
      -0.18703481171909309, 0.030841381835560764, 0.0328830116668852, -0.010597401785069032};
  return h;
}

namespace {

constexpr int kTaps = 8;

double highpass_tap(int k) {
  const auto& h = db4_lowpass();
  return ((k % 2) ? -1.0 : 1.0) * h[kTaps - 1 - k];
}

/// One periodized analysis step; x.size() must be even.
void analyze(const Eigen::VectorXd& x, Eigen::VectorXd& a, Eigen::VectorXd& d) {
  const auto& h = db4_lowpass();
  const Eigen::Index n = x.size();
  const Eigen::Index half = n / 2;
  a.setZero(half);
  d.setZero(half);
  for (Eigen::Index i = 0; i < half; ++i) {
    for (int k = 0; k < kTaps; ++k) {
      const double v = x[(2 * i + k) % n];
      a[i] += h[k] * v;
      d[i] += highpass_tap(k) * v;
    }
  }
}

/// Transpose of analyze().
Eigen::VectorXd synthesize(const Eigen::VectorXd& a, const Eigen::VectorXd& d) {
  const auto& h = db4_lowpass();
  const Eigen::Index half = a.size();
  const Eigen::Index n = 2 * half;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < half; ++i) {
    for (int k = 0; k < kTaps; ++k) {
      x[(2 * i + k) % n] += h[k] * a[i] + highpass_tap(k) * d[i];
    }
  }
  return x;
}

}  // namespace

WaveletDecomposition wavedec(const Eigen::VectorXd& x, int levels) {
  if (levels < 1) throw ParameterError("wavelet levels must be >= 1");
  const Eigen::Index block = Eigen::Index{1} << levels;
  if (x.size() < block) {
    throw ParameterError("signal of " + std::to_string(x.size()) + " samples too short for " +
                         std::to_string(levels) + "-level decomposition");
  }
  const Eigen::Index n = x.size();
  const Eigen::Index padded = (n + block - 1) / block * block;
  Eigen::VectorXd cur(padded);
  cur.head(n) = x;
  for (Eigen::Index i = n; i < padded; ++i) cur[i] = x[2 * n - 1 - i];  // half-sample symmetric

  WaveletDecomposition dec;
  dec.original_length = n;
  for (int l = 0; l < levels; ++l) {
    Eigen::VectorXd a, d;
    analyze(cur, a, d);
    dec.details.push_back(std::move(d));
    cur = std::move(a);
  }
  dec.approximation = std::move(cur);
  return dec;
}

Eigen::VectorXd waverec(const WaveletDecomposition& dec) {
  Eigen::VectorXd cur = dec.approximation;
  for (auto it = dec.details.rbegin(); it != dec.details.rend(); ++it) {
    if (it->size() != cur.size()) throw DimensionError("wavelet band sizes inconsistent");
    cur = synthesize(cur, *it);
  }
  if (dec.original_length > cur.size()) throw DimensionError("original length exceeds reconstruction");
  return cur.head(dec.original_length);
}

Recording wavelet_reduce(const Recording& rec) {
  if (rec.samples() < 64) throw ParameterError("signal too short for 6-level decomposition");
  Recording out = rec;
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    WaveletDecomposition dec = wavedec(rec.data.row(c).transpose(), 6);
    dec.details.front().setZero();
    dec.approximation.setZero();
    out.data.row(c) = waverec(dec).transpose();
  }
  return out;
}

}  // namespace oow::dsp
