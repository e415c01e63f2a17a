#pragma once

// Power spectra through FFTW, independent of the toolkit's own DFT code.

#include <Eigen/Core>
#include <fftw3.h>

#include <vector>

namespace oow::test {

/// One-sided periodogram power per bin (bin k at k * fs / n), summing to the
/// mean square of the signal.
inline std::vector<double> fftw_power(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> in(x.data(), x.data() + n);
  std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  std::vector<double> p(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double mag2 = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    const bool edge = k == 0 || (n % 2 == 0 && k == static_cast<std::size_t>(n / 2));
    p[k] = (edge ? 1.0 : 2.0) * mag2 / (static_cast<double>(n) * n);
  }
  return p;
}

inline double fftw_band(const Eigen::VectorXd& x, double fs, double lo, double hi) {
  const auto p = fftw_power(x);
  const double df = fs / static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f >= lo - 1e-9 && f <= hi + 1e-9) s += p[k];
  }
  return s;
}

}  // namespace oow::test
