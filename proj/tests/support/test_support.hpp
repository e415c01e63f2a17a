#pragma once

#include "oow/kinematics.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

namespace oow::test {

inline std::filesystem::path config_dir() { return OOW_CONFIG_DIR; }

inline kinematics::ArmModel planar_two_link() {
  kinematics::ArmModel arm;
  arm.dh = {{0.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 1.0, 0.0}};
  arm.max_velocity = Eigen::VectorXd::Constant(2, 10.0);
  return arm;
}

inline Eigen::VectorXd tone(double hz, double amplitude, double fs, Eigen::Index n, double phase = 0.0) {
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs + phase);
  }
  return x;
}

inline double rms(const Eigen::VectorXd& x) { return std::sqrt(x.squaredNorm() / static_cast<double>(x.size())); }

inline double db(double ratio) { return 20.0 * std::log10(ratio); }

}  // namespace oow::test
