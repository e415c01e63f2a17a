#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <filesystem>
#include <string>
#include <vector>

namespace oow::kinematics {

/// One row of a standard Denavit-Hartenberg table (radians, metres).
/// Link transform: Rz(theta + theta_offset) * Tz(d) * Tx(a) * Rx(alpha).
struct DHRow {
  double theta_offset = 0.0;
  double d = 0.0;
  double a = 0.0;
  double alpha = 0.0;
};

struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  static Pose from_isometry(const Eigen::Isometry3d& t);
  Eigen::Isometry3d isometry() const;
};

/// Serial chain description. The Canadarm-like default has 7 rows, but the
/// chain length is whatever the table says (tests use a planar 2-link arm).
struct ArmModel {
  std::vector<DHRow> dh;
  Eigen::VectorXd max_velocity;  // rad/s, one per joint
  Eigen::Isometry3d base = Eigen::Isometry3d::Identity();
  double wrist_rate = 0.5;       // rad/s at full command

  std::size_t joint_count() const { return dh.size(); }
  /// Sum of |a| + |d| over all rows.
  double total_reach() const;
};

struct JointState {
  Eigen::VectorXd angles;
};

struct FkResult {
  /// frames[0] is the base, frames[i] the frame after joint i.
  std::vector<Eigen::Isometry3d> frames;
  Pose end_effector;
};

FkResult forward_kinematics(const ArmModel& arm, const JointState& joints);

/// Position-only Jacobian for the first n_active revolute joints (3 x n_active).
Eigen::MatrixXd position_jacobian(const ArmModel& arm, const JointState& joints,
                                  std::size_t n_active = 5);

/// Numerical rank from singular values relative to the largest one.
int jacobian_rank(const Eigen::MatrixXd& jacobian, double rel_tol = 1e-9);

struct IkOptions {
  double step = 0.1;
  double eps = 0.01;
  int max_iter = 200;
  std::size_t n_active = 5;
  /// When > 0 the joints may move at most max_velocity * dt away from the
  /// starting configuration, and each iteration's delta is clamped likewise.
  double dt = 0.0;
};

struct IkResult {
  JointState joints;
  bool converged = false;
  int iterations = 0;
  double error = 0.0;  // final ||ee - target||
};

/// Jacobian-transpose gradient descent on 0.5 * ||ee - target||^2 with a
/// backtracking line search starting from options.step. Joints past
/// n_active are never modified.
IkResult solve_ik(const ArmModel& arm, const Eigen::Vector3d& target,
                  const JointState& joints, const IkOptions& options = {});

struct WristCommand {
  double roll = 0.0;   // joint 7
  double pitch = 0.0;  // joint 6
  double yaw = 0.0;    // joint 5
};

/// Direct rate control of the three distal joints; commands clamped to
/// [-1, 1] and the resulting delta clamped to max_velocity * dt.
JointState apply_wrist(const ArmModel& arm, const JointState& joints,
                       const WristCommand& cmd, double dt);

/// Rotation angle between two orientations in degrees, in [0, 180].
/// Insensitive to the quaternion sign.
double angular_distance_deg(const Eigen::Quaterniond& qa, const Eigen::Quaterniond& qb);

/// Reads the `arm.dh` table format (see docs/arm_dh.md).
ArmModel load_arm(const std::filesystem::path& path);
ArmModel parse_arm(const std::string& text);

}  // namespace oow::kinematics
