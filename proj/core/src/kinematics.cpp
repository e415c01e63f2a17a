#include "oow/kinematics.hpp"

#include "oow/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace oow::kinematics {

namespace {

Eigen::Isometry3d link_transform(const DHRow& row, double theta) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.rotate(Eigen::AngleAxisd(theta + row.theta_offset, Eigen::Vector3d::UnitZ()));
  t.translate(Eigen::Vector3d(row.a, 0.0, row.d));
  t.rotate(Eigen::AngleAxisd(row.alpha, Eigen::Vector3d::UnitX()));
  return t;
}

void check_joints(const ArmModel& arm, const JointState& joints) {
  if (static_cast<std::size_t>(joints.angles.size()) != arm.joint_count()) {
    throw DimensionError("joint vector has " + std::to_string(joints.angles.size()) +
                         " entries, arm has " + std::to_string(arm.joint_count()));
  }
}

Eigen::Vector3d ee_position(const ArmModel& arm, const Eigen::VectorXd& q) {
  Eigen::Isometry3d t = arm.base;
  for (std::size_t i = 0; i < arm.dh.size(); ++i) {
    t = t * link_transform(arm.dh[i], q[static_cast<Eigen::Index>(i)]);
  }
  return t.translation();
}

}  // namespace

Pose Pose::from_isometry(const Eigen::Isometry3d& t) {
  Pose p;
  p.position = t.translation();
  p.orientation = Eigen::Quaterniond(t.rotation()).normalized();
  return p;
}

Eigen::Isometry3d Pose::isometry() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translate(position);
  t.rotate(orientation.normalized());
  return t;
}

double ArmModel::total_reach() const {
  double sum = 0.0;
  for (const auto& row : dh) sum += std::abs(row.a) + std::abs(row.d);
  return sum;
}

FkResult forward_kinematics(const ArmModel& arm, const JointState& joints) {
  check_joints(arm, joints);
  FkResult out;
  out.frames.reserve(arm.dh.size() + 1);
  out.frames.push_back(arm.base);
  for (std::size_t i = 0; i < arm.dh.size(); ++i) {
    out.frames.push_back(out.frames.back() *
                         link_transform(arm.dh[i], joints.angles[static_cast<Eigen::Index>(i)]));
  }
  out.end_effector = Pose::from_isometry(out.frames.back());
  return out;
}

Eigen::MatrixXd position_jacobian(const ArmModel& arm, const JointState& joints,
                                  std::size_t n_active) {
  if (n_active > arm.joint_count()) {
    throw ParameterError("n_active exceeds joint count");
  }
  const FkResult fk = forward_kinematics(arm, joints);
  const Eigen::Vector3d ee = fk.end_effector.position;
  Eigen::MatrixXd jac(3, static_cast<Eigen::Index>(n_active));
  for (std::size_t j = 0; j < n_active; ++j) {
    // Joint j rotates about the z axis of the frame before it.
    const Eigen::Isometry3d& f = fk.frames[j];
    const Eigen::Vector3d axis = f.linear().col(2);
    jac.col(static_cast<Eigen::Index>(j)) = axis.cross(ee - f.translation());
  }
  return jac;
}

int jacobian_rank(const Eigen::MatrixXd& jacobian, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * s[0]) ++rank;
  }
  return rank;
}

IkResult solve_ik(const ArmModel& arm, const Eigen::Vector3d& target, const JointState& joints,
                  const IkOptions& options) {
  check_joints(arm, joints);
  if (!(options.step > 0.0) || !(options.eps > 0.0)) {
    throw ParameterError("solve_ik requires step > 0 and eps > 0");
  }
  const std::size_t n_active = std::min(options.n_active, arm.joint_count());
  const auto n = static_cast<Eigen::Index>(n_active);

  const Eigen::VectorXd start = joints.angles;
  Eigen::VectorXd limit = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  if (options.dt > 0.0) limit = arm.max_velocity.head(n) * options.dt;

  IkResult result;
  Eigen::VectorXd q = start;
  Eigen::Vector3d err = target - ee_position(arm, q);
  double cost = err.squaredNorm();

  auto project = [&](Eigen::VectorXd candidate, const Eigen::VectorXd& from) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double delta = std::clamp(candidate[j] - from[j], -limit[j], limit[j]);
      candidate[j] = std::clamp(from[j] + delta, start[j] - limit[j], start[j] + limit[j]);
    }
    return candidate;
  };

  int it = 0;
  Eigen::VectorXd prev_q, prev_grad;
  double last_alpha = options.step;
  while (std::sqrt(cost) > options.eps && it < options.max_iter) {
    const Eigen::MatrixXd jac = position_jacobian(arm, JointState{q}, n_active);
    const Eigen::VectorXd grad = jac.transpose() * err;  // descent direction
    if (grad.squaredNorm() == 0.0) break;

    // First trial step: the larger of the configured step and the
    // Barzilai-Borwein estimate from the previous iterate. Across negative
    // curvature the last accepted step is doubled instead.
    double alpha = options.step;
    if (it > 0) {
      const Eigen::VectorXd s = q.head(n) - prev_q;
      const Eigen::VectorXd y = prev_grad - grad;
      const double curvature = s.dot(y);
      alpha = std::max(alpha, curvature > 0.0 ? s.squaredNorm() / curvature : 2.0 * last_alpha);
    }
    prev_q = q.head(n);
    prev_grad = grad;
    bool improved = false;
    Eigen::VectorXd next;
    double next_cost = cost;
    for (int halvings = 0; halvings < 40; ++halvings, alpha *= 0.5) {
      next = q;
      next.head(n) = project(q.head(n) + alpha * grad, q.head(n));
      next_cost = (target - ee_position(arm, next)).squaredNorm();
      if (next_cost < cost) {
        improved = true;
        break;
      }
    }
    ++it;
    if (!improved) break;
    last_alpha = alpha;
    q = next;
    err = target - ee_position(arm, q);
    cost = next_cost;
  }

  result.joints.angles = q;
  result.iterations = it;
  result.error = std::sqrt(cost);
  result.converged = result.error <= options.eps;
  return result;
}

JointState apply_wrist(const ArmModel& arm, const JointState& joints, const WristCommand& cmd,
                       double dt) {
  check_joints(arm, joints);
  if (arm.joint_count() < 7) throw DimensionError("wrist control needs a 7-joint arm");
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");

  JointState out = joints;
  const double cmds[3] = {cmd.yaw, cmd.pitch, cmd.roll};
  for (int k = 0; k < 3; ++k) {
    const Eigen::Index j = 4 + k;
    const double c = std::clamp(cmds[k], -1.0, 1.0);
    const double cap = arm.max_velocity[j] * dt;
    out.angles[j] += std::clamp(c * arm.wrist_rate * dt, -cap, cap);
  }
  return out;
}

double angular_distance_deg(const Eigen::Quaterniond& qa, const Eigen::Quaterniond& qb) {
  const Eigen::Quaterniond rel = qa.normalized().conjugate() * qb.normalized();
  const double v = rel.vec().norm();
  const double w = std::abs(rel.w());
  return 2.0 * std::atan2(v, w) * 180.0 / std::numbers::pi;
}

ArmModel parse_arm(const std::string& text) {
  ArmModel arm;
  std::vector<double> vmax;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    if (key == "joint") {
      std::string name;
      DHRow row;
      double v = 0.0;
      if (!(fields >> name >> row.theta_offset >> row.d >> row.a >> row.alpha >> v)) {
        throw ParseError(lineno, "joint needs: name theta_offset d a alpha max_velocity");
      }
      if (!std::isfinite(row.theta_offset) || !std::isfinite(row.d) || !std::isfinite(row.a) ||
          !std::isfinite(row.alpha) || !(v > 0.0)) {
        throw ParseError(lineno, "non-finite DH value or non-positive velocity");
      }
      arm.dh.push_back(row);
      vmax.push_back(v);
    } else if (key == "wrist_rate") {
      if (!(fields >> arm.wrist_rate) || !(arm.wrist_rate > 0.0)) {
        throw ParseError(lineno, "wrist_rate needs a positive value");
      }
    } else if (key == "base") {
      double x, y, z, qw, qx, qy, qz;
      if (!(fields >> x >> y >> z >> qw >> qx >> qy >> qz)) {
        throw ParseError(lineno, "base needs: x y z qw qx qy qz");
      }
      arm.base = Pose{{x, y, z}, Eigen::Quaterniond(qw, qx, qy, qz).normalized()}.isometry();
    } else {
      throw ParseError(lineno, "unknown directive '" + key + "'");
    }
  }
  if (arm.dh.empty()) throw ParseError(lineno, "no joint rows");
  arm.max_velocity = Eigen::Map<Eigen::VectorXd>(vmax.data(), static_cast<Eigen::Index>(vmax.size()));
  return arm;
}

ArmModel load_arm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open arm table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_arm(buf.str());
}

}  // namespace oow::kinematics
