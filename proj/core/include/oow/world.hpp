#pragma once

#include "oow/kinematics.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace oow::world {

using kinematics::Pose;

enum class BodyKind { ArmLink, Module, Iss, Obstacle };

std::string_view kind_name(BodyKind kind);

struct Sphere {
  double radius = 1.0;
};

/// Segment endpoints are expressed in the body frame.
struct Capsule {
  double radius = 0.1;
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
};

struct Box {
  Eigen::Vector3d half_extents = Eigen::Vector3d::Ones();
};

using Shape = std::variant<Sphere, Capsule, Box>;

struct Body {
  std::string id;
  BodyKind kind = BodyKind::Obstacle;
  Shape shape = Sphere{};
  Pose pose;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

bool shape_valid(const Shape& shape);

struct Contact {
  std::string body_a;
  std::string body_b;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitX();  // from a toward b
  double depth = 0.0;
  double time = 0.0;
  bool is_new = true;
};

/// Overlap test for one pair; normal points from a toward b.
std::optional<Contact> test_pair(const Body& a, const Body& b);

/// True for pairs that are checked at all: {arm link | module} x
/// {obstacle | ISS}, plus obstacle x obstacle.
bool pair_monitored(const Body& a, const Body& b);
/// True for monitored pairs whose new episodes cost points.
bool pair_scored(const Body& a, const Body& b);

/// Tracks overlap episodes across ticks. Arm links are grouped so that a
/// contact sliding from one link to the next stays a single episode.
class CollisionMonitor {
 public:
  std::vector<Contact> detect(const std::vector<Body>& bodies, double time);
  void reset() { active_.clear(); }

 private:
  std::set<std::pair<std::string, std::string>> active_;
};

/// Stateless pass: every overlapping monitored pair, all flagged new.
std::vector<Contact> detect_collisions(const std::vector<Body>& bodies);

/// Pushes obstacles out along the contact normal with a speed that clears
/// the penetration in one tick. Kinematic bodies (arm, ISS, module) keep
/// their state.
void resolve_contact(const Contact& contact, std::vector<Body>& bodies, double dt);

/// Constant-velocity drift of obstacles (no gravity, no drag).
void integrate(std::vector<Body>& bodies, double dt);

/// Rigid attachment of the research module to the end-effector frame.
class ModuleAttachment {
 public:
  bool attached() const { return attached_; }

  /// Throws StateError if already attached.
  void attach(const Pose& ee, const Body& module);
  void detach();
  /// Module pose for the given end-effector pose.
  Pose follow(const Pose& ee) const;
  const Eigen::Isometry3d& relative() const { return relative_; }

 private:
  bool attached_ = false;
  Eigen::Isometry3d relative_ = Eigen::Isometry3d::Identity();
};

}  // namespace oow::world
