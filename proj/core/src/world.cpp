#include "oow/world.hpp"

#include "oow/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace oow::world {

namespace {

struct Segment {
  Eigen::Vector3d p0;
  Eigen::Vector3d p1;
  double radius;
};

struct Obb {
  Eigen::Vector3d center;
  Eigen::Matrix3d axes;  // columns
  Eigen::Vector3d half;
};

Segment world_segment(const Body& body, const Capsule& c) {
  const Eigen::Isometry3d t = body.pose.isometry();
  return {t * c.p0, t * c.p1, c.radius};
}

Obb world_box(const Body& body, const Box& b) {
  return {body.pose.position, body.pose.orientation.normalized().toRotationMatrix(), b.half_extents};
}

Eigen::Vector3d closest_on_segment(const Eigen::Vector3d& p, const Segment& s) {
  const Eigen::Vector3d d = s.p1 - s.p0;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return s.p0;
  const double t = std::clamp((p - s.p0).dot(d) / len2, 0.0, 1.0);
  return s.p0 + t * d;
}

Eigen::Vector3d closest_on_box(const Eigen::Vector3d& p, const Obb& box) {
  Eigen::Vector3d local = box.axes.transpose() * (p - box.center);
  local = local.cwiseMax(-box.half).cwiseMin(box.half);
  return box.center + box.axes * local;
}

// Closest points between two segments (Ericson, Real-Time Collision Detection 5.1.9).
std::pair<Eigen::Vector3d, Eigen::Vector3d> closest_segments(const Segment& a, const Segment& b) {
  const Eigen::Vector3d d1 = a.p1 - a.p0;
  const Eigen::Vector3d d2 = b.p1 - b.p0;
  const Eigen::Vector3d r = a.p0 - b.p0;
  const double aa = d1.squaredNorm();
  const double ee = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (aa <= 1e-18 && ee <= 1e-18) return {a.p0, b.p0};
  if (aa <= 1e-18) {
    t = std::clamp(f / ee, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (ee <= 1e-18) {
      s = std::clamp(-c / aa, 0.0, 1.0);
    } else {
      const double bb = d1.dot(d2);
      const double denom = aa * ee - bb * bb;
      s = denom != 0.0 ? std::clamp((bb * f - c * ee) / denom, 0.0, 1.0) : 0.0;
      t = (bb * s + f) / ee;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / aa, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((bb - c) / aa, 0.0, 1.0);
      }
    }
  }
  return {a.p0 + s * d1, b.p0 + t * d2};
}

Eigen::Vector3d safe_normal(const Eigen::Vector3d& v) {
  const double n = v.norm();
  return n > 1e-12 ? Eigen::Vector3d(v / n) : Eigen::Vector3d::UnitX();
}

// Sphere-vs-sphere once both shapes are reduced to (center, radius).
std::optional<Contact> spheres(const Eigen::Vector3d& ca, double ra, const Eigen::Vector3d& cb,
                               double rb) {
  const Eigen::Vector3d d = cb - ca;
  const double dist = d.norm();
  if (dist >= ra + rb) return std::nullopt;
  Contact c;
  c.normal = safe_normal(d);
  c.depth = ra + rb - dist;
  c.point = ca + c.normal * (ra - 0.5 * c.depth);
  return c;
}

// Box (a) against a sphere (b).
std::optional<Contact> box_sphere(const Obb& box, const Eigen::Vector3d& center, double radius) {
  const Eigen::Vector3d q = closest_on_box(center, box);
  const Eigen::Vector3d d = center - q;
  const double dist = d.norm();
  if (dist >= radius) return std::nullopt;
  Contact c;
  if (dist > 1e-12) {
    c.normal = d / dist;
    c.depth = radius - dist;
    c.point = q + 0.5 * (radius - dist) * c.normal;
    return c;
  }
  // Center inside the box: exit through the nearest face.
  const Eigen::Vector3d local = box.axes.transpose() * (center - box.center);
  int axis = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double gap = box.half[i] - std::abs(local[i]);
    if (gap < best) {
      best = gap;
      axis = i;
    }
  }
  const double sign = local[axis] >= 0.0 ? 1.0 : -1.0;
  c.normal = sign * box.axes.col(axis);
  c.depth = best + radius;
  c.point = center;
  return c;
}

double box_distance(const Eigen::Vector3d& p, const Obb& box) {
  return (p - closest_on_box(p, box)).norm();
}

// Capsule (a) against a box (b). Distance to a convex set is convex along
// the segment, so a golden-section search finds the closest segment point.
std::optional<Contact> capsule_box(const Segment& seg, const Obb& box) {
  const Eigen::Vector3d d = seg.p1 - seg.p0;
  double lo = 0.0;
  double hi = 1.0;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = box_distance(seg.p0 + x1 * d, box);
  double f2 = box_distance(seg.p0 + x2 * d, box);
  for (int i = 0; i < 80; ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = box_distance(seg.p0 + x1 * d, box);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = box_distance(seg.p0 + x2 * d, box);
    }
  }
  double t = 0.5 * (lo + hi);
  double best = box_distance(seg.p0 + t * d, box);
  for (double end : {0.0, 1.0}) {
    const double f = box_distance(seg.p0 + end * d, box);
    if (f < best) {
      best = f;
      t = end;
    }
  }
  auto c = box_sphere(box, seg.p0 + t * d, seg.radius);
  if (!c) return std::nullopt;
  c->normal = -c->normal;  // box_sphere points box -> capsule
  return c;
}

std::optional<Contact> box_box(const Obb& a, const Obb& b) {
  std::array<Eigen::Vector3d, 15> axes;
  int n = 0;
  for (int i = 0; i < 3; ++i) axes[n++] = a.axes.col(i);
  for (int i = 0; i < 3; ++i) axes[n++] = b.axes.col(i);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) axes[n++] = a.axes.col(i).cross(b.axes.col(j));
  }
  const Eigen::Vector3d centers = b.center - a.center;
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_axis = Eigen::Vector3d::UnitX();
  for (const auto& raw : axes) {
    const double len = raw.norm();
    if (len < 1e-9) continue;
    const Eigen::Vector3d axis = raw / len;
    double ra = 0.0;
    double rb = 0.0;
    for (int i = 0; i < 3; ++i) {
      ra += a.half[i] * std::abs(a.axes.col(i).dot(axis));
      rb += b.half[i] * std::abs(b.axes.col(i).dot(axis));
    }
    const double sep = std::abs(centers.dot(axis));
    const double overlap = ra + rb - sep;
    if (overlap <= 0.0) return std::nullopt;
    if (overlap < best) {
      best = overlap;
      best_axis = centers.dot(axis) >= 0.0 ? axis : Eigen::Vector3d(-axis);
    }
  }
  Contact c;
  c.normal = best_axis;
  c.depth = best;
  c.point = 0.5 * (closest_on_box(b.center, a) + closest_on_box(a.center, b));
  return c;
}

std::optional<Contact> dispatch(const Body& a, const Body& b) {
  const Eigen::Vector3d& pa = a.pose.position;
  const Eigen::Vector3d& pb = b.pose.position;
  return std::visit(
      [&](const auto& sa, const auto& sb) -> std::optional<Contact> {
        using A = std::decay_t<decltype(sa)>;
        using B = std::decay_t<decltype(sb)>;
        if constexpr (std::is_same_v<A, Sphere> && std::is_same_v<B, Sphere>) {
          return spheres(pa, sa.radius, pb, sb.radius);
        } else if constexpr (std::is_same_v<A, Capsule> && std::is_same_v<B, Sphere>) {
          const Segment s = world_segment(a, sa);
          return spheres(closest_on_segment(pb, s), s.radius, pb, sb.radius);
        } else if constexpr (std::is_same_v<A, Capsule> && std::is_same_v<B, Capsule>) {
          const Segment s1 = world_segment(a, sa);
          const Segment s2 = world_segment(b, sb);
          const auto [q1, q2] = closest_segments(s1, s2);
          return spheres(q1, s1.radius, q2, s2.radius);
        } else if constexpr (std::is_same_v<A, Box> && std::is_same_v<B, Sphere>) {
          return box_sphere(world_box(a, sa), pb, sb.radius);
        } else if constexpr (std::is_same_v<A, Capsule> && std::is_same_v<B, Box>) {
          return capsule_box(world_segment(a, sa), world_box(b, sb));
        } else if constexpr (std::is_same_v<A, Box> && std::is_same_v<B, Box>) {
          return box_box(world_box(a, sa), world_box(b, sb));
        } else {
          // Remaining combinations are handled with the arguments swapped.
          auto c = dispatch(b, a);
          if (c) c->normal = -c->normal;
          return c;
        }
      },
      a.shape, b.shape);
}

bool is_actor(BodyKind k) { return k == BodyKind::ArmLink || k == BodyKind::Module; }
bool is_target(BodyKind k) { return k == BodyKind::Obstacle || k == BodyKind::Iss; }

std::string episode_group(const Body& b) { return b.kind == BodyKind::ArmLink ? "arm" : b.id; }

}  // namespace

std::string_view kind_name(BodyKind kind) {
  switch (kind) {
    case BodyKind::ArmLink: return "arm_link";
    case BodyKind::Module: return "module";
    case BodyKind::Iss: return "iss";
    case BodyKind::Obstacle: return "obstacle";
  }
  return "?";
}

bool shape_valid(const Shape& shape) {
  return std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Sphere>) {
          return s.radius > 0.0 && std::isfinite(s.radius);
        } else if constexpr (std::is_same_v<S, Capsule>) {
          return s.radius > 0.0 && s.p0.allFinite() && s.p1.allFinite();
        } else {
          return (s.half_extents.array() > 0.0).all() && s.half_extents.allFinite();
        }
      },
      shape);
}

std::optional<Contact> test_pair(const Body& a, const Body& b) {
  auto c = dispatch(a, b);
  if (c) {
    c->body_a = a.id;
    c->body_b = b.id;
  }
  return c;
}

bool pair_scored(const Body& a, const Body& b) {
  return (is_actor(a.kind) && is_target(b.kind)) || (is_actor(b.kind) && is_target(a.kind));
}

bool pair_monitored(const Body& a, const Body& b) {
  return pair_scored(a, b) || (a.kind == BodyKind::Obstacle && b.kind == BodyKind::Obstacle);
}

std::vector<Contact> detect_collisions(const std::vector<Body>& bodies) {
  std::vector<Contact> out;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      if (!pair_monitored(bodies[i], bodies[j])) continue;
      if (auto c = test_pair(bodies[i], bodies[j])) out.push_back(std::move(*c));
    }
  }
  return out;
}

std::vector<Contact> CollisionMonitor::detect(const std::vector<Body>& bodies, double time) {
  std::vector<Contact> out;
  std::set<std::pair<std::string, std::string>> now;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    for (std::size_t j = i + 1; j < bodies.size(); ++j) {
      if (!pair_monitored(bodies[i], bodies[j])) continue;
      auto c = test_pair(bodies[i], bodies[j]);
      if (!c) continue;
      auto key = std::minmax(episode_group(bodies[i]), episode_group(bodies[j]));
      std::pair<std::string, std::string> k{key.first, key.second};
      c->time = time;
      c->is_new = !active_.contains(k) && !now.contains(k);
      now.insert(std::move(k));
      out.push_back(std::move(*c));
    }
  }
  active_ = std::move(now);
  return out;
}

void resolve_contact(const Contact& contact, std::vector<Body>& bodies, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  auto find = [&](const std::string& id) -> Body* {
    for (auto& b : bodies) {
      if (b.id == id) return &b;
    }
    return nullptr;
  };
  Body* a = find(contact.body_a);
  Body* b = find(contact.body_b);
  if (!a || !b || contact.depth <= 0.0) return;

  const bool a_free = a->kind == BodyKind::Obstacle;
  const bool b_free = b->kind == BodyKind::Obstacle;
  if (!a_free && !b_free) return;
  const double share = (a_free && b_free) ? 0.5 : 1.0;
  const double speed = share * contact.depth / dt;
  auto push = [&](Body& body, const Eigen::Vector3d& n) {
    const double along = body.velocity.dot(n);
    if (along < speed) body.velocity += (speed - along) * n;
  };
  if (b_free) push(*b, contact.normal);
  if (a_free) push(*a, -contact.normal);
}

void integrate(std::vector<Body>& bodies, double dt) {
  for (auto& b : bodies) {
    if (b.kind == BodyKind::Obstacle) b.pose.position += b.velocity * dt;
  }
}

void ModuleAttachment::attach(const Pose& ee, const Body& module) {
  if (attached_) throw StateError("module already attached");
  relative_ = ee.isometry().inverse() * module.pose.isometry();
  attached_ = true;
}

void ModuleAttachment::detach() {
  if (!attached_) throw StateError("module not attached");
  attached_ = false;
}

Pose ModuleAttachment::follow(const Pose& ee) const {
  return Pose::from_isometry(ee.isometry() * relative_);
}

}  // namespace oow::world
