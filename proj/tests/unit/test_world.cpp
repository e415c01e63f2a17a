#include "oow/error.hpp"
#include "oow/world.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace oow;
using namespace oow::world;

namespace {

Body sphere(const std::string& id, BodyKind kind, Eigen::Vector3d at, double r) {
  Body b;
  b.id = id;
  b.kind = kind;
  b.shape = Sphere{r};
  b.pose.position = at;
  return b;
}

Body capsule(const std::string& id, Eigen::Vector3d p0, Eigen::Vector3d p1, double r) {
  Body b;
  b.id = id;
  b.kind = BodyKind::ArmLink;
  b.shape = Capsule{r, p0, p1};
  return b;
}

Body box(const std::string& id, BodyKind kind, Eigen::Vector3d at, Eigen::Vector3d half,
         Eigen::Quaterniond q = Eigen::Quaterniond::Identity()) {
  Body b;
  b.id = id;
  b.kind = kind;
  b.shape = Box{half};
  b.pose.position = at;
  b.pose.orientation = q;
  return b;
}

// Point-to-segment distance by dense sampling, independent of the library's projection.
double sampled_segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100000; ++i) {
    const double t = i / 100000.0;
    best = std::min(best, (a + t * (b - a) - p).norm());
  }
  return best;
}

}  // namespace

TEST(Collision, SeparatedSpheres) {
  const auto a = sphere("a", BodyKind::Obstacle, {0, 0, 0}, 1.0);
  const auto b = sphere("b", BodyKind::Obstacle, {3, 0, 0}, 1.0);
  EXPECT_FALSE(test_pair(a, b).has_value());
  EXPECT_TRUE(detect_collisions({a, b}).empty());
}

TEST(Collision, OverlappingSpheres) {
  const auto a = sphere("a", BodyKind::Obstacle, {0, 0, 0}, 1.0);
  const auto b = sphere("b", BodyKind::Obstacle, {1.5, 0, 0}, 1.0);
  const auto c = test_pair(a, b);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR((c->normal - Eigen::Vector3d::UnitX()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(c->depth, 0.5, 1e-12);
  EXPECT_EQ(c->body_a, "a");
  EXPECT_EQ(c->body_b, "b");
}

TEST(Collision, CapsuleSphereAgainstDistanceOracle) {
  const Eigen::Vector3d p0(0, 0, 0), p1(4, 0, 0);
  // Closest distance 1.2 < 0.3 + 1.
  const Eigen::Vector3d center(2.5, 1.2, 0);
  ASSERT_NEAR(sampled_segment_distance(center, p0, p1), 1.2, 1e-9);
  const auto c = test_pair(capsule("link", p0, p1, 0.3), sphere("o", BodyKind::Obstacle, center, 1.0));
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(c->depth, 1.3 - 1.2, 1e-12);
  EXPECT_NEAR((c->normal - Eigen::Vector3d::UnitY()).norm(), 0.0, 1e-12);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector3d a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), s(u(rng), u(rng), u(rng));
    const double dist = sampled_segment_distance(s, a, b);
    const auto hit = test_pair(capsule("l", a, b, 0.4), sphere("o", BodyKind::Obstacle, s, 0.8));
    if (dist < 1.2 - 1e-4) {
      ASSERT_TRUE(hit.has_value());
      EXPECT_NEAR(hit->depth, 1.2 - dist, 1e-4);
    } else if (dist > 1.2 + 1e-4) {
      EXPECT_FALSE(hit.has_value());
    }
  }
}

TEST(Collision, SymmetricInArguments) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int hits = 0;
  for (int k = 0; k < 300; ++k) {
    const std::vector<Body> bodies = {
        capsule("l", {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, 0.3),
        sphere("o", BodyKind::Obstacle, {u(rng), u(rng), u(rng)}, 0.7),
        box("iss", BodyKind::Iss, {u(rng), u(rng), u(rng)}, {0.8, 0.5, 0.6}, Eigen::Quaterniond::UnitRandom()),
        box("m", BodyKind::Module, {u(rng), u(rng), u(rng)}, {0.4, 0.4, 0.4}, Eigen::Quaterniond::UnitRandom())};
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      for (std::size_t j = 0; j < bodies.size(); ++j) {
        if (i == j) continue;
        const auto ab = test_pair(bodies[i], bodies[j]);
        const auto ba = test_pair(bodies[j], bodies[i]);
        ASSERT_EQ(ab.has_value(), ba.has_value());
        if (!ab) continue;
        ++hits;
        EXPECT_NEAR(ab->depth, ba->depth, 1e-6);
        EXPECT_NEAR((ab->normal + ba->normal).norm(), 0.0, 1e-6);
        EXPECT_NEAR(ab->normal.norm(), 1.0, 1e-9);
      }
    }
  }
  EXPECT_GT(hits, 0);
}

TEST(Collision, BoxSphereFaceAndInside) {
  const auto b = box("iss", BodyKind::Iss, {0, 0, 0}, {1, 1, 1});
  const auto near = test_pair(b, sphere("o", BodyKind::Obstacle, {0, 0, 1.5}, 0.7));
  ASSERT_TRUE(near.has_value());
  EXPECT_NEAR(near->depth, 0.2, 1e-12);
  EXPECT_NEAR((near->normal - Eigen::Vector3d::UnitZ()).norm(), 0.0, 1e-12);
  EXPECT_FALSE(test_pair(b, sphere("o", BodyKind::Obstacle, {0, 0, 1.8}, 0.7)).has_value());
  const auto inside = test_pair(b, sphere("o", BodyKind::Obstacle, {0.9, 0, 0}, 0.2));
  ASSERT_TRUE(inside.has_value());
  EXPECT_NEAR((inside->normal - Eigen::Vector3d::UnitX()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(inside->depth, 0.3, 1e-12);
}

TEST(Collision, RotatedBoxes) {
  const auto a = box("a", BodyKind::Iss, {0, 0, 0}, {1, 1, 1});
  const Eigen::Quaterniond q45(Eigen::AngleAxisd(std::numbers::pi / 4, Eigen::Vector3d::UnitZ()));
  // Corner of the rotated box reaches sqrt(2) along x.
  EXPECT_TRUE(test_pair(a, box("b", BodyKind::Module, {2.3, 0, 0}, {1, 1, 1}, q45)).has_value());
  EXPECT_FALSE(test_pair(a, box("b", BodyKind::Module, {2.5, 0, 0}, {1, 1, 1}, q45)).has_value());
}

TEST(Collision, CapsuleBoxEndAndSide) {
  const auto b = box("iss", BodyKind::Iss, {0, 0, 0}, {1, 1, 1});
  EXPECT_TRUE(test_pair(capsule("l", {-3, 0, 1.2}, {3, 0, 1.2}, 0.3), b).has_value());
  EXPECT_FALSE(test_pair(capsule("l", {-3, 0, 1.4}, {3, 0, 1.4}, 0.3), b).has_value());
  EXPECT_TRUE(test_pair(capsule("l", {1.2, 0, 0}, {5, 0, 0}, 0.3), b).has_value());
  EXPECT_FALSE(test_pair(capsule("l", {1.4, 0, 0}, {5, 0, 0}, 0.3), b).has_value());
}

TEST(Collision, MonitoredPairs) {
  const auto link = capsule("l", {0, 0, 0}, {1, 0, 0}, 0.2);
  const auto link2 = capsule("l2", {0, 0, 0}, {1, 0, 0}, 0.2);
  const auto mod = box("m", BodyKind::Module, {0, 0, 0}, {1, 1, 1});
  const auto iss = box("i", BodyKind::Iss, {0, 0, 0}, {1, 1, 1});
  const auto obs = sphere("o", BodyKind::Obstacle, {0, 0, 0}, 1);
  EXPECT_TRUE(pair_scored(link, obs));
  EXPECT_TRUE(pair_scored(iss, mod));
  EXPECT_FALSE(pair_scored(obs, obs));
  EXPECT_TRUE(pair_monitored(obs, obs));
  EXPECT_FALSE(pair_monitored(link, link2));
  EXPECT_FALSE(pair_monitored(link, mod));
  EXPECT_FALSE(pair_monitored(obs, iss));
  // Overlapping link/module/ISS triple only reports the scored pairs.
  EXPECT_EQ(detect_collisions({link, mod, iss}).size(), 2u);
}

TEST(CollisionMonitor, OneNewContactPerEpisode) {
  CollisionMonitor m;
  Body link = capsule("l", {0, 0, 0}, {1, 0, 0}, 0.2);
  Body obs = sphere("o", BodyKind::Obstacle, {0.5, 0.9, 0}, 1.0);
  int fresh = 0;
  for (int t = 0; t < 10; ++t) {
    for (const auto& c : m.detect({link, obs}, t * 0.02)) fresh += c.is_new ? 1 : 0;
  }
  EXPECT_EQ(fresh, 1);
  obs.pose.position.y() = 5.0;
  EXPECT_TRUE(m.detect({link, obs}, 0.3).empty());
  obs.pose.position.y() = 0.9;
  const auto again = m.detect({link, obs}, 0.32);
  ASSERT_EQ(again.size(), 1u);
  EXPECT_TRUE(again[0].is_new);
  EXPECT_DOUBLE_EQ(again[0].time, 0.32);
}

TEST(CollisionMonitor, SlidingAcrossArmLinksStaysOneEpisode) {
  CollisionMonitor m;
  const Body l1 = capsule("link1", {0, 0, 0}, {1, 0, 0}, 0.2);
  const Body l2 = capsule("link2", {1, 0, 0}, {2, 0, 0}, 0.2);
  Body obs = sphere("o", BodyKind::Obstacle, {0.5, 0.5, 0}, 0.5);
  int fresh = 0;
  for (int t = 0; t <= 20; ++t) {
    obs.pose.position.x() = 0.5 + 0.05 * t;
    for (const auto& c : m.detect({l1, l2, obs}, t * 0.02)) fresh += c.is_new ? 1 : 0;
  }
  EXPECT_EQ(fresh, 1);
}

TEST(Response, ObstaclePushedAlongNormal) {
  std::vector<Body> bodies = {capsule("l", {0, 0, 0}, {1, 0, 0}, 0.3),
                              sphere("o", BodyKind::Obstacle, {1.8, 0, 0}, 1.0)};
  const auto c = test_pair(bodies[0], bodies[1]);
  ASSERT_TRUE(c.has_value());
  resolve_contact(*c, bodies, 0.02);
  EXPECT_GT(bodies[1].velocity.x(), 0.0);
  EXPECT_NEAR(bodies[1].velocity.x(), c->depth / 0.02, 1e-12);
  EXPECT_TRUE(bodies[0].velocity.isZero());
  EXPECT_EQ(std::get<Capsule>(bodies[0].shape).p1, Eigen::Vector3d(1, 0, 0));
}

TEST(Response, SeparatedBodiesUnchanged) {
  std::vector<Body> bodies = {capsule("l", {0, 0, 0}, {1, 0, 0}, 0.3),
                              sphere("o", BodyKind::Obstacle, {5, 0, 0}, 1.0)};
  const auto before = bodies;
  for (const auto& c : detect_collisions(bodies)) resolve_contact(c, bodies, 0.02);
  EXPECT_EQ(bodies[1].velocity, before[1].velocity);
  EXPECT_EQ(bodies[1].pose.position, before[1].pose.position);
}

TEST(Response, DriftIsStraightLine) {
  std::vector<Body> bodies = {sphere("o", BodyKind::Obstacle, {0, 0, 0}, 1.0),
                              box("iss", BodyKind::Iss, {9, 9, 9}, {1, 1, 1})};
  bodies[0].velocity = Eigen::Vector3d(0.1, -0.2, 0.05);
  bodies[1].velocity = Eigen::Vector3d(1, 1, 1);
  for (int i = 0; i < 100; ++i) integrate(bodies, 0.02);
  EXPECT_NEAR((bodies[0].pose.position - Eigen::Vector3d(0.2, -0.4, 0.1)).norm(), 0.0, 1e-12);
  EXPECT_EQ(bodies[0].velocity, Eigen::Vector3d(0.1, -0.2, 0.05));
  EXPECT_EQ(bodies[1].pose.position, Eigen::Vector3d(9, 9, 9));
}

TEST(Attachment, TranslationFollowsEe) {
  ModuleAttachment att;
  kinematics::Pose ee;
  ee.position = Eigen::Vector3d(1, 2, 3);
  const Body mod = box("m", BodyKind::Module, {1, 2, 4}, {1, 1, 1});
  att.attach(ee, mod);
  ee.position += Eigen::Vector3d(1, 0, 0);
  const auto p = att.follow(ee);
  EXPECT_NEAR((p.position - Eigen::Vector3d(2, 2, 4)).norm(), 0.0, 1e-12);
}

TEST(Attachment, RotationAboutEeFrame) {
  ModuleAttachment att;
  kinematics::Pose ee;
  const Body mod = box("m", BodyKind::Module, {1, 0, 0}, {1, 1, 1});
  att.attach(ee, mod);
  ee.orientation = Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ());
  const auto p = att.follow(ee);
  EXPECT_NEAR((p.position - Eigen::Vector3d(0, 1, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(kinematics::angular_distance_deg(p.orientation, ee.orientation), 0.0, 1e-9);
}

TEST(Attachment, RelativePoseConstantAcrossTicks) {
  ModuleAttachment att;
  kinematics::Pose ee;
  ee.position = Eigen::Vector3d(0.3, -1, 2);
  ee.orientation = Eigen::Quaterniond::UnitRandom();
  Body mod = box("m", BodyKind::Module, {1, 0.5, 2}, {1, 1, 1}, Eigen::Quaterniond::UnitRandom());
  att.attach(ee, mod);
  const Eigen::Isometry3d rel0 = ee.isometry().inverse() * mod.pose.isometry();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.1);
  for (int k = 0; k < 500; ++k) {
    ee.position += Eigen::Vector3d(n(rng), n(rng), n(rng));
    ee.orientation = (ee.orientation * Eigen::AngleAxisd(n(rng), Eigen::Vector3d::UnitY())).normalized();
    mod.pose = att.follow(ee);
  }
  const Eigen::Isometry3d rel = ee.isometry().inverse() * mod.pose.isometry();
  EXPECT_LT((rel.matrix() - rel0.matrix()).norm(), 1e-9);
}

TEST(Attachment, StateErrors) {
  ModuleAttachment att;
  EXPECT_THROW(att.detach(), StateError);
  att.attach({}, box("m", BodyKind::Module, {0, 0, 0}, {1, 1, 1}));
  EXPECT_THROW(att.attach({}, box("m", BodyKind::Module, {0, 0, 0}, {1, 1, 1})), StateError);
  att.detach();
  EXPECT_FALSE(att.attached());
}

TEST(Shapes, Validity) {
  EXPECT_TRUE(shape_valid(Sphere{0.1}));
  EXPECT_FALSE(shape_valid(Sphere{0.0}));
  EXPECT_FALSE(shape_valid(Box{Eigen::Vector3d(1, 0, 1)}));
  EXPECT_FALSE(shape_valid(Capsule{-1, {}, {}}));
}
