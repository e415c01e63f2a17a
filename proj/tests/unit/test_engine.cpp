#include "oow/engine.hpp"
#include "oow/error.hpp"
#include "scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace oow;
using control::Button;
using control::InputCommand;

namespace {

mission::TrialConfig config(double latency = 0.0, bool tp = false) {
  mission::TrialConfig c;
  c.latency = latency;
  c.time_pressure = tp;
  return c;
}

void run_until(Engine& e, double t) {
  while (e.time() < t - 1e-9 && !e.finished()) e.step();
}

InputCommand press(double ts, std::uint64_t seq, control::ButtonSet b = {}) {
  InputCommand c;
  c.timestamp = ts;
  c.seq = seq;
  c.buttons = b;
  return c;
}

template <typename T>
int count(const telemetry::SessionLog& log) {
  int n = 0;
  for (const auto& e : log.events()) n += std::holds_alternative<T>(e.payload) ? 1 : 0;
  return n;
}

}  // namespace

TEST(Engine, StartsWithTrialStart) {
  Engine e(test::default_scenario(), config());
  ASSERT_EQ(e.log().events().size(), 1u);
  const auto& start = std::get<telemetry::TrialStart>(e.log().events()[0].payload);
  EXPECT_EQ(start.scenario_hash, scenario_hash(test::default_scenario()));
  EXPECT_DOUBLE_EQ(e.dt(), 0.02);
  EXPECT_DOUBLE_EQ(e.task().score, 300.0);
}

TEST(Engine, IdleArmStaysPut) {
  Engine e(test::default_scenario(), config());
  const Eigen::VectorXd q0 = e.joints().angles;
  run_until(e, 2.0);
  EXPECT_EQ(e.joints().angles, q0);
  EXPECT_EQ(e.tick(), 100);
  EXPECT_NEAR(e.time(), 2.0, 1e-12);
}

TEST(Engine, StickMovesTargetAtConfiguredSpeed) {
  Engine e(test::default_scenario(), config());
  const Eigen::Vector3d t0 = e.target();
  InputCommand c = press(0.0, 1);
  c.axes.lx = 1.0;
  e.submit(c);
  for (int i = 0; i < 50; ++i) e.step();
  // Camera 3 is fixed looking down, so its right axis is world x.
  EXPECT_NEAR((e.target() - t0 - Eigen::Vector3d(0.5, 0, 0)).norm(), 0.0, 1e-9);
  EXPECT_LT((e.ee().position - e.target()).norm(), 0.05);
}

TEST(Engine, JointSpeedNeverExceedsLimit) {
  Engine e(test::default_scenario(), config());
  InputCommand c = press(0.0, 1, {Button::R2, Button::Circle});
  c.axes = {1.0, -1.0, 1.0, 1.0};
  e.submit(c);
  const auto& vmax = e.scenario().arm.max_velocity;
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd before = e.joints().angles;
    e.step();
    const Eigen::VectorXd step = (e.joints().angles - before).cwiseAbs();
    for (Eigen::Index j = 0; j < step.size(); ++j) ASSERT_LE(step[j], vmax[j] * 0.02 + 1e-12);
  }
}

TEST(Engine, LatencyDelaysFirstMotion) {
  for (double latency : {0.0, 0.5, 1.0, 1.5}) {
    Engine e(test::default_scenario(), config(latency));
    const Eigen::VectorXd q0 = e.joints().angles;
    run_until(e, 3.0);
    InputCommand c = press(e.time(), 1);
    c.axes.lx = 1.0;
    e.submit(c);
    double moved_at = -1.0;
    while (e.time() < 6.0) {
      e.step();
      if (e.joints().angles != q0) {
        moved_at = e.time();
        break;
      }
    }
    ASSERT_GE(moved_at, 0.0) << latency;
    EXPECT_GE(moved_at - 3.0, latency - 1e-9) << latency;
    EXPECT_LE(moved_at - 3.0, latency + 0.02 + 1e-9) << latency;
  }
}

TEST(Engine, CameraCycleLogged) {
  Engine e(test::default_scenario(), config());
  const int start = e.rig().selected;
  e.submit(press(0.0, 1, {Button::R1}));
  e.step();
  e.submit(press(0.02, 2));
  e.step();
  e.submit(press(0.04, 3, {Button::R1}));
  e.step();
  EXPECT_EQ(e.rig().selected, (start + 2) % 4);
  EXPECT_EQ(count<telemetry::CameraSwitch>(e.log()), 2);
}

TEST(Engine, HeldButtonIsOneEdge) {
  Engine e(test::default_scenario(), config());
  e.submit(press(0.0, 1, {Button::R1}));
  for (int i = 0; i < 20; ++i) e.step();
  e.submit(press(e.time(), 2, {Button::R1, Button::DpadR}));
  for (int i = 0; i < 20; ++i) e.step();
  EXPECT_EQ(count<telemetry::CameraSwitch>(e.log()), 1);
}

TEST(Engine, GrappleOutOfReachIsIgnored) {
  Engine e(test::default_scenario(), config());
  e.submit(press(0.0, 1, {Button::Cross}));
  e.step();
  EXPECT_EQ(e.task().phase, mission::Phase::Approach);
  EXPECT_EQ(count<telemetry::Grapple>(e.log()), 0);
  EXPECT_EQ(count<telemetry::Latch>(e.log()), 0);
}

TEST(Engine, LedgerScore) {
  Engine e(test::ledger_scenario(), config());
  run_until(e, 39.98);
  e.submit(press(e.time(), 1, {Button::Cross}));
  e.step();
  EXPECT_NEAR(e.time(), 40.0, 1e-12);
  ASSERT_EQ(e.task().phase, mission::Phase::Grappled);
  EXPECT_NEAR(e.task().grapple->quality, 450.0, 1e-9);
  EXPECT_NEAR(e.task().score, 300.0 - 40.0 - 100.0 + 450.0, 1e-9);
  EXPECT_TRUE(e.attachment().attached());
  e.submit(press(e.time(), 2));
  run_until(e, 94.98);
  e.submit(press(e.time(), 3, {Button::Triangle}));
  e.step();
  ASSERT_TRUE(e.finished());
  EXPECT_EQ(e.task().phase, mission::Phase::Docked);
  EXPECT_NEAR(e.task().dock->quality, 1100.0, 1e-9);
  EXPECT_EQ(e.task().collisions, 1);
  const auto& end = std::get<telemetry::TrialEnd>(e.log().events().back().payload);
  EXPECT_EQ(end.reason, "docked");
  EXPECT_NEAR(end.final_score, 1660.0, 1e-9);
  EXPECT_NEAR(telemetry::recompute_score(e.log()), 1660.0, 1e-9);
  EXPECT_NEAR(e.log().events().back().time, 95.0, 1e-12);
}

TEST(Engine, AttachedModuleFollowsEe) {
  Engine e(test::ledger_scenario(), config());
  e.submit(press(0.0, 1, {Button::Cross}));
  e.step();
  ASSERT_TRUE(e.attachment().attached());
  const Eigen::Isometry3d rel0 = e.ee().isometry().inverse() * e.module().pose.isometry();
  InputCommand c = press(e.time(), 2);
  c.axes.lx = 1.0;
  c.axes.ly = 0.5;
  e.submit(c);
  for (int i = 0; i < 100; ++i) e.step();
  const Eigen::Isometry3d rel = e.ee().isometry().inverse() * e.module().pose.isometry();
  EXPECT_LT((rel.matrix() - rel0.matrix()).norm(), 1e-9);
  EXPECT_GT((e.module().pose.position - test::ledger_scenario().module.pose.position).norm(), 0.1);
}

TEST(Engine, TimePressureTimeout) {
  Engine e(test::default_scenario(), config(0.0, true));
  run_until(e, 300.0);
  ASSERT_TRUE(e.finished());
  const auto& last = e.log().events().back();
  EXPECT_EQ(std::get<telemetry::TrialEnd>(last.payload).reason, "timeout");
  EXPECT_NEAR(last.time, 240.0, 1e-12);
  EXPECT_EQ(e.snapshot().timer, mission::TimerColor::Expired);
}

TEST(Engine, NoTimeoutWithoutPressure) {
  Engine e(test::default_scenario(), config(0.0, false));
  run_until(e, 260.0);
  EXPECT_FALSE(e.finished());
  EXPECT_EQ(e.snapshot().timer, mission::TimerColor::White);
  e.end("aborted");
  EXPECT_TRUE(e.finished());
  EXPECT_THROW(e.submit(press(e.time(), 1)), StateError);
  e.step();
  EXPECT_NEAR(e.time(), 260.0, 1e-9);
}

TEST(Engine, RejectsStaleSeq) {
  Engine e(test::default_scenario(), config());
  e.submit(press(0.0, 4));
  EXPECT_THROW(e.submit(press(0.0, 4)), OrderingError);
}

TEST(Engine, ObstaclesOffRemovesThem) {
  mission::TrialConfig c = config();
  c.obstacles = false;
  Engine e(test::default_scenario(), c);
  EXPECT_TRUE(e.obstacles().empty());
  EXPECT_EQ(e.snapshot().bodies.size(), 1u);
}

TEST(Engine, SinkMatchesExport) {
  std::ostringstream sink;
  Engine e(test::ledger_scenario(), config(0.5), &sink);
  e.submit(press(0.0, 1, {Button::Cross}));
  run_until(e, 2.0);
  e.end("aborted");
  EXPECT_EQ(sink.str(), telemetry::export_log(e.log()));
}

TEST(Engine, SnapshotContents) {
  Engine e(test::default_scenario(), config(0.0, true));
  run_until(e, 185.0);
  const Snapshot s = e.snapshot();
  EXPECT_EQ(s.joints.size(), 7u);
  EXPECT_EQ(s.timer, mission::TimerColor::Yellow);
  EXPECT_EQ(s.phase, mission::Phase::Approach);
  EXPECT_DOUBLE_EQ(s.score, 300.0 - 180.0);
  EXPECT_EQ(s.bodies.size(), 4u);
  EXPECT_NEAR((s.ee.position - e.ee().position).norm(), 0.0, 0.0);
}
