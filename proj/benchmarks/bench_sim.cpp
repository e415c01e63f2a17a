#include "oow/engine.hpp"
#include "oow/gateway.hpp"
#include "oow/kinematics.hpp"
#include "oow/scenario.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

using namespace oow;

namespace {

const std::filesystem::path kConfig = OOW_CONFIG_DIR;

void BM_ForwardKinematics(benchmark::State& state) {
  const auto arm = kinematics::load_arm(kConfig / "arm.dh");
  kinematics::JointState q{Eigen::VectorXd::Constant(7, 0.3)};
  for (auto _ : state) benchmark::DoNotOptimize(kinematics::forward_kinematics(arm, q));
}
BENCHMARK(BM_ForwardKinematics);

void BM_Jacobian(benchmark::State& state) {
  const auto arm = kinematics::load_arm(kConfig / "arm.dh");
  kinematics::JointState q{Eigen::VectorXd::Constant(7, 0.3)};
  for (auto _ : state) benchmark::DoNotOptimize(kinematics::position_jacobian(arm, q));
}
BENCHMARK(BM_Jacobian);

void BM_SolveIk(benchmark::State& state) {
  const auto arm = kinematics::load_arm(kConfig / "arm.dh");
  kinematics::JointState q{Eigen::VectorXd::Constant(7, 0.3)};
  const Eigen::Vector3d target = kinematics::forward_kinematics(arm, q).end_effector.position + Eigen::Vector3d(0.2, 0.1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(kinematics::solve_ik(arm, target, q));
}
BENCHMARK(BM_SolveIk);

// One 50 Hz tick with the default scene: queue, IK, attachment and collisions.
void BM_EngineTick(benchmark::State& state) {
  const Scenario scenario = load_scenario(kConfig / "scenario.json");
  Engine e(scenario, {});
  control::InputCommand c;
  c.axes.lx = 0.3;
  c.seq = 1;
  e.submit(c);
  for (auto _ : state) {
    e.step();
    if (e.finished()) {
      state.PauseTiming();
      e = Engine(scenario, {});
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_EngineTick);

void BM_HeadlessDockRun(benchmark::State& state) {
  const Scenario scenario = load_scenario(kConfig / "scenario.json");
  const auto pilot = gateway::load_pilot(kConfig / "pilots" / "dock.json");
  for (auto _ : state) benchmark::DoNotOptimize(gateway::run_headless(scenario, {}, pilot));
}
BENCHMARK(BM_HeadlessDockRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
