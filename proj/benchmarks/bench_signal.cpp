#include "oow/dsp.hpp"
#include "oow/riemann.hpp"
#include "oow/synthgen.hpp"

#include <benchmark/benchmark.h>

using namespace oow;

namespace {

dsp::Recording recording(int channels, double seconds) {
  synthgen::GenOptions g;
  g.trials_per_class = 1;
  g.trial_seconds = seconds;
  synthgen::ClassSpec spec{"LW", {}, synthgen::random_spd(channels, 3.0, 1), {}};
  return synthgen::gen_subject({spec}, "S01", 2, g).front();
}

void BM_Bandpass(benchmark::State& state) {
  const auto rec = recording(32, 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::bandpass(rec));
}
BENCHMARK(BM_Bandpass)->Unit(benchmark::kMillisecond);

void BM_WaveletReduce(benchmark::State& state) {
  const auto rec = recording(32, 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::wavelet_reduce(rec));
}
BENCHMARK(BM_WaveletReduce)->Unit(benchmark::kMillisecond);

void BM_IcaClean(benchmark::State& state) {
  const auto rec = recording(static_cast<int>(state.range(0)), 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::ica_clean(rec));
}
BENCHMARK(BM_IcaClean)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Covariance(benchmark::State& state) {
  const auto rec = recording(9, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(riemann::covariance(rec.data));
}
BENCHMARK(BM_Covariance);

void BM_Distance(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  const auto a = synthgen::random_spd(d, 5.0, 1), b = synthgen::random_spd(d, 5.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(riemann::distance(a, b));
}
BENCHMARK(BM_Distance)->Arg(9)->Arg(32);

void BM_KarcherMean(benchmark::State& state) {
  std::vector<riemann::SpdMatrix> set;
  for (int i = 0; i < state.range(0); ++i) set.push_back(synthgen::random_spd(9, 5.0, static_cast<std::uint64_t>(i)));
  for (auto _ : state) benchmark::DoNotOptimize(riemann::karcher_mean(set));
}
BENCHMARK(BM_KarcherMean)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
