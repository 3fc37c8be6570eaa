#include <benchmark/benchmark.h>

#include "trick/experiments.hpp"
#include "trick/integrity.hpp"

using namespace trick;

namespace {

void BM_EllipsoidalSolve(benchmark::State& state) {
  const Snapshot snap = synthetic_snapshot(11, static_cast<int>(state.range(0)), 2);
  SessionOptions opt;
  opt.gnss_sigma_m = 10.0;
  const Session s = run_session(snap, {}, opt);
  for (auto _ : state) benchmark::DoNotOptimize(ellipsoidal_multilaterate(s.sums));
  state.SetLabel(std::to_string(s.sums.size()) + " sums");
}
BENCHMARK(BM_EllipsoidalSolve)->Arg(4)->Arg(8)->Arg(16);

void BM_SphericalSolve(benchmark::State& state) {
  const Snapshot snap = synthetic_snapshot(12, 8, 1);
  const Session s = run_session(snap, {}, {});
  const auto ranges = victim_pseudoranges(s.exchanges[0].exchange, s.exchanges[0].response, s.broadcasts);
  for (auto _ : state) benchmark::DoNotOptimize(spherical_multilaterate(ranges));
}
BENCHMARK(BM_SphericalSolve);

void BM_Session(benchmark::State& state) {
  const Snapshot snap = synthetic_snapshot(13, 8, 2);
  SessionOptions opt;
  opt.gnss_sigma_m = 50.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_session(snap, {}, opt));
}
BENCHMARK(BM_Session);

void BM_FormSums(benchmark::State& state) {
  const Snapshot snap = synthetic_snapshot(14, 12, 1);
  const Session s = run_session(snap, {}, {});
  for (auto _ : state)
    benchmark::DoNotOptimize(form_sums(s.exchanges[0].exchange, s.exchanges[0].response, s.broadcasts));
}
BENCHMARK(BM_FormSums);

void BM_FirstCheck(benchmark::State& state) {
  const Snapshot snap = synthetic_snapshot(15, static_cast<int>(state.range(0)), 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(first_check(snap.ue, snap.leo_anchors[0].position, snap.second_anchor, snap.gnss));
}
BENCHMARK(BM_FirstCheck)->Arg(6)->Arg(20);

void BM_CoverageEpoch(benchmark::State& state) {
  const CoverageRun run = load_coverage(TRICK_DATA_DIR "/coverage.conf");
  const Sky sky = build_sky(run.sky);
  const auto mode = static_cast<CoverageMode>(state.range(0));
  double t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(covered_at(sky, run.sky, run.stations[0], mode, t, 60.0));
    t += 60;
  }
  state.SetLabel(to_string(mode));
}
BENCHMARK(BM_CoverageEpoch)->Arg(0)->Arg(1)->Arg(2);

}  // namespace
BENCHMARK_MAIN();
