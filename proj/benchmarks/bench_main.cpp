#include <benchmark/benchmark.h>

#include "srdetect/calibrate.hpp"
#include "srdetect/montecarlo.hpp"
#include "srdetect/solver.hpp"

using namespace srdetect;

namespace {

void BM_LrStep(benchmark::State& state) {
    Xoshiro256PlusPlus rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(lr_step(rng.standard_normal(), 0.5));
}
BENCHMARK(BM_LrStep);

void BM_NormalDraw(benchmark::State& state) {
    Xoshiro256PlusPlus rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(rng.standard_normal());
}
BENCHMARK(BM_NormalDraw);

void BM_Zeta(benchmark::State& state) {
    const double tp = state.range(0) / 10.0;
    for (auto _ : state) benchmark::DoNotOptimize(zeta(tp));
}
BENCHMARK(BM_Zeta)->Arg(1)->Arg(5)->Arg(10);

void BM_SrRunToAlarm(benchmark::State& state) {
    const GaussianModel model(0.5, 0.5);
    std::uint64_t rep = 0;
    for (auto _ : state) {
        GaussianStream stream(0.5, std::nullopt, Xoshiro256PlusPlus(substream_seed(3, rep++)));
        benchmark::DoNotOptimize(run_to_alarm(stream, Procedure::Sr, 74.76, model));
    }
}
BENCHMARK(BM_SrRunToAlarm);

void BM_BuildGrid(benchmark::State& state) {
    const GaussianModel model(0.5, 0.5);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_grid(model, 747.615, n));
    state.SetComplexityN(n);
}
BENCHMARK(BM_BuildGrid)->Arg(256)->Arg(512)->Arg(1024);

void BM_SolveArl(benchmark::State& state) {
    const GaussianModel model(0.5, 0.5);
    const auto grid = build_grid(model, 747.615, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_arl(grid));
}
BENCHMARK(BM_SolveArl)->Arg(256)->Arg(512)->Arg(1024);

void BM_StaddReport(benchmark::State& state) {
    const GaussianModel model(0.7, 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(stadd_at_gamma(model, 100.0));
}
BENCHMARK(BM_StaddReport);

}  // namespace

BENCHMARK_MAIN();
