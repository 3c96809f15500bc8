#include <benchmark/benchmark.h>

#include "cvqkd/analysis.hpp"

using namespace cvqkd;

namespace {

ProtocolParams params(double d = 10.0) {
    ProtocolParams p;
    p.transmittance = distance_to_transmittance({0.2, d});
    p.excess_noise = 0.2;
    return p;
}

void BM_SymplecticSpectrum(benchmark::State& state) {
    const auto s = propagate_full(params(), symmetric_attack(params(), 0.01, 0.02));
    for (auto _ : state) benchmark::DoNotOptimize(symplectic_eigenvalues(s));
}
BENCHMARK(BM_SymplecticSpectrum);

void BM_Williamson(benchmark::State& state) {
    const auto s = closed_form_cm(params(), symmetric_attack(params(), 0.01, 0.02));
    for (auto _ : state) benchmark::DoNotOptimize(williamson_decompose(s));
}
BENCHMARK(BM_Williamson);

void BM_KeyRate(benchmark::State& state) {
    const auto p = params();
    for (auto _ : state) benchmark::DoNotOptimize(key_rate(p, 0.0078, 0.0078));
}
BENCHMARK(BM_KeyRate);

void BM_OneWayKeyRate(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(one_way_key_rate(20.0, 0.63, 0.05, 1.0));
}
BENCHMARK(BM_OneWayKeyRate);

void BM_OptimalAttack(benchmark::State& state) {
    const auto p = params();
    SearchOptions o;
    o.mode = state.range(0) == 0 ? SearchMode::FullPlane : SearchMode::Diagonal;
    for (auto _ : state) benchmark::DoNotOptimize(find_optimal_attack(p, o));
}
BENCHMARK(BM_OptimalAttack)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
