#include <benchmark/benchmark.h>

#include "stealthy/gaussian_field.hpp"
#include "stealthy/points.hpp"
#include "stealthy/rigidity.hpp"
#include "stealthy/rng.hpp"
#include "stealthy/statistics.hpp"

using namespace stealthy;

static void BM_ForwardDFT(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    TorusGeometry g(1, n, static_cast<double>(n));
    CounterStream s(1);
    LatticeArray a(g, Space::physical);
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] = s.normal(i);
    for (auto _ : state) {
        auto hat = forward_dft(a);
        benchmark::DoNotOptimize(hat.values.data());
    }
}
BENCHMARK(BM_ForwardDFT)->Arg(64)->Arg(256)->Arg(512);

static void BM_SampleField(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    TorusGeometry g(1, n, static_cast<double>(n));
    GaussianSpec spec{StructureFunction::stealthy_flat(g, 0.5), 7};
    std::uint64_t idx = 0;
    for (auto _ : state) {
        auto f = sample_one(spec, idx++);
        benchmark::DoNotOptimize(f.values.data());
    }
}
BENCHMARK(BM_SampleField)->Arg(64)->Arg(256);

static void BM_CollectiveEnergy(benchmark::State& state) {
    const std::size_t N = static_cast<std::size_t>(state.range(0));
    TorusGeometry g(1, 128, 64.0);
    auto gap = GapRegion::ball_at_origin(g, 0.5);
    CounterStream s(3);
    PointConfiguration cfg;
    cfg.d = 1;
    cfg.box_length = 64.0;
    for (std::size_t j = 0; j < N; ++j) cfg.coords.push_back(s.uniform(j, 0.0, 64.0));
    std::vector<double> grad;
    for (auto _ : state) {
        benchmark::DoNotOptimize(collective_energy_gradient(cfg, gap, grad));
    }
}
BENCHMARK(BM_CollectiveEnergy)->Arg(64)->Arg(256);

static void BM_GenerateStealthy(benchmark::State& state) {
    TorusGeometry g(1, 128, 64.0);
    auto gap = GapRegion::ball_at_origin(g, 0.5);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto cfg = generate_stealthy(64, 1, 64.0, gap, seed++);
        benchmark::DoNotOptimize(cfg.coords.data());
    }
}
BENCHMARK(BM_GenerateStealthy)->Unit(benchmark::kMillisecond);

static void BM_ReconstructField(benchmark::State& state) {
    TorusGeometry g(1, 32, 32.0);
    auto S = StructureFunction::stealthy_flat(g, 1.0);
    auto f = sample_one({S, 5}, 0);
    WindowSplit split{{0, 1, 2, 3, 4}};
    for (auto _ : state) {
        auto rec = reconstruct_field_inside(f, S.gap, split);
        benchmark::DoNotOptimize(rec.inside_values.data());
    }
}
BENCHMARK(BM_ReconstructField);

BENCHMARK_MAIN();
