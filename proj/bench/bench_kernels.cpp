// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "nopo/philox.hpp"
#include "nopo/positive_p.hpp"
#include "nopo/scan.hpp"

namespace {

const nopo::SystemParams kParams{};

nopo::EnsembleOptions ensemble_opts(int workers)
{
    nopo::EnsembleOptions o;
    o.n_trajectories = 256;
    o.transient = 2.0;
    o.workers = workers;
    return o;
}

nopo::PumpProfile below_threshold_harmonic(const nopo::DerivedConstants& dc)
{
    return nopo::PumpProfile::harmonic(0.9 * dc.f_th, 0.45 * dc.f_th, 2.0);
}

void BM_SdeStep(benchmark::State& state)
{
    const auto dc = nopo::derive_constants(kParams);
    const auto profile = below_threshold_harmonic(dc);
    nopo::TrajectoryState s;
    std::uint64_t draw = 0;
    for (auto _ : state) {
        s = nopo::sde_step(s, dc, profile, 1e-3, nopo::normal4(42, 0, draw++));
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_SdeStep);

void BM_EnsembleSerial(benchmark::State& state)
{
    const auto dc = nopo::derive_constants(kParams);
    const auto profile = below_threshold_harmonic(dc);
    for (auto _ : state) benchmark::DoNotOptimize(nopo::ensemble_run_serial(kParams, dc, profile, ensemble_opts(1)));
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond);

void BM_EnsembleParallel(benchmark::State& state)
{
    const auto dc = nopo::derive_constants(kParams);
    const auto profile = below_threshold_harmonic(dc);
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(nopo::ensemble_run(kParams, dc, profile, ensemble_opts(workers)));
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_EnsembleParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

const std::vector<double> kScanGrid{1.1, 1.3, 1.5, 2.0, 2.5, 3.0};

nopo::ScanFamily scan_family()
{
    nopo::ScanFamily f;
    f.f1_over_fbar = 0.75;
    return f;
}

void BM_ScanSerial(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            nopo::scan_vmin_serial(kParams, scan_family(), nopo::ScanAxis::FbarOverFth, kScanGrid, {0.75}));
    }
}
BENCHMARK(BM_ScanSerial)->Unit(benchmark::kMillisecond);

void BM_ScanParallel(benchmark::State& state)
{
    nopo::ScanOptions opts;
    opts.workers = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            nopo::scan_vmin(kParams, scan_family(), nopo::ScanAxis::FbarOverFth, kScanGrid, {0.75}, opts));
    }
}
BENCHMARK(BM_ScanParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
