// Parallel kernels against their serial references.

#include <thread>

#include <benchmark/benchmark.h>

#include "ofdmlink/harness.hpp"

using namespace ofdmlink;

namespace {

struct DemapInput {
    OfdmDims dims{72, 14};
    Constellation c = gray_qam(6);
    PilotPattern pattern = make_pilot_pattern("1P", dims);
    ComplexGrid y{dims};
    ChannelEstimate est{ComplexGrid(dims), ResourceGrid<double>(dims, 0.01), std::nullopt};

    DemapInput() {
        Rng rng(1);
        for (std::size_t k = 0; k < dims.size(); ++k) {
            est.h_hat[k] = complex_normal(rng);
            y[k] = est.h_hat[k] * c.point(k % 64) + complex_normal(rng, 0.05);
        }
    }
};

void BM_DemapSerial(benchmark::State& st) {
    const DemapInput in;
    for (auto _ : st) benchmark::DoNotOptimize(gaussian_demap(in.c, in.y, in.est, 0.05, in.pattern));
}

void BM_DemapParallel(benchmark::State& st) {
    const DemapInput in;
    for (auto _ : st) benchmark::DoNotOptimize(gaussian_demap_parallel(in.c, in.y, in.est, 0.05, in.pattern));
}

CovarianceSpec corr_spec() {
    CovarianceSpec s;
    s.samples = 4096;
    return s;
}

void BM_CorrelationSerial(benchmark::State& st) {
    for (auto _ : st) {
        benchmark::DoNotOptimize(estimate_correlation_serial(OfdmDims(72, 14), RadioParams{}, corr_spec()));
    }
}

void BM_CorrelationParallel(benchmark::State& st) {
    const int workers = static_cast<int>(st.range(0));
    for (auto _ : st) {
        benchmark::DoNotOptimize(estimate_correlation(OfdmDims(72, 14), RadioParams{}, corr_spec(), workers));
    }
}

PaprOptions papr_opt() {
    PaprOptions o;
    o.symbols = 20'000;
    return o;
}

void BM_PaprSerial(benchmark::State& st) {
    const auto c = gray_qam(6);
    for (auto _ : st) benchmark::DoNotOptimize(papr_samples_serial(c, papr_opt()));
}

void BM_PaprParallel(benchmark::State& st) {
    const auto c = gray_qam(6);
    for (auto _ : st) benchmark::DoNotOptimize(papr_samples(c, papr_opt()));
}

void BM_Sweep(benchmark::State& st) {
    ScenarioConfig cfg;
    cfg.dims = OfdmDims(8, 14);
    cfg.snr_points = {10.0};
    cfg.frames = 60;
    cfg.covariance.samples = 2000;
    cfg.receivers = {ReceiverKind::non_iterative};
    const auto s = prepare_scenario(cfg);
    const int workers = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(run_sweep(s, {workers, {}}));
}

const int kThreads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));

}  // namespace

BENCHMARK(BM_DemapSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DemapParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CorrelationSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelationParallel)->Arg(1)->Arg(kThreads)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PaprSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PaprParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Arg(1)->Arg(kThreads)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
