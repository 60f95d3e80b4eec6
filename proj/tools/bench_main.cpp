// Microbenchmarks comparing the OpenMP kernels against their serial reference
// implementations, plus the batch classifier they feed.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "sset/blackbox.hpp"
#include "sset/core.hpp"
#include "sset/kernels.hpp"

namespace {

struct Fixture {
    sset::TimeSeriesInstance ref;
    std::vector<sset::LabeledInstance> pool;
    std::vector<sset::TimeSeriesInstance> batch;

    Fixture(int steps, int signals, int count) : ref("ref", steps, signals) {
        sset::RandomSource rng(1234);
        for (double& v : ref.values) {
            v = rng.next_unit();
        }
        pool.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            sset::TimeSeriesInstance inst("p" + std::to_string(i), steps, signals);
            for (double& v : inst.values) {
                v = rng.next_unit();
            }
            batch.push_back(inst);
            pool.push_back({std::move(inst), i % 3});
        }
    }
};

const Fixture& fixture() {
    static Fixture f(30, 8, 4096);
    return f;
}

void BM_BatchDistancesSerial(benchmark::State& state) {
    const Fixture& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sset::serial::batch_distances(f.ref, f.pool));
    }
}

void BM_BatchDistancesParallel(benchmark::State& state) {
    const Fixture& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(sset::batch_distances(f.ref, f.pool));
    }
}

void BM_CentroidPredictBatchSerial(benchmark::State& state) {
    const Fixture& f = fixture();
    const sset::CentroidClassifier oracle = sset::fit_centroid_classifier(f.pool, 3, 12.0);
    const sset::PredictionOracle& base = oracle;
    for (auto _ : state) {
        // The interface default is the serial reference: predict per instance.
        benchmark::DoNotOptimize(base.PredictionOracle::predict_batch(f.batch));
    }
}

void BM_CentroidPredictBatchParallel(benchmark::State& state) {
    const Fixture& f = fixture();
    const sset::CentroidClassifier oracle = sset::fit_centroid_classifier(f.pool, 3, 12.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(oracle.predict_batch(f.batch));
    }
}

BENCHMARK(BM_BatchDistancesSerial);
BENCHMARK(BM_BatchDistancesParallel);
BENCHMARK(BM_CentroidPredictBatchSerial);
BENCHMARK(BM_CentroidPredictBatchParallel);

}  // namespace

BENCHMARK_MAIN();
