#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cdtree/codes.hpp"
#include "cdtree/data.hpp"
#include "cdtree/histogram.hpp"
#include "cdtree/learner.hpp"

namespace {

// Cold cache each iteration: cost of building the regret table up to k.
void BM_RegretCold(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const auto k = static_cast<std::uint64_t>(state.range(1));
    for (auto _ : state) {
        cdtree::RegretCache cache;
        benchmark::DoNotOptimize(cdtree::log_multinomial_regret(n, k, cache));
    }
}
BENCHMARK(BM_RegretCold)->Args({100, 30})->Args({2000, 100})->Args({20000, 500});

void BM_RegretWarm(benchmark::State& state) {
    cdtree::RegretCache cache;
    cdtree::log_multinomial_regret(2000, 100, cache);
    for (auto _ : state) benchmark::DoNotOptimize(cdtree::log_multinomial_regret(2000, 100, cache));
}
BENCHMARK(BM_RegretWarm);

void BM_OptimalHistogram(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(state.range(0)));
    for (double& x : v) x = z(rng);
    const cdtree::Bounds b{-6.0, 6.0};
    cdtree::RegretCache cache;
    for (auto _ : state) benchmark::DoNotOptimize(cdtree::optimal_histogram(v, b, 30, cache));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OptimalHistogram)->Arg(100)->Arg(1000)->Arg(10000);

void BM_FitStep(benchmark::State& state) {
    const auto frame = cdtree::make_step_dataset(static_cast<std::size_t>(state.range(0)),
                                                 static_cast<std::size_t>(state.range(1)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(cdtree::fit(frame, {}));
}
BENCHMARK(BM_FitStep)->Args({500, 0})->Args({2000, 0})->Args({2000, 20})->Unit(benchmark::kMillisecond);

void BM_FitNaiveSearch(benchmark::State& state) {
    const auto frame = cdtree::make_step_dataset(2000, 5, 3);
    cdtree::FitOptions naive;
    naive.reuse_leaf_searches = false;
    for (auto _ : state) benchmark::DoNotOptimize(cdtree::fit(frame, {}, naive));
}
BENCHMARK(BM_FitNaiveSearch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
