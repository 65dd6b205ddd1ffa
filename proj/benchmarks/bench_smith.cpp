#include <benchmark/benchmark.h>

#include "kkfilt/smith.hpp"

#include <random>

using namespace kkf;

namespace {

IntMatrix random_matrix(int n, int spread, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> val(-spread, spread);
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = val(rng);
    return m;
}

}  // namespace

static void BM_smith(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    IntMatrix m = random_matrix(n, 50, 1234 + n);
    for (auto _ : state) {
        auto r = smith_normal_form(m);
        benchmark::DoNotOptimize(r.s);
    }
}
BENCHMARK(BM_smith)->Arg(4)->Arg(8)->Arg(12)->Arg(16);

static void BM_smith_wide_entries(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    IntMatrix m = random_matrix(n, 1000000, 99 + n);
    for (auto _ : state) {
        auto r = smith_normal_form(m);
        benchmark::DoNotOptimize(r.s);
    }
}
BENCHMARK(BM_smith_wide_entries)->Arg(6)->Arg(10);

BENCHMARK_MAIN();
