#include "fedq/fedosov.hpp"
#include "fedq/lattice.hpp"
#include "fedq/random.hpp"
#include "lattice_support.hpp"

#include <benchmark/benchmark.h>

using namespace fedq;

namespace {

template <class S>
void BM_WickMul(benchmark::State& st)
{
    const int n = int(st.range(0)), cap = int(st.range(1));
    Rng rng(1);
    const auto g = flat_chart<S>(n, cap + 1, cap);
    const auto a = random_element<S>(n, cap, cap + 1, rng, 12, 0, 0, 0.4);
    const auto b = random_element<S>(n, cap, cap + 1, rng, 12, 0, 1, 0.4);
    for (auto _ : st) benchmark::DoNotOptimize(wick_mul(a, b, g.omega, cap));
}
BENCHMARK_TEMPLATE(BM_WickMul, QQi)->Args({2, 6})->Args({4, 4})->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_WickMul, cplx)->Args({2, 6})->Args({4, 4})->Unit(benchmark::kMillisecond);

template <class S>
void BM_BuildR(benchmark::State& st)
{
    const int n = int(st.range(0)), cap = int(st.range(1));
    Rng rng(2);
    const auto g = random_chart<S>(n, cap + 1, cap, rng);
    for (auto _ : st) benchmark::DoNotOptimize(build_r(g, cap));
}
BENCHMARK_TEMPLATE(BM_BuildR, QQi)->Args({2, 6})->Args({4, 4})->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_BuildR, cplx)->Args({2, 6})->Args({4, 4})->Unit(benchmark::kMillisecond);

template <class S>
void BM_Star(benchmark::State& st)
{
    const int n = int(st.range(0)), cap = int(st.range(1));
    Rng rng(3);
    const auto fd = build_r(random_chart<S>(n, cap + 2, cap, rng), cap);
    const auto f = random_jet<S>(n, cap + 2, rng, 0.3), h = random_jet<S>(n, cap + 2, rng, 0.3);
    for (auto _ : st) benchmark::DoNotOptimize(star(f, h, fd));
}
BENCHMARK_TEMPLATE(BM_Star, QQi)->Args({2, 4})->Args({4, 4})->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Star, cplx)->Args({2, 4})->Args({4, 4})->Unit(benchmark::kMillisecond);

void BM_Propagators(benchmark::State& st)
{
    const LatticeModel md = test::desk_model();
    std::mt19937_64 rng(4);
    const FieldHistory phi = test::random_background(md, rng);
    for (auto _ : st) benchmark::DoNotOptimize(propagators(md, phi));
}
BENCHMARK(BM_Propagators)->Unit(benchmark::kMillisecond);

void BM_RetardedState(benchmark::State& st)
{
    const LatticeModel md = test::desk_model();
    std::mt19937_64 rng(5);
    const FieldHistory phi = test::random_background(md, rng);
    for (auto _ : st) benchmark::DoNotOptimize(retarded_state(md, phi));
}
BENCHMARK(BM_RetardedState)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
