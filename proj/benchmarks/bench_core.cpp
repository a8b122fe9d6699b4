#include "chainres/capacitance.hpp"
#include "chainres/chain.hpp"
#include "chainres/evaluator.hpp"
#include "chainres/rootfind.hpp"
#include "chainres/series.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace chainres;

namespace {

ParamVector chain_of(std::size_t n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> t(2 * n - 1);
    for (auto& x : t) x = u(rng);
    return make_params(t);
}

} // namespace

static void BM_EvalF(benchmark::State& state) {
    const auto p = chain_of(static_cast<std::size_t>(state.range(0)));
    cplx k(1.3, -0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_f_with_derivative(k, p, 0.5));
        k += 1e-6;
    }
}
BENCHMARK(BM_EvalF)->RangeMultiplier(4)->Range(1, 256);

static void BM_EvalG(benchmark::State& state) {
    const auto p = chain_of(static_cast<std::size_t>(state.range(0)));
    const cplx nu = 2.0 * 0.5 / 1.5;
    cplx k(1.3, -0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_g_with_derivative(k, p, nu));
        k += 1e-6;
    }
}
BENCHMARK(BM_EvalG)->RangeMultiplier(4)->Range(1, 256);

static void BM_FindZeros(benchmark::State& state) {
    const auto p = chain_of(static_cast<std::size_t>(state.range(0)));
    const cplx sigma = 0.5;
    const auto strip = strip_bounds(expand_f_trig(p, sigma), true);
    FindOptions o;
    o.bandwidth = p.norm1();
    const Rect rect{0.1, 10.0, strip ? strip->lower - 0.1 : -5.0, 0.1};
    for (auto _ : state) {
        const auto res = find_zeros([&](cplx k) { return eval_f_with_derivative(k, p, sigma); }, rect, o);
        benchmark::DoNotOptimize(res.zeros.size());
    }
}
BENCHMARK(BM_FindZeros)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Eigensolve(benchmark::State& state) {
    const auto c = build_capacitance(chain_of(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(eigensolve(c));
}
BENCHMARK(BM_Eigensolve)->RangeMultiplier(4)->Range(2, 512)->Unit(benchmark::kMicrosecond);

static void BM_BivariateSeries(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto p = chain_of(static_cast<std::size_t>(n));
    for (auto _ : state) benchmark::DoNotOptimize(g_bivariate_series(p, 2 * n, n));
}
BENCHMARK(BM_BivariateSeries)->DenseRange(1, 6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
