#include <benchmark/benchmark.h>

#include "bbsi/ddrgf.hpp"
#include "bbsi/rgf.hpp"

using namespace bbsi;
using cd = std::complex<double>;

namespace {

void BM_gemm(benchmark::State& state) {
    const int n = int(state.range(0));
    detail::UniformSource src(1);
    DenseMatrix<cd> a(n, n), b(n, n), c(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            a(i, j) = src.next<cd>();
            b(i, j) = src.next<cd>();
        }
    KernelCounters counters;
    for (auto _ : state) {
        gemm_into(cd{1}, a, b, cd{0}, c, counters);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations());
    // 8 N^3 real FLOPs per complex GEMM (multiply-add counted as two)
    state.counters["GFLOPs"] = benchmark::Counter(8.0 * n * n * n * state.iterations(),
                                                  benchmark::Counter::kIsRate, benchmark::Counter::kIs1000);
}
BENCHMARK(BM_gemm)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

void BM_lu(benchmark::State& state) {
    const int n = int(state.range(0));
    auto m = random_spd_like<cd>(make_layout(1, n, 0), 2, 2.0);
    KernelCounters counters;
    for (auto _ : state) {
        auto f = lu_factor(m.block(0, 0), counters);
        benchmark::DoNotOptimize(f.packed.data());
    }
}
BENCHMARK(BM_lu)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

void BM_rgf_tridiag(benchmark::State& state) {
    const int l = int(state.range(0)), bs = int(state.range(1));
    auto m = random_spd_like<cd>(make_layout(l, bs, 1), 3, 2.0);
    for (auto _ : state) {
        auto [g, c] = rgf_tridiag(m);
        benchmark::DoNotOptimize(g.block(0, 0).data());
    }
}
BENCHMARK(BM_rgf_tridiag)
    ->Args({20, 64})
    ->Args({40, 64})
    ->Args({80, 64})
    ->Args({160, 64})
    ->Args({20, 128})
    ->Args({20, 256});

void BM_rgf_ndiag(benchmark::State& state) {
    const int w = int(state.range(0));
    auto m = random_spd_like<cd>(make_layout(40, 64, w), 4, 2.0);
    for (auto _ : state) {
        auto [g, c] = rgf_ndiag(m);
        benchmark::DoNotOptimize(g.block(0, 0).data());
    }
}
BENCHMARK(BM_rgf_ndiag)->Arg(1)->Arg(2)->Arg(3);

void BM_rgf_fused(benchmark::State& state) {
    const int w = int(state.range(0));
    auto m = random_spd_like<cd>(make_layout(40, 64, w), 4, 2.0);
    for (auto _ : state) {
        auto [g, c] = rgf_fused(m);
        benchmark::DoNotOptimize(g.block(0, 0).data());
    }
}
BENCHMARK(BM_rgf_fused)->Arg(2)->Arg(3);

void BM_ddrgf(benchmark::State& state) {
    const int threads = int(state.range(0));
    auto m = random_spd_like<cd>(make_layout(200, 64, 1), 5, 2.0);
    DomainPlan plan;
    plan.s2_levels = {4, 4};
    plan.n_threads = threads;
    for (auto _ : state) {
        auto [g, c] = ddrgf(m, plan);
        benchmark::DoNotOptimize(g.block(0, 0).data());
    }
}
BENCHMARK(BM_ddrgf)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
