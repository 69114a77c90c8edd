#include "bbsi/microbench.hpp"

#include <chrono>

#include "bbsi/block_banded.hpp"

namespace bbsi {

RooflinePoint roofline(int n, double peak_gflops, double bandwidth_gbs, double measured_time_s) {
    if (n < 3) throw invalid_argument_error("roofline: n must be >= 3");
    if (peak_gflops <= 0 || bandwidth_gbs <= 0 || measured_time_s <= 0)
        throw invalid_argument_error("roofline: peak, bandwidth and time must be positive");
    RooflinePoint p;
    p.dimension = n;
    p.work_flops = 8.0 * double(n) * double(n) * double(n - 2);
    p.traffic_bytes = 64.0 * double(n) * double(n);
    p.intensity = p.work_flops / p.traffic_bytes;
    p.attainable_gflops = std::min(peak_gflops, p.intensity * bandwidth_gbs);
    p.measured_gflops = p.work_flops / measured_time_s * 1e-9;
    return p;
}

int default_samples(int n) {
    if (n <= 512) return 1000;
    if (n < 2048) return 100;
    return 10;
}

namespace {

using cd = std::complex<double>;
using clock_type = std::chrono::steady_clock;

DenseMatrix<cd> random_dense(int n, detail::UniformSource& src) {
    DenseMatrix<cd> m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = src.next<cd>();
    return m;
}

template <class Prepare, class Run>
double mean_seconds(int samples, Prepare&& prepare, Run&& run) {
    for (int i = 0; i < 3; ++i) {
        prepare(i);
        run();
    }
    double total = 0.0;
    for (int i = 0; i < samples; ++i) {
        prepare(3 + i);
        const auto t0 = clock_type::now();
        run();
        const auto t1 = clock_type::now();
        total += std::chrono::duration<double>(t1 - t0).count();
    }
    return total / samples;
}

}  // namespace

KernelRatios benchmark_kernels(int block_size, int samples) {
    if (block_size < 1 || samples < 1)
        throw invalid_argument_error("benchmark_kernels: block_size and samples must be >= 1");
    const int n = block_size;
    detail::UniformSource src(0x5eedULL + uint64_t(n));

    DenseMatrix<cd> a, b, c(n, n), rhs;
    std::vector<int> ipiv(n);
    const cd one{1}, zero{0};

    const double t_gemm = mean_seconds(
        samples,
        [&](int) {
            a = random_dense(n, src);
            b = random_dense(n, src);
        },
        [&] { backend::gemm_raw(n, n, n, one, a.data(), n, b.data(), n, zero, c.data(), n); });

    const double t_lu = mean_seconds(
        samples, [&](int) { a = random_dense(n, src); },
        [&] { backend::getrf_raw(n, a.data(), n, ipiv.data()); });

    // GETRS timed with an n x n right-hand side on a pre-factored matrix
    const double t_getrs = mean_seconds(
        samples,
        [&](int) {
            a = random_dense(n, src);
            backend::getrf_raw(n, a.data(), n, ipiv.data());
            rhs = random_dense(n, src);
        },
        [&] { backend::getrs_raw('N', n, n, a.data(), n, ipiv.data(), rhs.data(), n); });

    KernelRatios r;
    r.block_size = n;
    r.t_gemm = t_gemm;
    r.r_lu = t_lu / t_gemm;
    r.r_getrs = t_getrs / t_gemm;
    r.sample_count = samples;
    return r;
}

}  // namespace bbsi
