#pragma once

#include "bbsi/cost_model.hpp"

namespace bbsi {

/// One point of the attainable-performance model for an N x N complex GEMM.
struct RooflinePoint {
    int dimension = 0;
    double work_flops = 0.0;
    double traffic_bytes = 0.0;
    double intensity = 0.0;          // FLOPs per byte
    double attainable_gflops = 0.0;  // min(peak, intensity * bandwidth)
    double measured_gflops = 0.0;
};

/// Exact arithmetic of the model: work 8N^2(N-2) FLOPs, traffic 64N^2 bytes.
RooflinePoint roofline(int n, double peak_gflops, double bandwidth_gbs, double measured_time_s);

/// Default sample counts by matrix dimension: 1000 up to 512, 100 up to
/// 1023... see implementation; large sizes drop to 10.
int default_samples(int n);

/// Times complex-double GEMM, LU and GETRS (with an N x N right-hand side)
/// at the given block size: 3 warm-up iterations, then `samples` timed ones,
/// arithmetic mean, fresh random matrices every iteration.
KernelRatios benchmark_kernels(int block_size, int samples);

}  // namespace bbsi
