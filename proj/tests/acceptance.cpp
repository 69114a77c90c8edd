// Acceptance gate: runs every shipping criterion at its stated tolerance and
// prints one pass/fail line per criterion. Returns nonzero when any hard
// criterion fails; the two hardware-sensitive criteria degrade to flagged
// passes on machines that cannot exercise them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

#include "bbsi/cost_model.hpp"
#include "bbsi/ddrgf.hpp"
#include "bbsi/microbench.hpp"
#include "bbsi/rgf.hpp"

using namespace bbsi;
using cd = std::complex<double>;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double max_block_error(const BlockBandedMatrix<cd>& a, const BlockBandedMatrix<cd>& b) {
    double e = 0.0;
    for (int i = 0; i < a.num_layers(); ++i)
        for (int off = -a.bandwidth(); off <= a.bandwidth(); ++off)
            if (a.in_band(i, off))
                e = std::max(e, rel_frobenius_error(a.block(i, off), b.block(i, off)));
    return e;
}

template <class F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = int(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool plan_feasible(int l, const std::vector<int>& levels) {
    long long lk = l;
    for (int s2 : levels) {
        if (lk < 1 + s2) return false;
        lk = (lk + s2) / (1 + s2);
    }
    return true;
}

// 1. Solver outputs match the dense-inversion oracle.
void criterion_1() {
    const double tol = 1e-10;
    const int bs_set[] = {1, 2, 4, 8};
    double worst = 0.0;
    int instances = 0;
    for (int i = 0; instances < 200; ++i) {
        const int w = 1 + i % 3;
        const int l = 1 + i % 12;
        if (l < w + 1) continue;
        const int bs = bs_set[i % 4];
        auto m = random_spd_like<cd>(make_layout(l, bs, w), uint64_t(1000 + i), 2.0);
        auto oracle = oracle_selected_inverse(m);
        worst = std::max(worst, max_block_error(rgf_ndiag(m).first, oracle));
        worst = std::max(worst, max_block_error(rgf_fused(m).first, oracle));
        if (w == 1) worst = std::max(worst, max_block_error(rgf_tridiag(m).first, oracle));
        ++instances;
    }
    report(1, worst <= tol,
           "oracle equivalence over 200 instances, max error " + std::to_string(worst));
}

// 2. Domain decomposition reproduces the sequential solver, independent of
//    the thread count.
void criterion_2() {
    const std::vector<std::vector<int>> plans = {{1}, {2}, {3}, {4}, {2, 1},
                                                 {4, 2}, {3, 2}, {4, 2, 1}, {2, 2, 2}};
    const int bs_set[] = {2, 4, 8};
    double worst_vs_rgf = 0.0, worst_vs_threads = 0.0;
    int instances = 0;
    for (int i = 0; instances < 60; ++i) {
        const int l = 6 + (i * 7) % 35;
        const auto& levels = plans[i % plans.size()];
        if (!plan_feasible(l, levels)) continue;
        auto m = random_spd_like<cd>(make_layout(l, bs_set[i % 3], 1), uint64_t(2000 + i), 2.0);
        auto ref = rgf_tridiag(m).first;
        DomainPlan plan;
        plan.s2_levels = levels;
        BlockBandedMatrix<cd> first;
        for (int nt : {1, 2, 4}) {
            plan.n_threads = nt;
            auto g = ddrgf(m, plan).first;
            if (nt == 1) {
                first = g;
                worst_vs_rgf = std::max(worst_vs_rgf, max_block_error(g, ref));
            } else {
                worst_vs_threads = std::max(worst_vs_threads, max_block_error(g, first));
            }
        }
        ++instances;
    }
    report(2, worst_vs_rgf <= 1e-10 && worst_vs_threads <= 1e-12,
           "ddrgf vs rgf max " + std::to_string(worst_vs_rgf) + ", thread variance max " +
               std::to_string(worst_vs_threads) + " over 60 instances");
}

// 3. Instrumented kernel counts equal the closed forms, exactly.
void criterion_3() {
    long long mismatches = 0;
    for (int w = 1; w <= 3; ++w)
        for (int l = w + 1; l <= 12; ++l) {
            auto m = random_spd_like<cd>(make_layout(l, 2, w), uint64_t(3000 + 16 * l + w), 2.0);
            if (rgf_ndiag(m).second != predict_nrgf_counters(l, w)) ++mismatches;
            if (w == 1 && rgf_tridiag(m).second != predict_rgf_counters(l)) ++mismatches;
        }
    report(3, mismatches == 0,
           "counter closed forms, " + std::to_string(mismatches) + " mismatches");
}

// 4. The n-diagonal cost model collapses onto the tridiagonal one at w = 1.
void criterion_4() {
    std::mt19937_64 rng(4);
    int mismatches = 0;
    for (int t = 0; t < 50; ++t) {
        const long long l = 2 + int(rng() % 500);
        KernelRatios r{64, 1.0, double(rng() % 4096) / 256.0, double(rng() % 4096) / 256.0, 1};
        if (cost_nrgf(l, 1, r).gemm_equivalents != cost_rgf(l, r).gemm_equivalents) ++mismatches;
    }
    report(4, mismatches == 0,
           "cost_nrgf(l,1) == cost_rgf(l) on 50 random pairs, " + std::to_string(mismatches) +
               " mismatches");
}

// 5. Halo overhead of the extended solver: 0, 0, 2, 6 extra GEMMs.
void criterion_5() {
    const long long expected[] = {0, 0, 2, 6};
    bool ok = true;
    std::string seen;
    for (int l = 1; l <= 4; ++l) {
        auto m = random_spd_like<cd>(make_layout(l, 2, l == 1 ? 0 : 1), uint64_t(5000 + l), 2.0);
        const long long extra =
            rgf_extended(m).second.n_gemm - rgf_tridiag(m).second.n_gemm;
        ok = ok && extra == expected[l - 1] && rgf_extra_gemms(l) == expected[l - 1];
        seen += (l > 1 ? "/" : "") + std::to_string(extra);
    }
    report(5, ok, "extended-solver extra GEMMs for l=1..4: " + seen + " (want 0/0/2/6)");
}

// 6. Wall time grows linearly with the layer count.
void criterion_6() {
    std::vector<double> ls, ts;
    for (int l : {20, 40, 80, 160}) {
        auto m = random_spd_like<cd>(make_layout(l, 64, 1), uint64_t(6000 + l), 2.0);
        ls.push_back(l);
        ts.push_back(time_best_of(3, [&] { rgf_tridiag(m); }));
    }
    const double slope = loglog_slope(ls, ts);
    report(6, std::abs(slope - 1.0) <= 0.1,
           "layer-count scaling slope " + std::to_string(slope) + " (want 1.0 +- 0.1)");
}

// 7. Wall time vs block size approaches cubic scaling.
void criterion_7() {
    std::vector<double> bs, ts;
    for (int b : {64, 128, 256, 512}) {
        auto m = random_spd_like<cd>(make_layout(20, b, 1), uint64_t(7000 + b), 2.0);
        bs.push_back(b);
        ts.push_back(time_best_of(b <= 128 ? 2 : 1, [&] { rgf_tridiag(m); }));
    }
    const double slope = loglog_slope(bs, ts);
    report(7, slope >= 2.2 && slope <= 3.3,
           "block-size scaling slope " + std::to_string(slope) + " (want [2.2, 3.3])");
}

// 8. Native n-diagonal elimination beats the fused baseline, and the cost
//    models predict the same ordering.
void criterion_8() {
    bool measured_ok = true, modeled_ok = true;
    std::string detail;
    auto r128 = benchmark_kernels(128, 5);
    for (int w : {2, 3}) {
        auto m = random_spd_like<cd>(make_layout(40, 128, w), uint64_t(8000 + w), 2.0);
        const double t_native = time_best_of(2, [&] { rgf_ndiag(m); });
        const double t_fused = time_best_of(2, [&] { rgf_fused(m); });
        measured_ok = measured_ok && t_native <= t_fused;

        auto r_super = benchmark_kernels(128 * w, 3);
        const double c_native = cost_nrgf(40, w, r128).predicted_seconds;
        const double c_fused = cost_fused(40, w, r_super).predicted_seconds;
        modeled_ok = modeled_ok && c_native <= c_fused;
        detail += "w=" + std::to_string(w) + " measured " + std::to_string(t_native) + "s vs " +
                  std::to_string(t_fused) + "s; ";
    }
    report(8, measured_ok && modeled_ok,
           "native vs fused at l=40, b=128: " + detail +
               (modeled_ok ? "cost model agrees" : "cost model disagrees"));
}

// 9. Parallel speedup and the extra-arithmetic property. Soft on machines
//    with fewer than 4 hardware threads.
void criterion_9() {
    const unsigned cores = std::thread::hardware_concurrency();
    auto m = random_spd_like<cd>(make_layout(200, 64, 1), 9000, 2.0);

    auto ratios = benchmark_kernels(64, 20);
    auto tuned = autotune(200, 4, ratios);
    DomainPlan plan = tuned.ddrgf_valid ? tuned.plan : DomainPlan{{4, 4}, 4, 1};

    const double t_rgf1 = time_best_of(2, [&] { rgf_tridiag(m); });
    plan.n_threads = 1;
    const double t_dd1 = time_best_of(2, [&] { ddrgf(m, plan); });
    plan.n_threads = 4;
    const double t_dd4 = time_best_of(2, [&] { ddrgf(m, plan); });
    const double speedup = t_dd1 / t_dd4;

    const bool extra_work_ok = t_dd1 >= t_rgf1;
    const bool speedup_ok = speedup >= 1.8;
    std::string detail = "ddrgf 1T " + std::to_string(t_dd1) + "s, 4T " + std::to_string(t_dd4) +
                         "s (speedup " + std::to_string(speedup) + "), rgf 1T " +
                         std::to_string(t_rgf1) + "s";
    if (cores < 4) {
        report(9, true,
               "flagged: only " + std::to_string(cores) + " hardware threads, speedup not " +
                   "enforceable here; " + detail);
    } else {
        report(9, extra_work_ok && speedup_ok, detail);
    }
}

// 10. Structural propositions: band preservation during elimination and
//     block tridiagonal reduced systems.
void criterion_10() {
    int violations = 0;
    // 50 instrumented elimination sweeps
    for (int i = 0; i < 50; ++i) {
        const int w = 1 + i % 3;
        const int l = w + 2 + i % 10;
        auto m = random_spd_like<cd>(make_layout(l, 2, w), uint64_t(10000 + i), 2.0);
        StructuralTrace trace;
        rgf_ndiag(m, &trace);
        if (trace.max_update_offset > w) ++violations;
    }
    // 50 assembled reduced systems checked against the dense Schur complement
    for (int i = 0; i < 50; ++i) {
        const int s2 = 1 + i % 4;
        const int l = (1 + s2) * (2 + i % 3) + i % 2;
        const int bs = 2;
        auto m = random_spd_like<cd>(make_layout(l, bs, 1), uint64_t(11000 + i), 2.0);
        auto [perm, desc] = interleave_permutation(m.layout(), 1, s2);
        auto parts = permute_matrix(m, perm, desc);
        auto results = compute_subdomains(m, desc);
        auto schur = assemble_schur(parts, results);

        // dense reference Schur complement on the permuted matrix
        KernelCounters c;
        auto d = to_dense(m);
        const int n1 = parts.n1, k1 = n1 * bs, k2 = (l - n1) * bs;
        DenseMatrix<cd> a11(k1, k1), a12(k1, k2), a21(k2, k1), a22(k2, k2);
        auto src = [&](int p, int q) { return d(perm.inverse(p / bs) * bs + p % bs,
                                                perm.inverse(q / bs) * bs + q % bs); };
        for (int q = 0; q < k1; ++q)
            for (int p = 0; p < k1; ++p) a11(p, q) = src(p, q);
        for (int q = 0; q < k2; ++q)
            for (int p = 0; p < k1; ++p) a12(p, q) = src(p, k1 + q);
        for (int q = 0; q < k1; ++q)
            for (int p = 0; p < k2; ++p) a21(p, q) = src(k1 + p, q);
        for (int q = 0; q < k2; ++q)
            for (int p = 0; p < k2; ++p) a22(p, q) = src(k1 + p, k1 + q);
        auto f = lu_factor(a22, c);
        auto ref = gemm(cd{-1}, a12, solve_left(f, a21, c), cd{1}, a11, c);

        for (int j1 = 0; j1 < n1; ++j1)
            for (int j2 = 0; j2 < n1; ++j2) {
                DenseMatrix<cd> blk(bs, bs);
                for (int q = 0; q < bs; ++q)
                    for (int p = 0; p < bs; ++p) blk(p, q) = ref(j1 * bs + p, j2 * bs + q);
                if (schur.in_band(j1, j2 - j1)) {
                    if (rel_frobenius_error(schur.block(j1, j2 - j1), blk) > 1e-10) ++violations;
                } else if (blk.frobenius_norm() > 1e-10) {
                    ++violations;  // fill escaped the block tridiagonal pattern
                }
            }
    }
    report(10, violations == 0,
           "structural propositions over 100 runs, " + std::to_string(violations) + " violations");
}

// 11. Roofline arithmetic at the published operating point.
void criterion_11() {
    auto p = roofline(1024, 86.4, 21.32, 1.0);
    const double ridge = 86.4 / 21.32;
    const bool ok = std::abs(p.intensity - 127.75) <= 1e-9 &&
                    std::abs(p.attainable_gflops - 86.4) <= 1e-9 &&
                    std::abs(ridge - 4.05) <= 0.01;
    report(11, ok,
           "roofline(1024): intensity " + std::to_string(p.intensity) + ", attainable " +
               std::to_string(p.attainable_gflops) + ", ridge " + std::to_string(ridge));
}

// 12. Kernel ratio sanity at large N. Report-only outside the bands.
void criterion_12() {
    auto r = benchmark_kernels(1024, 2);
    const bool lu_in = r.r_lu >= 0.30 && r.r_lu <= 0.70;
    const bool getrs_in = r.r_getrs >= 0.85 && r.r_getrs <= 1.60;
    std::string detail = "N=1024: r_lu " + std::to_string(r.r_lu) + ", r_getrs " +
                         std::to_string(r.r_getrs);
    if (!lu_in || !getrs_in) detail += " -- WARNING: outside reference bands, report-only";
    report(12, true, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
