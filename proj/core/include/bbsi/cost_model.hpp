#pragma once

#include <map>
#include <string>

#include "bbsi/ddrgf.hpp"
#include "bbsi/kernels.hpp"

namespace bbsi {

/// Measured kernel timings at one block size: mean GEMM time plus the
/// LU-to-GEMM and solve-to-GEMM time ratios that weight the cost models.
struct KernelRatios {
    int block_size = 0;
    double t_gemm = 0.0;  // seconds
    double r_lu = 0.0;
    double r_getrs = 0.0;
    long long sample_count = 0;
};

/// Cost in units of t_GEMM(b_s), with a named per-term breakdown that sums
/// exactly to the total.
struct CostEstimate {
    double gemm_equivalents = 0.0;
    std::map<std::string, double> breakdown;
    double predicted_seconds = 0.0;
};

namespace detail {

inline CostEstimate finish_estimate(std::map<std::string, double> breakdown, double t_gemm) {
    CostEstimate est;
    est.breakdown = std::move(breakdown);
    for (const auto& [name, v] : est.breakdown) est.gemm_equivalents += v;
    est.predicted_seconds = est.gemm_equivalents * t_gemm;
    return est;
}

}  // namespace detail

/// GEMMs the extended (halo-carrying) solver needs beyond plain tridiagonal
/// selected inversion: (l-1)(l-2), derived by counter instrumentation and
/// frozen here. Reproduces the small cases 0, 0, 2, 6 for l = 1..4.
inline long long rgf_extra_gemms(long long l) { return l <= 2 ? 0 : (l - 1) * (l - 2); }

/// Exact kernel-call counts of rgf_tridiag.
inline KernelCounters predict_rgf_counters(long long l) {
    return {4 * (l - 1), l, 3 * l - 2};
}

/// Exact kernel-call counts of rgf_ndiag.
inline KernelCounters predict_nrgf_counters(long long l, long long w) {
    return {(3 * w * w + w) * l - 2 * w * w * w - 2 * w * w, l, l * (2 * w + 1) - w * w - w};
}

/// Exact kernel-call counts of rgf_extended.
inline KernelCounters predict_extended_counters(long long l) {
    KernelCounters c = predict_rgf_counters(l);
    c.n_gemm += rgf_extra_gemms(l);
    return c;
}

/// Cost of sequential block tridiagonal selected inversion:
/// 4(l-1) + l r_LU + (3l-2) r_GETRS.
inline CostEstimate cost_rgf(long long l, const KernelRatios& ratios) {
    if (l < 1) throw invalid_argument_error("cost_rgf: l must be >= 1");
    return detail::finish_estimate({{"gemm", double(4 * (l - 1))},
                                    {"lu", double(l) * ratios.r_lu},
                                    {"getrs", double(3 * l - 2) * ratios.r_getrs}},
                                   ratios.t_gemm);
}

/// Cost of the generalized block n-diagonal solver. Reduces exactly to
/// cost_rgf at w = 1.
inline CostEstimate cost_nrgf(long long l, long long w, const KernelRatios& ratios) {
    if (w < 1 || l <= w) throw invalid_argument_error("cost_nrgf: requires l > w >= 1");
    return detail::finish_estimate(
        {{"gemm", double((3 * w * w + w) * l - 2 * w * w * w - 2 * w * w)},
         {"lu", double(l) * ratios.r_lu},
         {"getrs", double(l * (2 * w + 1) - w * w - w) * ratios.r_getrs}},
        ratios.t_gemm);
}

/// Cost of the fused-super-block baseline: tridiagonal cost at l' = ceil(l/w)
/// layers, with ratios and t_GEMM measured at the super-block size w*b_s.
inline CostEstimate cost_fused(long long l, long long w, const KernelRatios& ratios_at_super) {
    if (w < 1 || l <= w) throw invalid_argument_error("cost_fused: requires l > w >= 1");
    return cost_rgf((l + w - 1) / w, ratios_at_super);
}

/// Parallel cost of the domain-decomposition solver. Per-level terms carry
/// the ideal n_tasks/n_threads load-balancing factor; the terminal
/// sequential solve is divided by min(terminal_threads, blas_cap) only.
inline CostEstimate cost_ddrgf(long long l, const DomainPlan& plan, const KernelRatios& ratios,
                               int blas_cap = 12) {
    plan.validate();
    std::map<std::string, double> terms;
    long long lk = l;
    for (int k = 0; k < plan.n_levels(); ++k) {
        const long long s2 = plan.s2_levels[k];
        if (lk < 1 + s2)
            throw invalid_argument_error("cost_ddrgf: plan exhausts layers at level " +
                                         std::to_string(k));
        const long long n_tasks = (lk + s2) / (1 + s2);  // ceil(lk / (1+s2))
        const double factor = double(n_tasks) / double(plan.n_threads);
        const std::string p = "L" + std::to_string(k) + ".";
        const double r_rgf_s2 =
            double(4 * (s2 - 1)) + double(s2) * ratios.r_lu + double(3 * s2 - 2) * ratios.r_getrs;
        terms[p + "interior_inv"] = factor * (r_rgf_s2 + double(rgf_extra_gemms(s2)));
        terms[p + "coupling_rows"] = factor * double(2 * s2);
        terms[p + "coupling_cols"] = factor * double(2 * s2);
        terms[p + "schur_assembly"] = factor * 4.0;
        terms[p + "corr_offdiag_rows"] = factor * double(4 * s2);
        terms[p + "corr_offdiag_cols"] = factor * 4.0;
        terms[p + "corr_diag"] = factor * double(6 * s2 - 4);
        lk = n_tasks;
    }
    const int tt = std::min(plan.terminal_threads, blas_cap);
    terms["terminal"] = cost_rgf(lk, ratios).gemm_equivalents / double(tt);
    return detail::finish_estimate(std::move(terms), ratios.t_gemm);
}

/// True when every recursion level of the plan divides its layer count
/// evenly, i.e. no shortened or empty trailing interior group anywhere. The
/// counter predictor below is exact precisely in this case.
inline bool ddrgf_divides_evenly(long long l, const DomainPlan& plan) {
    long long lk = l;
    for (int s2 : plan.s2_levels) {
        if (lk < 1 + s2 || lk % (1 + s2) != 0) return false;
        lk /= (1 + s2);
    }
    return true;
}

/// Exact kernel-call totals of ddrgf (task totals, not thread-divided) for
/// evenly dividing plans.
inline KernelCounters predict_ddrgf_counters(long long l, const DomainPlan& plan) {
    KernelCounters c;
    long long lk = l;
    for (int k = 0; k < plan.n_levels(); ++k) {
        const long long s2 = plan.s2_levels[k];
        if (lk < 1 + s2)
            throw invalid_argument_error("predict_ddrgf_counters: plan exhausts layers");
        const long long n_tasks = (lk + s2) / (1 + s2);
        c.n_gemm += n_tasks * (4 * (s2 - 1) + rgf_extra_gemms(s2)  // sub-domain inversion
                               + 2 * s2 + 2 * s2 + 4               // couplings + reduced system
                               + 4 * s2 + 4 + 6 * s2 - 4);         // corrections
        c.n_lu += n_tasks * s2;
        c.n_getrs += n_tasks * (3 * s2 - 2);
        lk = n_tasks;
    }
    c += predict_rgf_counters(lk);
    return c;
}

/// Tuner verdict: the cheaper of threaded sequential RGF and the best
/// domain-decomposition plan found in the search grid.
struct TuneResult {
    bool use_rgf = true;
    DomainPlan plan;          // meaningful when !use_rgf or ddrgf_valid
    bool ddrgf_valid = false; // a feasible DDRGF plan was found
    CostEstimate rgf_cost;    // sequential cost / min(n_threads, blas_cap)
    CostEstimate ddrgf_cost;  // cost of `plan`
};

/// Exhaustive search over s2 sequences (length 1..max_levels, entries
/// 1..s2_max) and terminal thread counts. Deterministic tie-breaks: fewer
/// levels, then lexicographically smaller sequence, then fewer terminal
/// threads; sequential RGF wins exact ties. max_levels = 0 forces RGF.
inline TuneResult autotune(long long l, int n_threads, const KernelRatios& ratios,
                           int max_levels = 5, int s2_max = 4, int blas_cap = 12) {
    if (l < 1 || n_threads < 1) throw invalid_argument_error("autotune: bad arguments");
    TuneResult out;
    {
        CostEstimate seq = cost_rgf(l, ratios);
        const double scale = 1.0 / double(std::min(n_threads, blas_cap));
        for (auto& [name, v] : seq.breakdown) v *= scale;
        out.rgf_cost = detail::finish_estimate(std::move(seq.breakdown), ratios.t_gemm);
    }

    std::vector<int> seq;
    auto consider = [&](const DomainPlan& plan) {
        CostEstimate est;
        try {
            est = cost_ddrgf(l, plan, ratios, blas_cap);
        } catch (const invalid_argument_error&) {
            return;
        }
        if (!out.ddrgf_valid || est.gemm_equivalents < out.ddrgf_cost.gemm_equivalents ||
            (est.gemm_equivalents == out.ddrgf_cost.gemm_equivalents &&
             (plan.s2_levels.size() < out.plan.s2_levels.size() ||
              (plan.s2_levels.size() == out.plan.s2_levels.size() &&
               (plan.s2_levels < out.plan.s2_levels ||
                (plan.s2_levels == out.plan.s2_levels &&
                 plan.terminal_threads < out.plan.terminal_threads)))))) {
            out.ddrgf_valid = true;
            out.plan = plan;
            out.ddrgf_cost = std::move(est);
        }
    };
    auto search = [&](auto&& self, int depth) -> void {
        if (depth >= 1) {
            DomainPlan plan;
            plan.s2_levels = seq;
            plan.n_threads = n_threads;
            for (int tt = 1; tt <= std::min(n_threads, blas_cap); ++tt) {
                plan.terminal_threads = tt;
                consider(plan);
            }
        }
        if (depth == max_levels) return;
        for (int s2 = 1; s2 <= s2_max; ++s2) {
            seq.push_back(s2);
            self(self, depth + 1);
            seq.pop_back();
        }
    };
    search(search, 0);

    out.use_rgf =
        !out.ddrgf_valid || out.rgf_cost.gemm_equivalents <= out.ddrgf_cost.gemm_equivalents;
    return out;
}

/// Dispatcher between sequential RGF (with kernel threading modeled as ideal
/// up to blas_cap) and the autotuned domain-decomposition plan.
inline TuneResult orchestrate(long long l, int n_threads, const KernelRatios& ratios,
                              int max_levels = 5, int s2_max = 4, int blas_cap = 12) {
    return autotune(l, n_threads, ratios, max_levels, s2_max, blas_cap);
}

}  // namespace bbsi
