#pragma once

#include <utility>

#include "bbsi/block_banded.hpp"
#include "bbsi/kernels.hpp"

namespace bbsi {

/// Structural instrumentation of the elimination sweep. `max_update_offset`
/// is the largest |row layer - column layer| distance of any block written
/// by a Schur update; band preservation means it never exceeds the input
/// bandwidth.
struct StructuralTrace {
    int max_update_offset = 0;
};

namespace detail {

template <class T>
LUFactors<T> lu_pivot(const DenseMatrix<T>& a, int layer, KernelCounters& counters) {
    try {
        return lu_factor(a, counters);
    } catch (const singular_matrix_error& e) {
        throw singular_matrix_error(
            std::string("singular Schur pivot at layer ") + std::to_string(layer) + ": " + e.what(),
            layer);
    }
}

}  // namespace detail

/// Selected inversion of a block tridiagonal matrix: returns the block
/// tridiagonal part of the inverse. Upward sweep builds the Schur pivots
/// from the bottom; downward sweep absorbs the triangular multipliers.
/// Exactly l LU, 3l-2 GETRS and 4(l-1) GEMM calls.
template <class T>
std::pair<BlockBandedMatrix<T>, KernelCounters> rgf_tridiag(const BlockBandedMatrix<T>& m,
                                                            StructuralTrace* trace = nullptr) {
    const int l = m.num_layers();
    if (m.bandwidth() != 1 && l != 1)
        throw invalid_argument_error("rgf_tridiag: requires bandwidth 1");
    KernelCounters c;
    BlockBandedMatrix<T> g(m.layout());
    if (trace) trace->max_update_offset = 0;

    if (l == 1) {
        auto f = detail::lu_pivot(m.block(0, 0), 0, c);
        g.block(0, 0) = invert(f, c);
        return {std::move(g), c};
    }

    std::vector<LUFactors<T>> f(l);
    std::vector<DenseMatrix<T>> umult(l - 1);  // block (i, i+1) of the multiplier
    std::vector<DenseMatrix<T>> lmult(l - 1);  // block (i+1, i)

    // upward pass: pivot(i) = M[i,i] - M[i,i+1] pivot(i+1)^{-1} M[i+1,i]
    f[l - 1] = detail::lu_pivot(m.block(l - 1, 0), l - 1, c);
    for (int i = l - 2; i >= 0; --i) {
        umult[i] = solve_right(m.block(i, +1), f[i + 1], c);
        lmult[i] = solve_left(f[i + 1], m.block(i + 1, -1), c);
        DenseMatrix<T> pivot = m.block(i, 0);
        gemm_into(T{-1}, m.block(i, +1), lmult[i], T{1}, pivot, c);
        f[i] = detail::lu_pivot(pivot, i, c);
    }

    // downward pass
    g.block(0, 0) = invert(f[0], c);
    for (int i = 1; i < l; ++i) {
        gemm_into(T{-1}, g.block(i - 1, 0), umult[i - 1], T{0}, g.block(i - 1, +1), c);
        gemm_into(T{-1}, lmult[i - 1], g.block(i - 1, 0), T{0}, g.block(i, -1), c);
        g.block(i, 0) = invert(f[i], c);
        gemm_into(T{-1}, lmult[i - 1], g.block(i - 1, +1), T{1}, g.block(i, 0), c);
    }
    return {std::move(g), c};
}

/// Selected inversion of a block n-diagonal matrix (n = 2w+1): returns the
/// block n-diagonal part of the inverse. Eliminating layer j couples it to
/// the k = min(w, j) layers above; every Schur update stays inside the band.
/// Totals: l LU, l(2w+1)-w^2-w GETRS, (3w^2+w)l-2w^3-2w^2 GEMM.
template <class T>
std::pair<BlockBandedMatrix<T>, KernelCounters> rgf_ndiag(const BlockBandedMatrix<T>& m,
                                                          StructuralTrace* trace = nullptr) {
    const int l = m.num_layers();
    const int w = m.bandwidth();
    if (w < 1 && l != 1) throw invalid_argument_error("rgf_ndiag: requires bandwidth >= 1");
    if (l == 1) return rgf_tridiag(m);

    KernelCounters c;
    if (trace) trace->max_update_offset = 0;
    BlockBandedMatrix<T> mp = m;  // working copy accumulating Schur updates
    std::vector<LUFactors<T>> f(l);
    // lm[j][t-1] = pivot(j)^{-1} M'[j, j-t]; um[j][t-1] = M'[j-t, j] pivot(j)^{-1}
    std::vector<std::vector<DenseMatrix<T>>> lm(l), um(l);

    // upward pass, eliminating layers from the bottom
    for (int j = l - 1; j >= 1; --j) {
        const int k = std::min(w, j);
        f[j] = detail::lu_pivot(mp.block(j, 0), j, c);
        lm[j].resize(k);
        um[j].resize(k);
        for (int t = 1; t <= k; ++t) {
            lm[j][t - 1] = solve_left(f[j], mp.block(j, -t), c);
            um[j][t - 1] = solve_right(mp.block(j - t, +t), f[j], c);
        }
        for (int s = 1; s <= k; ++s)
            for (int t = 1; t <= k; ++t) {
                gemm_into(T{-1}, mp.block(j - s, +s), lm[j][t - 1], T{1}, mp.block(j - s, s - t), c);
                if (trace)
                    trace->max_update_offset = std::max(trace->max_update_offset, std::abs(s - t));
            }
    }
    f[0] = detail::lu_pivot(mp.block(0, 0), 0, c);

    // downward pass
    BlockBandedMatrix<T> g(m.layout());
    g.block(0, 0) = invert(f[0], c);
    for (int j = 1; j < l; ++j) {
        const int k = std::min(w, j);
        // row blocks of layer j, right-to-left
        for (int t = 1; t <= k; ++t)
            for (int s = 1; s <= k; ++s)
                gemm_into(T{-1}, lm[j][s - 1], g.block(j - s, s - t), s == 1 ? T{0} : T{1},
                          g.block(j, -t), c);
        // column blocks of layer j
        for (int t = 1; t <= k; ++t)
            for (int s = 1; s <= k; ++s)
                gemm_into(T{-1}, g.block(j - t, t - s), um[j][s - 1], s == 1 ? T{0} : T{1},
                          g.block(j - t, +t), c);
        // diagonal accumulation
        g.block(j, 0) = invert(f[j], c);
        for (int s = 1; s <= k; ++s)
            gemm_into(T{-1}, lm[j][s - 1], g.block(j - s, +s), T{1}, g.block(j, 0), c);
    }
    return {std::move(g), c};
}

/// Baseline that fuses every w consecutive layers into one super-block of
/// size w*b_s (last one possibly smaller), solves the resulting block
/// tridiagonal system, and restricts back to the original band. The fused
/// tridiagonal pattern strictly contains the original n-diagonal one.
template <class T>
std::pair<BlockBandedMatrix<T>, KernelCounters> rgf_fused(const BlockBandedMatrix<T>& m) {
    const int l = m.num_layers();
    const int w = m.bandwidth();
    if (w < 1 && l != 1) throw invalid_argument_error("rgf_fused: requires bandwidth >= 1");
    if (!m.layout().uniform()) throw invalid_argument_error("rgf_fused: requires uniform block sizes");
    if (w <= 1) return rgf_tridiag(m);

    const int lp = (l + w - 1) / w;
    std::vector<int> fused_sizes(lp);
    for (int s = 0; s < lp; ++s) {
        const int first = s * w, last = std::min(l, first + w);
        int dim = 0;
        for (int a = first; a < last; ++a) dim += m.layout().block_sizes[a];
        fused_sizes[s] = dim;
    }
    BlockLayout fused_layout(lp, fused_sizes, lp == 1 ? 0 : 1);
    BlockBandedMatrix<T> fused(fused_layout);

    auto local_offset = [&](int a) {
        int off = 0;
        for (int b = (a / w) * w; b < a; ++b) off += m.layout().block_sizes[b];
        return off;
    };
    for (int a = 0; a < l; ++a)
        for (int off = -w; off <= w; ++off) {
            if (!m.in_band(a, off)) continue;
            const int b = a + off;
            auto& dst = fused.block(a / w, b / w - a / w);
            const auto& src = m.block(a, off);
            const int r0 = local_offset(a), c0 = local_offset(b);
            for (int j = 0; j < src.cols(); ++j)
                for (int i = 0; i < src.rows(); ++i) dst(r0 + i, c0 + j) = src(i, j);
        }

    auto [gf, c] = rgf_tridiag(fused);

    BlockBandedMatrix<T> g(m.layout());
    for (int a = 0; a < l; ++a)
        for (int off = -w; off <= w; ++off) {
            if (!m.in_band(a, off)) continue;
            const int b = a + off;
            const auto& src = gf.block(a / w, b / w - a / w);
            auto& dst = g.block(a, off);
            const int r0 = local_offset(a), c0 = local_offset(b);
            for (int j = 0; j < dst.cols(); ++j)
                for (int i = 0; i < dst.rows(); ++i) dst(i, j) = src(r0 + i, c0 + j);
        }
    return {std::move(g), c};
}

/// Block tridiagonal selected inverse plus the full first/last block rows
/// and columns of the inverse. Overlaps with the tridiagonal core are exact
/// copies of the same values.
template <class T>
struct ExtendedInverse {
    BlockBandedMatrix<T> core;
    std::vector<DenseMatrix<T>> first_row;  // entry b: (M^{-1})[0, b]
    std::vector<DenseMatrix<T>> last_row;   // entry b: (M^{-1})[l-1, b]
    std::vector<DenseMatrix<T>> first_col;  // entry a: (M^{-1})[a, 0]
    std::vector<DenseMatrix<T>> last_col;   // entry a: (M^{-1})[a, l-1]
};

/// rgf_tridiag with the halo outputs above. The downward sweep carries the
/// full current block column and row forward, so the halo costs exactly
/// (l-1)(l-2) GEMMs beyond plain rgf_tridiag.
template <class T>
std::pair<ExtendedInverse<T>, KernelCounters> rgf_extended(const BlockBandedMatrix<T>& m) {
    const int l = m.num_layers();
    if (m.bandwidth() != 1 && l != 1)
        throw invalid_argument_error("rgf_extended: requires bandwidth 1");
    KernelCounters c;
    ExtendedInverse<T> ext;
    ext.core = BlockBandedMatrix<T>(m.layout());
    auto& g = ext.core;

    if (l == 1) {
        auto f = detail::lu_pivot(m.block(0, 0), 0, c);
        g.block(0, 0) = invert(f, c);
        ext.first_row = ext.last_row = ext.first_col = ext.last_col = {g.block(0, 0)};
        return {std::move(ext), c};
    }

    std::vector<LUFactors<T>> f(l);
    std::vector<DenseMatrix<T>> umult(l - 1), lmult(l - 1);
    f[l - 1] = detail::lu_pivot(m.block(l - 1, 0), l - 1, c);
    for (int i = l - 2; i >= 0; --i) {
        umult[i] = solve_right(m.block(i, +1), f[i + 1], c);
        lmult[i] = solve_left(f[i + 1], m.block(i + 1, -1), c);
        DenseMatrix<T> pivot = m.block(i, 0);
        gemm_into(T{-1}, m.block(i, +1), lmult[i], T{1}, pivot, c);
        f[i] = detail::lu_pivot(pivot, i, c);
    }

    ext.first_row.resize(l);
    ext.first_col.resize(l);
    std::vector<DenseMatrix<T>> col(l), row(l);  // current full column / row

    g.block(0, 0) = invert(f[0], c);
    col[0] = row[0] = g.block(0, 0);
    ext.first_row[0] = ext.first_col[0] = g.block(0, 0);
    for (int j = 1; j < l; ++j) {
        gemm_into(T{-1}, g.block(j - 1, 0), umult[j - 1], T{0}, g.block(j - 1, +1), c);
        gemm_into(T{-1}, lmult[j - 1], g.block(j - 1, 0), T{0}, g.block(j, -1), c);
        g.block(j, 0) = invert(f[j], c);
        gemm_into(T{-1}, lmult[j - 1], g.block(j - 1, +1), T{1}, g.block(j, 0), c);

        // carry the full column j and row j; entries already in the band
        // are copied, the rest are one GEMM each
        std::vector<DenseMatrix<T>> ncol(l), nrow(l);
        for (int a = 0; a <= j - 2; ++a) {
            ncol[a] = DenseMatrix<T>(col[a].rows(), g.block(j, 0).cols());
            gemm_into(T{-1}, col[a], umult[j - 1], T{0}, ncol[a], c);
            nrow[a] = DenseMatrix<T>(g.block(j, 0).rows(), row[a].cols());
            gemm_into(T{-1}, lmult[j - 1], row[a], T{0}, nrow[a], c);
        }
        ncol[j - 1] = g.block(j - 1, +1);
        nrow[j - 1] = g.block(j, -1);
        ncol[j] = nrow[j] = g.block(j, 0);
        col = std::move(ncol);
        row = std::move(nrow);
        ext.first_row[j] = col[0];
        ext.first_col[j] = row[0];
    }
    ext.last_col.assign(col.begin(), col.begin() + l);
    ext.last_row.assign(row.begin(), row.begin() + l);
    return {std::move(ext), c};
}

}  // namespace bbsi
