#pragma once

#include <complex>

#include "bbsi/block_banded.hpp"

namespace testutil {

using cd = std::complex<double>;

/// Largest per-block relative Frobenius distance between two matrices with
/// identical layouts.
template <class T>
double max_block_error(const bbsi::BlockBandedMatrix<T>& a, const bbsi::BlockBandedMatrix<T>& b) {
    double e = 0.0;
    for (int i = 0; i < a.num_layers(); ++i)
        for (int off = -a.bandwidth(); off <= a.bandwidth(); ++off)
            if (a.in_band(i, off))
                e = std::max(e, double(bbsi::rel_frobenius_error(a.block(i, off), b.block(i, off))));
    return e;
}

/// Reference GEMM: naive triple loop, no blocking, no library calls.
template <class T>
bbsi::DenseMatrix<T> naive_gemm(T alpha, const bbsi::DenseMatrix<T>& a,
                                const bbsi::DenseMatrix<T>& b, T beta,
                                const bbsi::DenseMatrix<T>& c) {
    bbsi::DenseMatrix<T> out(a.rows(), b.cols());
    for (int j = 0; j < b.cols(); ++j)
        for (int i = 0; i < a.rows(); ++i) {
            T acc{};
            for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = alpha * acc + beta * c(i, j);
        }
    return out;
}

/// Random dense matrix from the library's deterministic source.
template <class T>
bbsi::DenseMatrix<T> random_dense(int rows, int cols, uint64_t seed) {
    bbsi::detail::UniformSource src(seed);
    bbsi::DenseMatrix<T> m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = src.template next<T>();
    return m;
}

/// Random diagonally dominant dense matrix (safe to factor).
template <class T>
bbsi::DenseMatrix<T> random_dominant(int n, uint64_t seed) {
    auto m = random_dense<T>(n, n, seed);
    for (int i = 0; i < n; ++i) {
        bbsi::real_t<T> row = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) row += std::abs(m(i, j));
        m(i, i) += T(2) * T(row) + T(1);
    }
    return m;
}

/// Hermitian block banded matrix with a dominant real diagonal: random
/// upper in-band blocks mirrored by conjugate transposition.
inline bbsi::BlockBandedMatrix<cd> random_hermitian(const bbsi::BlockLayout& layout, uint64_t seed,
                                                    double dominance) {
    bbsi::BlockBandedMatrix<cd> h(layout);
    bbsi::detail::UniformSource src(seed);
    for (int a = 0; a < layout.num_layers; ++a)
        for (int off = 0; off <= layout.bandwidth; ++off) {
            if (!h.in_band(a, off)) continue;
            auto& blk = h.block(a, off);
            for (int j = 0; j < blk.cols(); ++j)
                for (int i = 0; i < blk.rows(); ++i) blk(i, j) = src.next<cd>();
            if (off == 0) {
                auto sym = blk.conj_transposed();
                sym += blk;
                for (int j = 0; j < blk.cols(); ++j)
                    for (int i = 0; i < blk.rows(); ++i) blk(i, j) = 0.5 * sym(i, j);
            } else {
                h.block(a + off, -off) = blk.conj_transposed();
            }
        }
    for (int a = 0; a < layout.num_layers; ++a) {
        auto& diag = h.block(a, 0);
        for (int i = 0; i < diag.rows(); ++i) {
            double row = 0;
            for (int off = -layout.bandwidth; off <= layout.bandwidth; ++off) {
                if (!h.in_band(a, off)) continue;
                const auto& blk = h.block(a, off);
                for (int j = 0; j < blk.cols(); ++j)
                    if (off != 0 || j != i) row += std::abs(blk(i, j));
            }
            diag(i, i) = diag(i, i).real() + dominance * row + 1.0;
        }
    }
    return h;
}

inline double hermitian_defect(const bbsi::BlockBandedMatrix<cd>& m) {
    double e = 0.0;
    for (int a = 0; a < m.num_layers(); ++a)
        for (int off = -m.bandwidth(); off <= m.bandwidth(); ++off)
            if (m.in_band(a, off))
                e = std::max(
                    e, double(bbsi::rel_frobenius_error(m.block(a, off),
                                                        m.block(a + off, -off).conj_transposed())));
    return e;
}

}  // namespace testutil
