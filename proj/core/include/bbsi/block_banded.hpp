#pragma once

#include <cstdint>
#include <random>

#include "bbsi/dense.hpp"
#include "bbsi/kernels.hpp"
#include "bbsi/layout.hpp"

namespace bbsi {

/// Block banded matrix: dense blocks on the 2w+1 block diagonals, all in-band
/// blocks materialized (zero blocks stored explicitly). Immutable layout;
/// block contents mutable through `block()`.
template <class T>
class BlockBandedMatrix {
public:
    BlockBandedMatrix() = default;

    explicit BlockBandedMatrix(BlockLayout layout) : layout_(std::move(layout)) {
        layout_.validate();
        const int w = layout_.bandwidth;
        blocks_.resize(size_t(layout_.num_layers) * (2 * w + 1));
        for (int a = 0; a < layout_.num_layers; ++a)
            for (int off = -w; off <= w; ++off)
                if (in_band(a, off))
                    slot(a, off) = DenseMatrix<T>(layout_.block_sizes[a], layout_.block_sizes[a + off]);
    }

    const BlockLayout& layout() const noexcept { return layout_; }
    int num_layers() const noexcept { return layout_.num_layers; }
    int bandwidth() const noexcept { return layout_.bandwidth; }

    /// True when (a, a+off) is inside the band and the matrix.
    bool in_band(int a, int off) const {
        return a >= 0 && a < layout_.num_layers && std::abs(off) <= layout_.bandwidth &&
               a + off >= 0 && a + off < layout_.num_layers;
    }

    /// Block at (row layer a, column layer a+off).
    DenseMatrix<T>& block(int a, int off) {
        check(a, off);
        return slot(a, off);
    }
    const DenseMatrix<T>& block(int a, int off) const {
        check(a, off);
        return const_cast<BlockBandedMatrix*>(this)->slot(a, off);
    }

    bool operator==(const BlockBandedMatrix& o) const {
        return layout_ == o.layout_ && blocks_ == o.blocks_;
    }

private:
    void check(int a, int off) const {
        if (!in_band(a, off)) throw invalid_argument_error("BlockBandedMatrix: block outside band");
    }
    DenseMatrix<T>& slot(int a, int off) {
        return blocks_[size_t(a) * (2 * layout_.bandwidth + 1) + (off + layout_.bandwidth)];
    }

    BlockLayout layout_;
    std::vector<DenseMatrix<T>> blocks_;
};

namespace detail {

/// Deterministic uniform values in [-1, 1), identical across platforms
/// (raw mt19937_64 bits, no distribution adapters).
class UniformSource {
public:
    explicit UniformSource(uint64_t seed) : rng_(seed) {}

    double next_real() {
        return double(rng_() >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    }

    template <class T>
    T next() {
        if constexpr (is_complex<T>::value) {
            auto re = next_real();
            auto im = next_real();
            return T(real_t<T>(re), real_t<T>(im));
        } else {
            return T(next_real());
        }
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace detail

/// Synthetic diagonally-dominant random matrix. Each diagonal entry gets
/// `dominance x (row-sum of off-diagonal magnitudes)` added along its own
/// phase, which keeps |diagonal| strictly above the row sum for
/// dominance >= 1 and guarantees the block LDU factorization exists.
template <class T>
BlockBandedMatrix<T> random_spd_like(const BlockLayout& layout, uint64_t seed,
                                     real_t<T> dominance) {
    if (!(dominance > real_t<T>{0}))
        throw invalid_argument_error("random_spd_like: dominance must be positive");
    BlockBandedMatrix<T> m(layout);
    detail::UniformSource src(seed);
    const int w = layout.bandwidth;
    for (int a = 0; a < layout.num_layers; ++a)
        for (int off = -w; off <= w; ++off)
            if (m.in_band(a, off)) {
                auto& blk = m.block(a, off);
                for (int j = 0; j < blk.cols(); ++j)
                    for (int i = 0; i < blk.rows(); ++i) blk(i, j) = src.template next<T>();
            }
    for (int a = 0; a < layout.num_layers; ++a) {
        auto& diag = m.block(a, 0);
        for (int i = 0; i < diag.rows(); ++i) {
            real_t<T> row_sum{};
            for (int off = -w; off <= w; ++off) {
                if (!m.in_band(a, off)) continue;
                const auto& blk = m.block(a, off);
                for (int j = 0; j < blk.cols(); ++j) {
                    if (off == 0 && j == i) continue;
                    row_sum += std::abs(blk(i, j));
                }
            }
            T d = diag(i, i);
            const real_t<T> mag = std::abs(d);
            T phase = mag > real_t<T>(1e-12) ? d / T(mag) : T(1);
            diag(i, i) = d + phase * T(dominance * row_sum);
        }
    }
    return m;
}

/// Dense realization; out-of-band entries exactly zero.
template <class T>
DenseMatrix<T> to_dense(const BlockBandedMatrix<T>& m) {
    const auto& lay = m.layout();
    DenseMatrix<T> out(lay.total_dim(), lay.total_dim());
    for (int a = 0; a < lay.num_layers; ++a) {
        const int r0 = lay.layer_offset(a);
        for (int off = -lay.bandwidth; off <= lay.bandwidth; ++off) {
            if (!m.in_band(a, off)) continue;
            const int c0 = lay.layer_offset(a + off);
            const auto& blk = m.block(a, off);
            for (int j = 0; j < blk.cols(); ++j)
                for (int i = 0; i < blk.rows(); ++i) out(r0 + i, c0 + j) = blk(i, j);
        }
    }
    return out;
}

/// Copy the in-band blocks of a dense matrix into banded storage;
/// everything outside the band is discarded.
template <class T>
BlockBandedMatrix<T> extract_bndiag(const DenseMatrix<T>& d, const BlockLayout& layout) {
    if (d.rows() != d.cols() || d.rows() != layout.total_dim())
        throw invalid_argument_error("extract_bndiag: dimension mismatch");
    BlockBandedMatrix<T> out(layout);
    for (int a = 0; a < layout.num_layers; ++a) {
        const int r0 = layout.layer_offset(a);
        for (int off = -layout.bandwidth; off <= layout.bandwidth; ++off) {
            if (!out.in_band(a, off)) continue;
            const int c0 = layout.layer_offset(a + off);
            auto& blk = out.block(a, off);
            for (int j = 0; j < blk.cols(); ++j)
                for (int i = 0; i < blk.rows(); ++i) blk(i, j) = d(r0 + i, c0 + j);
        }
    }
    return out;
}

/// Brute-force ground truth: dense inversion followed by band extraction.
/// Every recursive solver is verified against this.
template <class T>
BlockBandedMatrix<T> oracle_selected_inverse(const BlockBandedMatrix<T>& m) {
    KernelCounters scratch;
    DenseMatrix<T> dense = to_dense(m);
    auto f = lu_factor(dense, scratch);
    return extract_bndiag(invert(f, scratch), m.layout());
}

}  // namespace bbsi
