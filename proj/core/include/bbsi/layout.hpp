#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "bbsi/errors.hpp"

namespace bbsi {

/// Geometry of a block n-diagonal matrix: `num_layers` principal layers,
/// per-layer block sizes, and the block bandwidth w (so n = 2w+1).
struct BlockLayout {
    int num_layers = 0;
    std::vector<int> block_sizes;
    int bandwidth = 0;

    BlockLayout() = default;

    BlockLayout(int layers, std::vector<int> sizes, int w)
        : num_layers(layers), block_sizes(std::move(sizes)), bandwidth(w) {
        validate();
    }

    void validate() const {
        if (num_layers < 1) throw invalid_argument_error("BlockLayout: num_layers must be >= 1");
        if (int(block_sizes.size()) != num_layers)
            throw invalid_argument_error("BlockLayout: block_sizes length mismatch");
        for (int b : block_sizes)
            if (b < 1) throw invalid_argument_error("BlockLayout: block sizes must be >= 1");
        if (bandwidth < 0) throw invalid_argument_error("BlockLayout: negative bandwidth");
        if (num_layers > 1 && bandwidth > num_layers - 1)
            throw invalid_argument_error("BlockLayout: bandwidth exceeds num_layers - 1");
        if (num_layers == 1 && bandwidth != 0)
            throw invalid_argument_error("BlockLayout: single layer requires bandwidth 0");
    }

    int total_dim() const {
        return std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
    }

    bool uniform() const {
        for (int b : block_sizes)
            if (b != block_sizes.front()) return false;
        return true;
    }

    /// Scalar row/column offset of the first entry of layer `a` (0-based).
    int layer_offset(int a) const {
        return std::accumulate(block_sizes.begin(), block_sizes.begin() + a, 0);
    }

    bool operator==(const BlockLayout&) const = default;
};

/// Uniform layout with all block sizes equal.
inline BlockLayout make_layout(int num_layers, int block_size, int bandwidth) {
    if (num_layers < 1 || block_size < 1)
        throw invalid_argument_error("make_layout: dimensions must be >= 1");
    return BlockLayout(num_layers, std::vector<int>(num_layers, block_size), bandwidth);
}

/// Bijection on layer indices with a precomputed inverse.
/// `to_permuted[a]` is the new position of original layer `a`;
/// `to_original[p]` lists the permuted order.
struct Permutation {
    std::vector<int> to_permuted;
    std::vector<int> to_original;

    Permutation() = default;

    /// Build from the permuted order (position -> original index).
    static Permutation from_order(std::vector<int> order) {
        Permutation p;
        p.to_original = std::move(order);
        p.to_permuted.assign(p.to_original.size(), -1);
        for (size_t pos = 0; pos < p.to_original.size(); ++pos) {
            int orig = p.to_original[pos];
            if (orig < 0 || orig >= int(p.to_original.size()) || p.to_permuted[orig] != -1)
                throw invalid_argument_error("Permutation: order is not a bijection");
            p.to_permuted[orig] = int(pos);
        }
        return p;
    }

    static Permutation identity(int n) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        return from_order(std::move(order));
    }

    int size() const { return int(to_original.size()); }
    int forward(int original) const { return to_permuted.at(original); }
    int inverse(int permuted) const { return to_original.at(permuted); }
};

}  // namespace bbsi
