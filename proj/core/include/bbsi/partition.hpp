#pragma once

#include <map>
#include <utility>

#include "bbsi/block_banded.hpp"
#include "bbsi/layout.hpp"

namespace bbsi {

/// Alternating decomposition of a block tridiagonal layout: repeating groups
/// of s2 "interior" layers followed by s1 "separator" layers, starting with
/// an interior group and ending with a separator group. Groups are stored in
/// physical order; the trailing interior group may be shorter than s2 or
/// empty when (s1+s2) does not divide the layer count.
struct DomainDescriptor {
    struct Group {
        int first = 0;  // physical index of the first layer
        int count = 0;
    };

    int s1 = 1;
    int s2 = 1;
    std::vector<Group> interior_groups;
    std::vector<Group> separator_groups;

    int n_tasks() const { return int(interior_groups.size()); }

    int num_separator_layers() const {
        int n = 0;
        for (const auto& g : separator_groups) n += g.count;
        return n;
    }
};

/// Builds the alternating interior/separator split and the permutation that
/// lists all separator layers first (physical order), then all interior
/// layers (physical order).
inline std::pair<Permutation, DomainDescriptor> interleave_permutation(const BlockLayout& layout,
                                                                       int s1, int s2) {
    if (s1 < 1 || s2 < 1) throw invalid_argument_error("interleave_permutation: s1, s2 must be >= 1");
    if (layout.bandwidth != 1)
        throw invalid_argument_error("interleave_permutation: requires bandwidth 1");
    const int l = layout.num_layers;
    if (l < s1 + s2) throw invalid_argument_error("interleave_permutation: too few layers to split");

    DomainDescriptor desc;
    desc.s1 = s1;
    desc.s2 = s2;
    int pos = 0;
    while (pos < l) {
        const int remaining = l - pos;
        int d2, d1;
        if (remaining >= s1 + s2) {
            d2 = s2;
            d1 = s1;
        } else {
            // trailing remainder: shorten (possibly empty) the interior group
            // so the sequence still ends with a separator group
            d1 = std::min(s1, remaining);
            d2 = remaining - d1;
        }
        desc.interior_groups.push_back({pos, d2});
        desc.separator_groups.push_back({pos + d2, d1});
        pos += d2 + d1;
    }

    std::vector<int> order;
    order.reserve(l);
    for (const auto& g : desc.separator_groups)
        for (int a = 0; a < g.count; ++a) order.push_back(g.first + a);
    for (const auto& g : desc.interior_groups)
        for (int a = 0; a < g.count; ++a) order.push_back(g.first + a);
    return {Permutation::from_order(std::move(order)), desc};
}

/// 2x2 partitioned view of a permuted block tridiagonal matrix. Block (p, q)
/// lives at permuted coordinates; only structurally nonzero blocks (in-band
/// pairs of the original matrix) are stored. Rows/columns below `n1` belong
/// to the separator quadrant.
template <class T>
class PartitionedMatrix {
public:
    BlockLayout source_layout;
    Permutation perm;
    DomainDescriptor desc;
    int n1 = 0;  // number of separator layers

    bool is_separator(int p) const { return p < n1; }

    int permuted_block_size(int p) const {
        return source_layout.block_sizes[perm.inverse(p)];
    }

    const DenseMatrix<T>* find(int p, int q) const {
        auto it = blocks_.find({p, q});
        return it == blocks_.end() ? nullptr : &it->second;
    }

    const DenseMatrix<T>& block(int p, int q) const {
        const auto* b = find(p, q);
        if (!b) throw invalid_argument_error("PartitionedMatrix: structurally zero block");
        return *b;
    }

    void insert(int p, int q, DenseMatrix<T> b) { blocks_[{p, q}] = std::move(b); }

    const std::map<std::pair<int, int>, DenseMatrix<T>>& blocks() const { return blocks_; }

private:
    std::map<std::pair<int, int>, DenseMatrix<T>> blocks_;
};

/// Symmetric reordering of a block tridiagonal matrix by the given layer
/// permutation. Content is identical to `m` up to reindexing; the separator
/// and interior diagonal quadrants come out block diagonal at group level.
template <class T>
PartitionedMatrix<T> permute_matrix(const BlockBandedMatrix<T>& m, const Permutation& perm,
                                    const DomainDescriptor& desc) {
    if (perm.size() != m.num_layers())
        throw invalid_argument_error("permute_matrix: permutation size mismatch");
    PartitionedMatrix<T> out;
    out.source_layout = m.layout();
    out.perm = perm;
    out.desc = desc;
    out.n1 = desc.num_separator_layers();
    for (int a = 0; a < m.num_layers(); ++a)
        for (int off = -m.bandwidth(); off <= m.bandwidth(); ++off)
            if (m.in_band(a, off))
                out.insert(perm.forward(a), perm.forward(a + off), m.block(a, off));
    return out;
}

/// Inverse reordering back to the original layer order, keeping only the
/// in-band blocks of the target layout.
template <class T>
BlockBandedMatrix<T> unpermute_matrix(const PartitionedMatrix<T>& pm) {
    BlockBandedMatrix<T> out(pm.source_layout);
    for (const auto& [pq, blk] : pm.blocks()) {
        const int a = pm.perm.inverse(pq.first);
        const int b = pm.perm.inverse(pq.second);
        if (out.in_band(a, b - a)) out.block(a, b - a) = blk;
    }
    return out;
}

}  // namespace bbsi
