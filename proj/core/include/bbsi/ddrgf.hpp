#pragma once

#include <array>
#include <exception>
#include <map>
#include <thread>

#include "bbsi/partition.hpp"
#include "bbsi/rgf.hpp"
#include "bbsi/threading.hpp"

namespace bbsi {

/// Recursion schedule for the domain-decomposition solver. One entry of
/// `s2_levels` per level gives the interior group size at that level;
/// separators are always single layers. The deepest reduced system is solved
/// sequentially with `terminal_threads` kernel threads.
struct DomainPlan {
    std::vector<int> s2_levels;
    int n_threads = 1;
    int terminal_threads = 1;

    int n_levels() const { return int(s2_levels.size()); }

    void validate() const {
        if (s2_levels.empty()) throw invalid_argument_error("DomainPlan: needs at least one level");
        for (int s2 : s2_levels)
            if (s2 < 1) throw invalid_argument_error("DomainPlan: s2 must be >= 1");
        if (n_threads < 1 || terminal_threads < 1)
            throw invalid_argument_error("DomainPlan: thread counts must be >= 1");
    }
};

/// Per-task output of one interior sub-domain: its extended inverse and the
/// separator-facing coupling products. Index 0 of the two-element arrays is
/// the left separator (virtual, all-zero for the first sub-domain), index 1
/// the right one.
template <class T>
struct SubdomainResult {
    int task = 0;
    bool empty = false;
    ExtendedInverse<T> ext;

    // v_*[c] = coupling(sep -> edge) * (sub-domain inverse row of the edge);
    // w_*[c] = (sub-domain inverse column of the edge) * coupling(edge -> sep)
    std::vector<DenseMatrix<T>> v_left, v_right;
    std::vector<DenseMatrix<T>> w_left, w_right;
    // schur_update[j1][j2]: this sub-domain's contribution to the reduced
    // system block (sep j1, sep j2)
    std::array<std::array<DenseMatrix<T>, 2>, 2> schur_update;
    // y_*[b] = rows of (reduced inverse) * V, cached for the diagonal update
    std::vector<DenseMatrix<T>> y_left, y_right;

    KernelCounters counters;       // sub-domain inversion + couplings
    KernelCounters counters_corr;  // correction phase
};

template <class T>
using BlockSet = std::map<std::pair<int, int>, DenseMatrix<T>>;

enum class CouplingSide {
    separator_rows,  // blocks (separator layer, interior layer)
    separator_cols   // blocks (interior layer, separator layer)
};

enum class ProductGrouping { from_left, from_right };

namespace detail {

/// Uniform block size of a layout the solver has validated as uniform.
inline int uniform_bs(const BlockLayout& layout) { return layout.block_sizes.front(); }

/// Block (j1, j2) of the reduced inverse, with zeros for virtual separator
/// indices (< 0) and out-of-band pairs.
template <class T>
DenseMatrix<T> reduced_block(const BlockBandedMatrix<T>& schur_inv, int j1, int j2, int bs) {
    if (j1 < 0 || j2 < 0 || !schur_inv.in_band(j1, j2 - j1)) return DenseMatrix<T>(bs, bs);
    return schur_inv.block(j1, j2 - j1);
}

/// Phase A for one sub-domain: extract, invert with halos, form the coupling
/// products and the reduced-system contribution. The first sub-domain's
/// missing left separator is represented by explicit zero coupling blocks so
/// every task performs the same kernel sequence.
template <class T>
SubdomainResult<T> compute_subdomain(const BlockBandedMatrix<T>& m, const DomainDescriptor& desc,
                                     int i) {
    SubdomainResult<T> r;
    r.task = i;
    const auto g = desc.interior_groups[i];
    if (g.count == 0) {
        r.empty = true;
        return r;
    }
    const int bs = uniform_bs(m.layout());
    auto& c = r.counters;

    BlockLayout sub_layout(g.count, std::vector<int>(g.count, bs), g.count == 1 ? 0 : 1);
    BlockBandedMatrix<T> sub(sub_layout);
    for (int a = 0; a < g.count; ++a)
        for (int off = -1; off <= 1; ++off)
            if (sub.in_band(a, off)) sub.block(a, off) = m.block(g.first + a, off);

    try {
        auto [ext, cext] = rgf_extended(sub);
        r.ext = std::move(ext);
        c += cext;
    } catch (const singular_matrix_error& e) {
        const int global = e.layer() >= 0 ? g.first + e.layer() : -1;
        throw singular_matrix_error("sub-domain " + std::to_string(i) + ": singular pivot at layer " +
                                        std::to_string(global),
                                    global);
    }

    const bool has_left = i > 0;
    const int last = g.count - 1;
    // couplings between the edges of this sub-domain and its separators
    DenseMatrix<T> in_left = has_left ? m.block(g.first - 1, +1) : DenseMatrix<T>(bs, bs);
    DenseMatrix<T> out_left = has_left ? m.block(g.first, -1) : DenseMatrix<T>(bs, bs);
    DenseMatrix<T> in_right = m.block(g.first + g.count, -1);
    DenseMatrix<T> out_right = m.block(g.first + last, +1);

    r.v_left.resize(g.count);
    r.v_right.resize(g.count);
    r.w_left.resize(g.count);
    r.w_right.resize(g.count);
    for (int a = 0; a < g.count; ++a) {
        r.v_left[a] = gemm(T{1}, in_left, r.ext.first_row[a], c);
        r.v_right[a] = gemm(T{1}, in_right, r.ext.last_row[a], c);
        r.w_left[a] = gemm(T{1}, r.ext.first_col[a], out_left, c);
        r.w_right[a] = gemm(T{1}, r.ext.last_col[a], out_right, c);
    }

    const std::array<const std::vector<DenseMatrix<T>>*, 2> w{&r.w_left, &r.w_right};
    for (int j2 = 0; j2 < 2; ++j2) {
        r.schur_update[0][j2] = gemm(T{1}, in_left, (*w[j2])[0], c);
        r.schur_update[1][j2] = gemm(T{1}, in_right, (*w[j2])[last], c);
    }
    return r;
}

template <class T>
void compute_y(SubdomainResult<T>& r, const BlockBandedMatrix<T>& schur_inv,
               const DomainDescriptor& desc, int bs, KernelCounters& c) {
    const int count = desc.interior_groups[r.task].count;
    const int left = r.task - 1, right = r.task;
    const std::array<int, 2> sep{left, right};
    const std::array<const std::vector<DenseMatrix<T>>*, 2> v{&r.v_left, &r.v_right};
    std::array<std::vector<DenseMatrix<T>>*, 2> y{&r.y_left, &r.y_right};
    for (int j2 = 0; j2 < 2; ++j2) {
        y[j2]->assign(count, DenseMatrix<T>());
        for (int b = 0; b < count; ++b) {
            DenseMatrix<T> acc(bs, (*v[0])[b].cols());
            for (int j1 = 0; j1 < 2; ++j1)
                gemm_into(T{1}, reduced_block(schur_inv, sep[j2], sep[j1], bs), (*v[j1])[b],
                          j1 == 0 ? T{0} : T{1}, acc, c);
            (*y[j2])[b] = std::move(acc);
        }
    }
}

/// Output blocks (separator layer, interior layer) of the inverse: the edge
/// entries of -Y, free once Y is cached.
template <class T>
void collect_separator_rows(const SubdomainResult<T>& r, const DomainDescriptor& desc,
                            BlockSet<T>& out) {
    const auto g = desc.interior_groups[r.task];
    if (r.task > 0) {
        const int sep_layer = g.first - 1;
        out[{sep_layer, g.first}] = -r.y_left[0];
    }
    const int sep_layer = g.first + g.count;
    out[{sep_layer, g.first + g.count - 1}] = -r.y_right[g.count - 1];
}

/// Output blocks (interior layer, separator layer): -W * (reduced inverse).
template <class T>
void collect_separator_cols(const SubdomainResult<T>& r, const BlockBandedMatrix<T>& schur_inv,
                            const DomainDescriptor& desc, int bs, BlockSet<T>& out,
                            KernelCounters& c) {
    const auto g = desc.interior_groups[r.task];
    const int left = r.task - 1, right = r.task;
    const int last = g.count - 1;

    DenseMatrix<T> to_left(r.w_left[0].rows(), bs);
    gemm_into(T{-1}, r.w_left[0], reduced_block(schur_inv, left, left, bs), T{0}, to_left, c);
    gemm_into(T{-1}, r.w_right[0], reduced_block(schur_inv, right, left, bs), T{1}, to_left, c);
    if (r.task > 0) out[{g.first, g.first - 1}] = std::move(to_left);

    DenseMatrix<T> to_right(r.w_left[last].rows(), bs);
    gemm_into(T{-1}, r.w_left[last], reduced_block(schur_inv, left, right, bs), T{0}, to_right, c);
    gemm_into(T{-1}, r.w_right[last], reduced_block(schur_inv, right, right, bs), T{1}, to_right, c);
    out[{g.first + last, g.first + g.count}] = std::move(to_right);
}

/// Adds W * Y, restricted to the tridiagonal pattern, onto the sub-domain
/// core inverse. Requires the cached Y (right grouping).
template <class T>
void diag_update_right(SubdomainResult<T>& r, const DomainDescriptor& desc, KernelCounters& c) {
    const int count = desc.interior_groups[r.task].count;
    if (int(r.y_left.size()) != count)
        throw invalid_argument_error("correction_diag: separator_rows correction must run first");
    for (int a = 0; a < count; ++a)
        for (int b = std::max(0, a - 1); b <= std::min(count - 1, a + 1); ++b) {
            gemm_into(T{1}, r.w_left[a], r.y_left[b], T{1}, r.ext.core.block(a, b - a), c);
            gemm_into(T{1}, r.w_right[a], r.y_right[b], T{1}, r.ext.core.block(a, b - a), c);
        }
}

/// Same update with the product chain grouped from the left:
/// Z = W * (reduced inverse), then Z * V.
template <class T>
void diag_update_left(SubdomainResult<T>& r, const BlockBandedMatrix<T>& schur_inv,
                      const DomainDescriptor& desc, int bs, KernelCounters& c) {
    const int count = desc.interior_groups[r.task].count;
    const int left = r.task - 1, right = r.task;
    const std::array<int, 2> sep{left, right};
    const std::array<const std::vector<DenseMatrix<T>>*, 2> w{&r.w_left, &r.w_right};
    const std::array<const std::vector<DenseMatrix<T>>*, 2> v{&r.v_left, &r.v_right};
    std::array<std::vector<DenseMatrix<T>>, 2> z;
    for (int j1 = 0; j1 < 2; ++j1) {
        z[j1].assign(count, DenseMatrix<T>());
        for (int a = 0; a < count; ++a) {
            DenseMatrix<T> acc((*w[0])[a].rows(), bs);
            for (int j2 = 0; j2 < 2; ++j2)
                gemm_into(T{1}, (*w[j2])[a], reduced_block(schur_inv, sep[j2], sep[j1], bs),
                          j2 == 0 ? T{0} : T{1}, acc, c);
            z[j1][a] = std::move(acc);
        }
    }
    for (int a = 0; a < count; ++a)
        for (int b = std::max(0, a - 1); b <= std::min(count - 1, a + 1); ++b)
            for (int j1 = 0; j1 < 2; ++j1)
                gemm_into(T{1}, z[j1][a], (*v[j1])[b], T{1}, r.ext.core.block(a, b - a), c);
}

/// Static round-robin fork-join: task i runs on thread i mod n. Exceptions
/// are collected per task and the lowest-indexed one is rethrown.
template <class F>
void run_tasks(int n_tasks, int n_threads, F&& fn) {
    const int nt = std::max(1, std::min(n_threads, n_tasks));
    if (nt == 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n_tasks);
    std::vector<std::thread> workers;
    workers.reserve(nt);
    for (int r = 0; r < nt; ++r)
        workers.emplace_back([&, r] {
            for (int i = r; i < n_tasks; i += nt) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Sequential task phase: extended inversion and coupling products for every
/// interior sub-domain, in task order. The solver runs the same computation
/// fanned out over threads.
template <class T>
std::vector<SubdomainResult<T>> compute_subdomains(const BlockBandedMatrix<T>& m,
                                                   const DomainDescriptor& desc) {
    std::vector<SubdomainResult<T>> results(desc.n_tasks());
    for (int i = 0; i < desc.n_tasks(); ++i) results[i] = detail::compute_subdomain(m, desc, i);
    return results;
}

/// Reduced system over the separator layers: the separator quadrant of the
/// permuted matrix minus the per-sub-domain coupling contributions (computed
/// in the task phase). Block tridiagonal at separator level by construction,
/// including the cross couplings between the two separators flanking each
/// sub-domain.
template <class T>
BlockBandedMatrix<T> assemble_schur(const PartitionedMatrix<T>& parts,
                                    const std::vector<SubdomainResult<T>>& results) {
    const int n1 = parts.n1;
    std::vector<int> sizes(n1);
    for (int j = 0; j < n1; ++j) sizes[j] = parts.permuted_block_size(j);
    BlockBandedMatrix<T> s(BlockLayout(n1, sizes, n1 == 1 ? 0 : 1));
    for (int j = 0; j < n1; ++j)
        for (int off = -1; off <= 1; ++off) {
            if (!s.in_band(j, off)) continue;
            if (const auto* b = parts.find(j, j + off)) s.block(j, off) = *b;
        }
    for (const auto& r : results) {
        if (r.empty) continue;
        const std::array<int, 2> sep{r.task - 1, r.task};
        for (int j1 = 0; j1 < 2; ++j1)
            for (int j2 = 0; j2 < 2; ++j2)
                if (sep[j1] >= 0 && sep[j2] >= 0)
                    s.block(sep[j1], sep[j2] - sep[j1]) -= r.schur_update[j1][j2];
    }
    return s;
}

/// Coupling blocks of the inverse between separator and interior layers,
/// keyed by original (row layer, column layer). For separator_rows this also
/// caches Y = (reduced inverse) * V in each result, which the diagonal
/// correction reuses.
template <class T>
BlockSet<T> correction_offdiag(CouplingSide side, const BlockBandedMatrix<T>& schur_inv,
                               std::vector<SubdomainResult<T>>& results,
                               const DomainDescriptor& desc, int block_size, KernelCounters& c) {
    BlockSet<T> out;
    for (auto& r : results) {
        if (r.empty) continue;
        if (side == CouplingSide::separator_rows) {
            detail::compute_y(r, schur_inv, desc, block_size, c);
            detail::collect_separator_rows(r, desc, out);
        } else {
            detail::collect_separator_cols(r, schur_inv, desc, block_size, out, c);
        }
    }
    return out;
}

/// Adds the tridiagonal-restricted correction W * (reduced inverse) * V onto
/// each sub-domain's core inverse. The chain is associative; both groupings
/// give the same update, the right grouping reuses the cached Y.
template <class T>
void correction_diag(const BlockBandedMatrix<T>& schur_inv,
                     std::vector<SubdomainResult<T>>& results, const DomainDescriptor& desc,
                     int block_size, ProductGrouping grouping, KernelCounters& c) {
    for (auto& r : results) {
        if (r.empty) continue;
        if (grouping == ProductGrouping::from_right)
            detail::diag_update_right(r, desc, c);
        else
            detail::diag_update_left(r, schur_inv, desc, block_size, c);
    }
}

namespace detail {

template <class T>
std::pair<BlockBandedMatrix<T>, KernelCounters> ddrgf_level(const BlockBandedMatrix<T>& m,
                                                            const DomainPlan& plan, int level) {
    const int s2 = plan.s2_levels[level];
    const int bs = uniform_bs(m.layout());
    KernelCounters total;

    auto [perm, desc] = interleave_permutation(m.layout(), 1, s2);
    auto parts = permute_matrix(m, perm, desc);
    const int n_tasks = desc.n_tasks();

    std::vector<SubdomainResult<T>> results(n_tasks);
    run_tasks(n_tasks, plan.n_threads,
              [&](int i) { results[i] = compute_subdomain(m, desc, i); });
    for (const auto& r : results) total += r.counters;

    BlockBandedMatrix<T> schur = assemble_schur(parts, results);

    BlockBandedMatrix<T> schur_inv;
    if (level + 1 < plan.n_levels()) {
        if (schur.num_layers() < 1 + plan.s2_levels[level + 1])
            throw invalid_argument_error("ddrgf: plan exhausts layers at level " +
                                         std::to_string(level + 1));
        auto [gi, ci] = ddrgf_level(schur, plan, level + 1);
        schur_inv = std::move(gi);
        total += ci;
    } else {
        KernelThreadGuard guard(plan.terminal_threads);
        auto [gi, ci] = rgf_tridiag(schur);
        schur_inv = std::move(gi);
        total += ci;
    }

    std::vector<BlockSet<T>> coupling_out(n_tasks);
    run_tasks(n_tasks, plan.n_threads, [&](int i) {
        auto& r = results[i];
        if (r.empty) return;
        auto& c = r.counters_corr;
        compute_y(r, schur_inv, desc, bs, c);
        collect_separator_rows(r, desc, coupling_out[i]);
        collect_separator_cols(r, schur_inv, desc, bs, coupling_out[i], c);
        diag_update_right(r, desc, c);
    });
    for (const auto& r : results) total += r.counters_corr;

    // stitch the selected inverse back together in original layer order
    BlockBandedMatrix<T> g(m.layout());
    for (int j = 0; j < schur_inv.num_layers(); ++j) {
        const int layer_j = desc.separator_groups[j].first;
        for (int off = -1; off <= 1; ++off) {
            if (!schur_inv.in_band(j, off)) continue;
            const int layer_q = desc.separator_groups[j + off].first;
            if (g.in_band(layer_j, layer_q - layer_j))
                g.block(layer_j, layer_q - layer_j) = schur_inv.block(j, off);
        }
    }
    for (const auto& r : results) {
        if (r.empty) continue;
        const auto grp = desc.interior_groups[r.task];
        for (int a = 0; a < grp.count; ++a)
            for (int off = -1; off <= 1; ++off)
                if (r.ext.core.in_band(a, off))
                    g.block(grp.first + a, off) = r.ext.core.block(a, off);
    }
    for (auto& set : coupling_out)
        for (auto& [rc, blk] : set) g.block(rc.first, rc.second - rc.first) = std::move(blk);

    return {std::move(g), total};
}

}  // namespace detail

/// Parallel selected inversion of a block tridiagonal matrix by recursive
/// domain decomposition. Output matches rgf_tridiag up to roundoff; results
/// are independent of the thread count (kernel threading stays off inside
/// tasks, and joins merge in task order).
template <class T>
std::pair<BlockBandedMatrix<T>, KernelCounters> ddrgf(const BlockBandedMatrix<T>& m,
                                                      const DomainPlan& plan) {
    plan.validate();
    if (m.bandwidth() != 1) throw invalid_argument_error("ddrgf: requires bandwidth 1");
    if (!m.layout().uniform()) throw invalid_argument_error("ddrgf: requires uniform block sizes");
    KernelThreadGuard guard(1);
    return detail::ddrgf_level(m, plan, 0);
}

}  // namespace bbsi
