#include <doctest.h>

#include "bbsi/partition.hpp"
#include "helpers.hpp"

using namespace bbsi;
using testutil::cd;

TEST_CASE("interleave order for an even split") {
    auto layout = make_layout(10, 2, 1);
    auto [perm, desc] = interleave_permutation(layout, 1, 4);

    CHECK(desc.n_tasks() == 2);
    CHECK(desc.num_separator_layers() == 2);
    CHECK(perm.to_original == std::vector<int>{4, 9, 0, 1, 2, 3, 5, 6, 7, 8});
    CHECK(perm.forward(4) == 0);
    CHECK(perm.forward(0) == 2);
    CHECK(perm.inverse(perm.forward(7)) == 7);
}

TEST_CASE("smallest admissible split") {
    auto [perm, desc] = interleave_permutation(make_layout(2, 1, 1), 1, 1);
    CHECK(perm.to_original == std::vector<int>{1, 0});
    CHECK(desc.interior_groups.size() == 1);
    CHECK(desc.interior_groups[0].count == 1);
    CHECK(desc.separator_groups[0].first == 1);
}

TEST_CASE("trailing remainder shortens the last interior group") {
    auto [perm, desc] = interleave_permutation(make_layout(11, 1, 1), 1, 4);

    REQUIRE(desc.n_tasks() == 3);
    CHECK(desc.interior_groups[2].count == 0);     // empty trailing interior
    CHECK(desc.separator_groups[2].first == 10);
    CHECK(desc.separator_groups[2].count == 1);
    CHECK(perm.to_original == std::vector<int>{4, 9, 10, 0, 1, 2, 3, 5, 6, 7, 8});

    // a two-layer remainder keeps one interior layer
    auto [p2, d2] = interleave_permutation(make_layout(12, 1, 1), 1, 4);
    CHECK(d2.interior_groups[2].count == 1);
    CHECK(d2.interior_groups[2].first == 10);
    CHECK(d2.separator_groups[2].first == 11);
}

TEST_CASE("interleave rejects degenerate inputs") {
    CHECK_THROWS_AS(interleave_permutation(make_layout(4, 1, 1), 0, 2), invalid_argument_error);
    CHECK_THROWS_AS(interleave_permutation(make_layout(4, 1, 2), 1, 2), invalid_argument_error);
    CHECK_THROWS_AS(interleave_permutation(make_layout(3, 1, 1), 1, 4), invalid_argument_error);
}

TEST_CASE("permute and unpermute round trip") {
    auto layout = make_layout(10, 3, 1);
    auto m = random_spd_like<cd>(layout, 42, 2.0);
    auto [perm, desc] = interleave_permutation(layout, 1, 4);
    auto pm = permute_matrix(m, perm, desc);

    // content preserved up to reindexing
    for (int a = 0; a < 10; ++a)
        for (int off = -1; off <= 1; ++off)
            if (m.in_band(a, off))
                CHECK(rel_frobenius_error(pm.block(perm.forward(a), perm.forward(a + off)),
                                          m.block(a, off)) == 0.0);

    CHECK(unpermute_matrix(pm) == m);
}

TEST_CASE("interior quadrant decouples across tasks") {
    auto layout = make_layout(14, 2, 1);
    auto m = random_spd_like<cd>(layout, 5, 2.0);
    auto [perm, desc] = interleave_permutation(layout, 1, 4);
    auto pm = permute_matrix(m, perm, desc);

    // no stored block may connect interior layers of different tasks
    auto task_of = [&](int p) {
        const int a = perm.inverse(p);
        for (int t = 0; t < desc.n_tasks(); ++t) {
            const auto& g = desc.interior_groups[t];
            if (a >= g.first && a < g.first + g.count) return t;
        }
        return -1;
    };
    for (const auto& [pq, blk] : pm.blocks()) {
        (void)blk;
        if (pm.is_separator(pq.first) || pm.is_separator(pq.second)) continue;
        CHECK(task_of(pq.first) == task_of(pq.second));
    }
}

TEST_CASE("partitioned access and separator bookkeeping") {
    auto layout = make_layout(10, 2, 1);
    auto m = random_spd_like<cd>(layout, 6, 2.0);
    auto [perm, desc] = interleave_permutation(layout, 1, 4);
    auto pm = permute_matrix(m, perm, desc);

    CHECK(pm.n1 == 2);
    CHECK(pm.is_separator(0));
    CHECK(pm.is_separator(1));
    CHECK_FALSE(pm.is_separator(2));
    CHECK(pm.permuted_block_size(0) == 2);
    CHECK(pm.find(0, 9) == nullptr);  // separator 4 touches layers 3 and 5 only
    CHECK_THROWS_AS(pm.block(0, 9), invalid_argument_error);
    CHECK(pm.find(0, perm.forward(3)) != nullptr);
    CHECK(pm.find(0, perm.forward(5)) != nullptr);
}
