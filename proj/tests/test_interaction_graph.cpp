#include "sepgcn/interaction_graph.hpp"
#include "sepgcn/oracle.hpp"
#include "sepgcn/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sepgcn;

namespace {

/// Dataset with the given (user, item) train edges and no test edges.
Dataset edges_only(std::size_t n_users, std::size_t n_items, const std::vector<std::pair<std::uint32_t, std::uint32_t>> &e) {
    Dataset ds;
    for (std::size_t u = 0; u < n_users; ++u) {
        ds.user_ids.push_back("u" + std::to_string(u));
    }
    for (std::size_t i = 0; i < n_items; ++i) {
        ds.item_ids.push_back("p" + std::to_string(i));
        ds.item_coords.push_back({0.0, 0.01 * static_cast<double>(i)});
    }
    for (const auto &[u, i] : e) {
        ds.interactions.push_back({u, i, {10}, SplitTag::train});
    }
    return ds;
}

Matrix random_table(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix m(rows, cols);
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    for (double &v : m.data()) {
        v = n(rng);
    }
    return m;
}

double entry(const BipartiteGraph &g, std::size_t r, std::size_t c) {
    const auto cols = g.adjacency.row_cols(r);
    const auto vals = g.adjacency.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] == c) {
            return vals[k];
        }
    }
    return 0.0;
}

}  // namespace

TEST(Adjacency, SingleEdgeHasUnitWeight) {
    const BipartiteGraph g = build_adjacency(edges_only(1, 1, {{0, 0}}));
    EXPECT_EQ(g.n_nodes(), 2U);
    EXPECT_DOUBLE_EQ(entry(g, 0, 1), 1.0);
    EXPECT_DOUBLE_EQ(entry(g, 1, 0), 1.0);
}

TEST(Adjacency, UserWithFourItemsHalves) {
    const BipartiteGraph g = build_adjacency(edges_only(1, 4, {{0, 0}, {0, 1}, {0, 2}, {0, 3}}));
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(entry(g, 0, g.item_node(i)), 0.5);
        EXPECT_DOUBLE_EQ(entry(g, g.item_node(i), 0), 0.5);
    }
}

TEST(Adjacency, TestEdgesAreExcluded) {
    Dataset ds = edges_only(1, 2, {{0, 0}, {0, 1}});
    ds.interactions[1].split = SplitTag::test;
    const BipartiteGraph g = build_adjacency(ds);
    EXPECT_EQ(g.adjacency.nnz(), 2U);
    EXPECT_TRUE(g.adjacency.row_cols(g.item_node(1)).empty());
}

TEST(Adjacency, MatchesDenseOracle) {
    RandomGraphConfig rc;
    rc.n_users = 30;
    rc.n_items = 40;
    rc.n_records = 200;
    const Dataset ds = random_dataset(rc);
    const BipartiteGraph g = build_adjacency(ds);
    const oracle::Dense ref = oracle::dense_adjacency(ds);
    double worst = 0.0;
    for (std::size_t r = 0; r < g.n_nodes(); ++r) {
        for (std::size_t c = 0; c < g.n_nodes(); ++c) {
            worst = std::max(worst, std::abs(entry(g, r, c) - ref[r][c]));
        }
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Adjacency, SymmetricBipartiteAndBounded) {
    const Dataset ds = build_dataset(generate_city(SynthConfig{}), SplitConfig{});
    const BipartiteGraph g = build_adjacency(ds);
    const CsrMatrix t = g.adjacency.transposed();
    for (std::size_t r = 0; r < g.n_nodes(); ++r) {
        const auto cols = g.adjacency.row_cols(r);
        const auto vals = g.adjacency.row_values(r);
        const auto tcols = t.row_cols(r);
        const auto tvals = t.row_values(r);
        ASSERT_EQ(cols.size(), tcols.size());
        for (std::size_t k = 0; k < cols.size(); ++k) {
            EXPECT_EQ(cols[k], tcols[k]);
            EXPECT_EQ(vals[k], tvals[k]);
            EXPECT_NE(r < g.n_users, cols[k] < g.n_users);
            EXPECT_GT(vals[k], 0.0);
            EXPECT_LE(vals[k], 1.0);
        }
    }
}

TEST(Adjacency, ItemBlockAddsWeightedItemItemEntries) {
    const BipartiteGraph g = build_adjacency(edges_only(1, 2, {{0, 0}, {0, 1}}), {{0, 1, 0.5}, {1, 0, 0.5}});
    // item degrees 1.5, user degree 2
    EXPECT_DOUBLE_EQ(g.degree[g.item_node(0)], 1.5);
    EXPECT_NEAR(entry(g, g.item_node(0), g.item_node(1)), 0.5 / 1.5, 1e-15);
    EXPECT_NEAR(entry(g, 0, g.item_node(1)), 1.0 / std::sqrt(2.0 * 1.5), 1e-15);
}

TEST(Spmv, ZeroInZeroOut) {
    const BipartiteGraph g = build_adjacency(edges_only(3, 3, {{0, 0}, {1, 1}, {2, 0}}));
    const Matrix out = spmv(g, Matrix(g.n_nodes(), 5));
    for (double v : out.data()) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Spmv, SingleEdgeSwapsRows) {
    const BipartiteGraph g = build_adjacency(edges_only(1, 1, {{0, 0}}));
    Matrix e(2, 2);
    e(0, 0) = 1;
    e(0, 1) = 2;
    e(1, 0) = 3;
    e(1, 1) = 4;
    const Matrix out = spmv(g, e);
    EXPECT_EQ(out(0, 0), 3);
    EXPECT_EQ(out(0, 1), 4);
    EXPECT_EQ(out(1, 0), 1);
    EXPECT_EQ(out(1, 1), 2);
}

TEST(Spmv, LinearAndMatchesDenseSquare) {
    RandomGraphConfig rc;
    const Dataset ds = random_dataset(rc);
    const BipartiteGraph g = build_adjacency(ds);
    const Matrix x = random_table(g.n_nodes(), 4, 1);
    const Matrix y = random_table(g.n_nodes(), 4, 2);
    Matrix mix = x;
    for (std::size_t p = 0; p < mix.size(); ++p) {
        mix.data()[p] = 2.0 * x.data()[p] - 3.0 * y.data()[p];
    }
    const Matrix ax = spmv(g, x), ay = spmv(g, y), amix = spmv(g, mix);
    for (std::size_t p = 0; p < amix.size(); ++p) {
        EXPECT_NEAR(amix.data()[p], 2.0 * ax.data()[p] - 3.0 * ay.data()[p], 1e-12);
    }
    const oracle::Dense a = oracle::dense_adjacency(ds);
    const oracle::Dense a2x = oracle::matmul(oracle::matmul(a, a), oracle::to_dense(x));
    EXPECT_LE(oracle::max_abs_diff(a2x, spmv(g, spmv(g, x))), 1e-12);
}

TEST(Spmv, ParallelEqualsSequential) {
    const Dataset ds = build_dataset(generate_city(SynthConfig{}), SplitConfig{});
    const BipartiteGraph g = build_adjacency(ds);
    const Matrix x = random_table(g.n_nodes(), 16, 3);
    const std::size_t saved = thread_count();
    thread_count() = 1;
    const Matrix one = spmv(g, x);
    thread_count() = 4;
    const Matrix four = spmv(g, x);
    thread_count() = saved;
    EXPECT_TRUE(one == four);
}

TEST(Spmv, ShapeMismatchRejected) {
    const BipartiteGraph g = build_adjacency(edges_only(1, 1, {{0, 0}}));
    EXPECT_THROW((void)spmv(g, Matrix(3, 2)), Error);
}
