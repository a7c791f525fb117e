/**
 * @file
 * @brief Symmetrically normalised user-item adjacency and its product with
 *        an embedding table.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/core.hpp"

#include <vector>

namespace sepgcn {

/// Node layout: users occupy rows [0, n_users), items [n_users, n_users + n_items).
struct BipartiteGraph {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    CsrMatrix adjacency;  ///< D^{-1/2} A D^{-1/2}
    std::vector<double> degree;

    [[nodiscard]] std::size_t n_nodes() const noexcept { return n_users + n_items; }
    [[nodiscard]] std::size_t item_node(std::size_t item) const noexcept { return n_users + item; }
};

/**
 * @brief Normalised adjacency over the training edges.
 *
 * @p item_block optionally fills the item-item block (indices are item ids);
 * degrees are then weighted row sums. Isolated nodes keep empty rows.
 */
[[nodiscard]] inline BipartiteGraph build_adjacency(const Dataset &ds, const std::vector<Triplet> &item_block = {}) {
    BipartiteGraph g;
    g.n_users = ds.n_users();
    g.n_items = ds.n_items();
    std::vector<Triplet> raw;
    for (const Interaction &x : ds.interactions) {
        if (x.split != SplitTag::train) {
            continue;
        }
        const auto u = x.user;
        const auto i = static_cast<std::uint32_t>(g.item_node(x.item));
        raw.push_back({u, i, 1.0});
        raw.push_back({i, u, 1.0});
    }
    for (const Triplet &t : item_block) {
        raw.push_back({static_cast<std::uint32_t>(g.item_node(t.row)), static_cast<std::uint32_t>(g.item_node(t.col)), t.value});
    }
    g.degree.assign(g.n_nodes(), 0.0);
    for (const Triplet &t : raw) {
        g.degree[t.row] += t.value;
    }
    for (Triplet &t : raw) {
        t.value /= std::sqrt(g.degree[t.row] * g.degree[t.col]);
    }
    g.adjacency = CsrMatrix(g.n_nodes(), g.n_nodes(), std::move(raw));
    return g;
}

/// One propagation step: returns adjacency * embeddings.
[[nodiscard]] inline Matrix spmv(const BipartiteGraph &g, const Matrix &embeddings) {
    if (embeddings.rows() != g.n_nodes()) {
        fail(ErrorKind::numerical, "spmv: embedding table has " + std::to_string(embeddings.rows()) + " rows, graph has " +
                                       std::to_string(g.n_nodes()) + " nodes");
    }
    return g.adjacency.multiply(embeddings);
}

}  // namespace sepgcn
