/**
 * @file
 * @brief Forward pass: graph propagation interleaved with SEP edge-embedding
 *        propagation and the weighted user/item refresh, layer averaging and
 *        dot-product scoring. The adjoint of the whole (linear) pass lives
 *        here as well, next to the forward code it mirrors.
 */

#pragma once

#include "sepgcn/core.hpp"
#include "sepgcn/interaction_graph.hpp"
#include "sepgcn/sep_graph.hpp"

#include <cstring>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sepgcn {

struct ModelConfig {
    std::size_t dim = 64;
    std::size_t layers = 3;
    double alpha_user = 0.5;  ///< weight kept on the propagated user row
    double beta_item = 0.5;   ///< weight kept on the propagated item row
    bool sep_enabled = true;
    bool sep_every_layer = true;  ///< false: refresh after the first layer only
    double init_std = 0.1;
    std::uint64_t seed = 2024;

    void validate() const {
        if (dim < 1) {
            fail(ErrorKind::config, "model.dim must be >= 1");
        }
        if (layers < 1) {
            fail(ErrorKind::config, "model.layers must be >= 1");
        }
        if (alpha_user < 0.0 || alpha_user > 1.0 || beta_item < 0.0 || beta_item > 1.0) {
            fail(ErrorKind::config, "model.alpha_user and model.beta_item must lie in [0, 1]");
        }
        if (init_std < 0.0) {
            fail(ErrorKind::config, "model.init_std must be >= 0");
        }
    }
};

/// Seeded i.i.d. normal(0, init_std^2) table of shape n_nodes x dim.
[[nodiscard]] inline Matrix init_embeddings(std::size_t n_nodes, const ModelConfig &cfg) {
    Matrix e(n_nodes, cfg.dim);
    if (cfg.init_std == 0.0) {
        return e;
    }
    Rng rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, cfg.init_std);
    for (double &v : e.data()) {
        v = normal(rng);
    }
    return e;
}

/// Row e = concat(user row, item row) of the edge's endpoints.
[[nodiscard]] inline Matrix edge_embed(const Matrix &nodes, const EdgeIndex &idx) {
    const std::size_t d = nodes.cols();
    Matrix out(idx.size(), 2 * d);
    for (std::size_t e = 0; e < idx.size(); ++e) {
        const auto u = nodes.row(idx.users[e]);
        const auto i = nodes.row(idx.n_users + idx.items[e]);
        auto dst = out.row(e);
        std::copy(u.begin(), u.end(), dst.begin());
        std::copy(i.begin(), i.end(), dst.begin() + static_cast<std::ptrdiff_t>(d));
    }
    return out;
}

/// One propagation step of edge embeddings over a normalised SEP matrix.
[[nodiscard]] inline Matrix sep_propagate(const Matrix &edge_rows, const SepMatrix &normalized) {
    if (normalized.normalization == SepNormalization::raw) {
        fail(ErrorKind::config, "sep_propagate expects a normalised SEP matrix");
    }
    if (edge_rows.rows() != normalized.n) {
        fail(ErrorKind::numerical, "sep_propagate: " + std::to_string(edge_rows.rows()) + " edge rows vs SEP size " +
                                       std::to_string(normalized.n));
    }
    return normalized.to_csr().multiply(edge_rows);
}

/**
 * @brief Edge incidence per node: for every node, the training edges touching
 *        it, optionally restricted to edges flagged in @p active.
 */
struct Incidence {
    std::vector<std::size_t> offset;
    std::vector<std::uint32_t> edges;

    explicit Incidence(const EdgeIndex &idx, const std::vector<bool> *active = nullptr)
        : offset(idx.n_users + idx.n_items + 1, 0) {
        auto used = [&](std::size_t e) { return active == nullptr || (*active)[e]; };
        for (std::size_t e = 0; e < idx.size(); ++e) {
            if (used(e)) {
                ++offset[idx.users[e] + 1];
                ++offset[idx.n_users + idx.items[e] + 1];
            }
        }
        for (std::size_t v = 0; v + 1 < offset.size(); ++v) {
            offset[v + 1] += offset[v];
        }
        edges.resize(offset.back());
        std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
        for (std::size_t e = 0; e < idx.size(); ++e) {
            if (used(e)) {
                edges[fill[idx.users[e]]++] = static_cast<std::uint32_t>(e);
                edges[fill[idx.n_users + idx.items[e]]++] = static_cast<std::uint32_t>(e);
            }
        }
    }

    [[nodiscard]] std::span<const std::uint32_t> of(std::size_t node) const noexcept {
        return {edges.data() + offset[node], offset[node + 1] - offset[node]};
    }
};

/// Edges with at least one SEP neighbour.
[[nodiscard]] inline std::vector<bool> sep_connected(const SepMatrix &m) {
    std::vector<bool> active(m.n, false);
    for (const Triplet &t : m.entries) {
        active[t.row] = true;
    }
    return active;
}

namespace detail {

inline void update_from_sep_into(const Matrix &nodes, const Matrix &edge_rows, const Incidence &inc, std::size_t n_users,
                                 double alpha_user, double beta_item, Matrix &out) {
    const std::size_t d = nodes.cols();
    out = nodes;
    parallel_for(nodes.rows(), [&](std::size_t v) {
        const auto edges = inc.of(v);
        if (edges.empty()) {
            return;
        }
        const bool is_user = v < n_users;
        const double keep = is_user ? alpha_user : beta_item;
        const std::size_t seg = is_user ? 0 : d;
        const double share = (1.0 - keep) / static_cast<double>(edges.size());
        auto dst = out.row(v);
        const auto src = nodes.row(v);
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::uint32_t e : edges) {
                acc += edge_rows(e, seg + c);
            }
            dst[c] = keep * src[c] + share * acc;
        }
    });
}

}  // namespace detail

/**
 * @brief Refresh node rows from propagated edge rows.
 *
 * A user row becomes alpha * row + (1 - alpha) * mean of the user halves of
 * its incident edges; items likewise with beta and the item halves. Only
 * edges flagged in @p active (default: all) enter the mean; nodes with no
 * such edge are left as they are.
 */
[[nodiscard]] inline Matrix update_from_sep(const Matrix &nodes, const Matrix &edge_rows, const EdgeIndex &idx,
                                            double alpha_user, double beta_item,
                                            const std::vector<bool> *active = nullptr) {
    if (edge_rows.rows() != idx.size() || edge_rows.cols() != 2 * nodes.cols()) {
        fail(ErrorKind::numerical, "update_from_sep: edge table shape does not match the edge index");
    }
    Matrix out;
    detail::update_from_sep_into(nodes, edge_rows, Incidence(idx, active), idx.n_users, alpha_user, beta_item, out);
    return out;
}

/// Per-layer tables E^0..E^K and their row-wise mean.
struct EmbeddingState {
    std::vector<Matrix> layers;
    Matrix final_embeddings;
};

/**
 * @brief Linear propagation operator with its adjoint.
 *
 * Holds the fixed graph structures for one training run. `forward` maps the
 * trainable table E^0 to the averaged table E*; `backward` maps a gradient
 * with respect to E* back to E^0 by applying every step's transpose.
 */
class Propagator {
  public:
    Propagator(const ModelConfig &cfg, const BipartiteGraph &graph, const EdgeIndex &edges,
               const SepMatrix *normalized_sep)
        : cfg_(cfg), graph_(graph), edges_(edges), incidence_(edges), adj_t_(graph.adjacency.transposed()) {
        // the refresh averages over SEP-connected edges only, so an empty SEP
        // matrix leaves every node untouched
        cfg_.validate();
        if (edges.n_users != graph.n_users || edges.n_items != graph.n_items) {
            fail(ErrorKind::config, "edge index and graph disagree on node counts");
        }
        if (cfg_.sep_enabled && normalized_sep) {
            if (normalized_sep->normalization == SepNormalization::raw) {
                fail(ErrorKind::config, "propagation expects a normalised SEP matrix");
            }
            if (normalized_sep->n != edges.size()) {
                fail(ErrorKind::config, "SEP matrix covers " + std::to_string(normalized_sep->n) +
                                            " edges but the training set has " + std::to_string(edges.size()));
            }
            sep_ = normalized_sep->to_csr();
            sep_t_ = sep_->transposed();
            const std::vector<bool> active = sep_connected(*normalized_sep);
            incidence_ = Incidence(edges, &active);
        }
    }

    [[nodiscard]] const ModelConfig &config() const noexcept { return cfg_; }
    [[nodiscard]] std::size_t n_nodes() const noexcept { return graph_.n_nodes(); }
    [[nodiscard]] std::size_t n_users() const noexcept { return graph_.n_users; }

    [[nodiscard]] EmbeddingState forward(const Matrix &e0) const {
        if (e0.rows() != n_nodes() || e0.cols() != cfg_.dim) {
            fail(ErrorKind::config, "embedding table is " + std::to_string(e0.rows()) + "x" + std::to_string(e0.cols()) +
                                        ", model expects " + std::to_string(n_nodes()) + "x" + std::to_string(cfg_.dim));
        }
        EmbeddingState st;
        st.layers.reserve(cfg_.layers + 1);
        st.layers.push_back(e0);
        Matrix edge_rows;
        Matrix edge_prop;
        for (std::size_t k = 1; k <= cfg_.layers; ++k) {
            Matrix next;
            graph_.adjacency.multiply(st.layers.back(), next);
            check(next, k, "graph propagation");
            if (refreshes_at(k)) {
                edge_rows = edge_embed(next, edges_);
                sep_->multiply(edge_rows, edge_prop);
                check(edge_prop, k, "SEP propagation");
                Matrix refreshed;
                detail::update_from_sep_into(next, edge_prop, incidence_, graph_.n_users, cfg_.alpha_user,
                                             cfg_.beta_item, refreshed);
                check(refreshed, k, "SEP refresh");
                next = std::move(refreshed);
            }
            st.layers.push_back(std::move(next));
        }
        st.final_embeddings = Matrix(n_nodes(), cfg_.dim);
        const double inv = 1.0 / static_cast<double>(cfg_.layers + 1);
        auto out = st.final_embeddings.data();
        for (std::size_t p = 0; p < out.size(); ++p) {
            double acc = 0.0;
            for (const Matrix &layer : st.layers) {
                acc += layer.data()[p];
            }
            out[p] = acc * inv;
        }
        return st;
    }

    /// Gradient with respect to E^0 given the gradient with respect to E*.
    [[nodiscard]] Matrix backward(const Matrix &grad_final) const {
        const double inv = 1.0 / static_cast<double>(cfg_.layers + 1);
        Matrix adj(grad_final.rows(), grad_final.cols());
        for (std::size_t p = 0; p < adj.size(); ++p) {
            adj.data()[p] = grad_final.data()[p] * inv;
        }
        Matrix grad_prop;
        Matrix grad_edge_prop;
        Matrix grad_edge;
        Matrix below;
        for (std::size_t k = cfg_.layers; k >= 1; --k) {
            if (refreshes_at(k)) {
                refresh_adjoint(adj, grad_prop, grad_edge_prop);
                sep_t_->multiply(grad_edge_prop, grad_edge);
                gather_adjoint(grad_edge, grad_prop);
            } else {
                grad_prop = adj;
            }
            adj_t_.multiply(grad_prop, below);
            for (std::size_t p = 0; p < below.size(); ++p) {
                below.data()[p] += grad_final.data()[p] * inv;
            }
            adj = std::move(below);
            below = Matrix();
            check(adj, k, "backward");
        }
        return adj;
    }

  private:
    [[nodiscard]] bool refreshes_at(std::size_t k) const noexcept {
        return cfg_.sep_enabled && sep_.has_value() && (cfg_.sep_every_layer || k == 1);
    }

    static void check(const Matrix &m, std::size_t layer, const char *step) {
        if (!m.all_finite()) {
            fail(ErrorKind::numerical, "non-finite values after " + std::string(step) + " at layer " + std::to_string(layer));
        }
    }

    // adjoint of the refresh: split into the kept share and the edge-row share
    void refresh_adjoint(const Matrix &adj, Matrix &grad_prop, Matrix &grad_edge_prop) const {
        const std::size_t d = cfg_.dim;
        grad_prop = adj;
        grad_edge_prop = Matrix(edges_.size(), 2 * d);
        for (std::size_t v = 0; v < n_nodes(); ++v) {
            const auto inc = incidence_.of(v);
            if (inc.empty()) {
                continue;
            }
            const bool is_user = v < graph_.n_users;
            const double keep = is_user ? cfg_.alpha_user : cfg_.beta_item;
            const std::size_t seg = is_user ? 0 : d;
            const double share = (1.0 - keep) / static_cast<double>(inc.size());
            auto g = grad_prop.row(v);
            const auto a = adj.row(v);
            for (std::size_t c = 0; c < d; ++c) {
                g[c] = keep * a[c];
            }
            for (std::uint32_t e : inc) {
                auto dst = grad_edge_prop.row(e);
                for (std::size_t c = 0; c < d; ++c) {
                    dst[seg + c] = share * a[c];
                }
            }
        }
    }

    // adjoint of edge_embed: scatter-add edge halves back onto their nodes
    void gather_adjoint(const Matrix &grad_edge, Matrix &grad_prop) const {
        const std::size_t d = cfg_.dim;
        parallel_for(n_nodes(), [&](std::size_t v) {
            const std::size_t seg = v < graph_.n_users ? 0 : d;
            auto g = grad_prop.row(v);
            for (std::uint32_t e : incidence_.of(v)) {
                const auto src = grad_edge.row(e);
                for (std::size_t c = 0; c < d; ++c) {
                    g[c] += src[seg + c];
                }
            }
        });
    }

    ModelConfig cfg_;
    const BipartiteGraph &graph_;
    const EdgeIndex &edges_;
    Incidence incidence_;
    CsrMatrix adj_t_;
    std::optional<CsrMatrix> sep_;
    std::optional<CsrMatrix> sep_t_;
};

/// One-shot forward pass; `normalized_sep` may be null (plain graph model).
[[nodiscard]] inline EmbeddingState forward(const ModelConfig &cfg, const BipartiteGraph &graph,
                                            const SepMatrix *normalized_sep, const EdgeIndex &edges, const Matrix &e0) {
    return Propagator(cfg, graph, edges, normalized_sep).forward(e0);
}

/// Predicted preference of @p user for @p item: dot product of final rows.
[[nodiscard]] inline double score(const Matrix &final_embeddings, std::size_t n_users, std::size_t user, std::size_t item) {
    if (user >= n_users || n_users + item >= final_embeddings.rows()) {
        fail(ErrorKind::input, "score: user " + std::to_string(user) + " / item " + std::to_string(item) + " out of range");
    }
    const auto u = final_embeddings.row(user);
    const auto i = final_embeddings.row(n_users + item);
    double s = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        s += u[c] * i[c];
    }
    return s;
}

// --- SEPCKPT1 checkpoint -----------------------------------------------------
//
// bytes 0..7   "SEPCKPT1"
// u64 LE       length L of the config echo
// L bytes      config echo, "key=value\n" lines
// u64 LE       rows, u64 LE cols
// rows*cols    f64 LE, row-major E^0

struct Checkpoint {
    std::vector<std::pair<std::string, std::string>> echo;
    Matrix embeddings;

    [[nodiscard]] std::optional<std::string> get(const std::string &key) const {
        for (const auto &[k, v] : echo) {
            if (k == key) {
                return v;
            }
        }
        return std::nullopt;
    }
};

namespace detail {

inline void put_u64(std::ostream &os, std::uint64_t v) {
    char b[8];
    for (int k = 0; k < 8; ++k) {
        b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
    }
    os.write(b, 8);
}

inline std::uint64_t get_u64(std::istream &is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char *>(b), 8)) {
        fail(ErrorKind::input, "checkpoint: truncated file");
    }
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) {
        v = (v << 8) | b[k];
    }
    return v;
}

}  // namespace detail

inline void write_checkpoint(std::ostream &os, const Checkpoint &ck) {
    os.write("SEPCKPT1", 8);
    std::string echo;
    for (const auto &[k, v] : ck.echo) {
        echo += k + "=" + v + "\n";
    }
    detail::put_u64(os, echo.size());
    os.write(echo.data(), static_cast<std::streamsize>(echo.size()));
    detail::put_u64(os, ck.embeddings.rows());
    detail::put_u64(os, ck.embeddings.cols());
    for (double v : ck.embeddings.data()) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        detail::put_u64(os, bits);
    }
}

[[nodiscard]] inline Checkpoint read_checkpoint(std::istream &is) {
    char magic[8];
    if (!is.read(magic, 8) || std::string(magic, 8) != "SEPCKPT1") {
        fail(ErrorKind::input, "checkpoint: missing SEPCKPT1 header");
    }
    Checkpoint ck;
    const std::uint64_t len = detail::get_u64(is);
    if (len > (1U << 24)) {
        fail(ErrorKind::input, "checkpoint: implausible config echo length");
    }
    std::string echo(len, '\0');
    if (!is.read(echo.data(), static_cast<std::streamsize>(len))) {
        fail(ErrorKind::input, "checkpoint: truncated config echo");
    }
    std::istringstream es(echo);
    std::string line;
    while (std::getline(es, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            ck.echo.emplace_back(line.substr(0, eq), line.substr(eq + 1));
        }
    }
    const std::uint64_t rows = detail::get_u64(is);
    const std::uint64_t cols = detail::get_u64(is);
    if (rows * cols > (std::uint64_t{1} << 32)) {
        fail(ErrorKind::input, "checkpoint: implausible table shape");
    }
    ck.embeddings = Matrix(rows, cols);
    for (double &v : ck.embeddings.data()) {
        const std::uint64_t bits = detail::get_u64(is);
        std::memcpy(&v, &bits, sizeof v);
    }
    return ck;
}

}  // namespace sepgcn
