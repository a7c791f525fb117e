/**
 * @file
 * @brief Slow reference implementations used to cross-check the optimised
 *        code: dense matrices, double loops and literal metric definitions.
 *
 * Nothing here shares arithmetic kernels with the production path.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/core.hpp"
#include "sepgcn/geo_temporal.hpp"
#include "sepgcn/model.hpp"
#include "sepgcn/sep_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <vector>

namespace sepgcn::oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense matmul(const Dense &a, const Dense &b) {
    const std::size_t n = a.size();
    const std::size_t m = b.empty() ? 0 : b[0].size();
    Dense out = zeros(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (a[i][k] == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < m; ++j) {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return out;
}

inline Dense to_dense(const Matrix &m) {
    Dense out = zeros(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out[r][c] = m(r, c);
        }
    }
    return out;
}

inline double max_abs_diff(const Dense &a, const Matrix &b) {
    double worst = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t c = 0; c < a[r].size(); ++c) {
            worst = std::max(worst, std::abs(a[r][c] - b(r, c)));
        }
    }
    return worst;
}

// --- geometry ------------------------------------------------------------------

/// Great-circle distance, haversine form written out in degrees.
inline double reference_haversine_km(double lat1, double lon1, double lat2, double lon2, double r = 6371.0) {
    const double k = std::numbers::pi / 180.0;
    const double h = std::pow(std::sin((lat2 - lat1) * k / 2), 2) +
                     std::cos(lat1 * k) * std::cos(lat2 * k) * std::pow(std::sin((lon2 - lon1) * k / 2), 2);
    return 2.0 * r * std::asin(std::sqrt(std::min(1.0, h)));
}

/// Spherical law of cosines; loses precision below a few metres.
inline double law_of_cosines_km(double lat1, double lon1, double lat2, double lon2, double r = 6371.0) {
    const double k = std::numbers::pi / 180.0;
    const double c = std::sin(lat1 * k) * std::sin(lat2 * k) + std::cos(lat1 * k) * std::cos(lat2 * k) * std::cos((lon2 - lon1) * k);
    return r * std::acos(std::clamp(c, -1.0, 1.0));
}

// --- SEP matrix ------------------------------------------------------------------

/**
 * @brief Double loop over every edge pair: slot overlap, decay weight, floor,
 *        then a per-edge top-`max_neighbors` cap kept only when mutual.
 *
 * Returns the raw symmetric entries sorted by (row, col).
 */
inline std::vector<Triplet> brute_force_sep(const EdgeIndex &idx, const SimilarityParams &params,
                                            const MedianContext &medians, const PruningParams &pruning,
                                            SepVariant variant = SepVariant::spatio_temporal) {
    const std::size_t n = idx.size();
    std::vector<std::set<int>> slot_sets(n);
    for (std::size_t e = 0; e < n; ++e) {
        for (int s : idx.slots[e].slots()) {
            slot_sets[e].insert(s);
        }
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> weight;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (variant != SepVariant::spatial_only) {
                bool overlap = false;
                for (int s : slot_sets[i]) {
                    overlap = overlap || slot_sets[j].count(s) > 0;
                }
                if (!overlap) {
                    continue;
                }
            }
            const double d = reference_haversine_km(idx.points[i].lat, idx.points[i].lon, idx.points[j].lat,
                                                idx.points[j].lon, params.earth_radius_km);
            const double med = medians.per_edge_km.empty() ? medians.global_km
                                                           : (medians.per_edge_km[i] + medians.per_edge_km[j]) / 2.0;
            const double s = std::pow(params.alpha_sim, d / med);
            if (variant == SepVariant::temporal_only) {
                weight[{i, j}] = 1.0;
            } else if (s >= pruning.sigma_floor) {
                weight[{i, j}] = std::exp((d / med) * std::log(params.alpha_sim));
            }
        }
    }
    std::set<std::pair<std::uint32_t, std::uint32_t>> chosen;
    for (std::uint32_t e = 0; e < n; ++e) {
        std::vector<std::pair<double, std::uint32_t>> nb;
        for (const auto &[key, w] : weight) {
            if (key.first == e) nb.push_back({w, key.second});
            if (key.second == e) nb.push_back({w, key.first});
        }
        std::sort(nb.begin(), nb.end(), [](const auto &a, const auto &b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        const std::size_t keep = pruning.max_neighbors == 0 ? nb.size() : std::min(nb.size(), pruning.max_neighbors);
        for (std::size_t t = 0; t < keep; ++t) {
            chosen.insert({e, nb[t].second});
        }
    }
    std::vector<Triplet> out;
    for (const auto &[key, w] : weight) {
        if (chosen.count(key) && chosen.count({key.second, key.first})) {
            out.push_back({key.first, key.second, w});
            out.push_back({key.second, key.first, w});
        }
    }
    if (pruning.self_loops) {
        for (std::uint32_t e = 0; e < n; ++e) {
            out.push_back({e, e, 1.0});
        }
    }
    std::sort(out.begin(), out.end(), [](const Triplet &a, const Triplet &b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    return out;
}

/// Dense n x n normalised SEP matrix.
inline Dense dense_normalized_sep(std::size_t n, const std::vector<Triplet> &raw, SepNormalization method) {
    Dense x = zeros(n, n);
    for (const Triplet &t : raw) {
        x[t.row][t.col] += t.value;
    }
    Dense out = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg_i = 0.0, norm_i = 0.0;
        for (double v : x[i]) {
            deg_i += v;
            norm_i += v * v;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (x[i][j] == 0.0) {
                continue;
            }
            if (method == SepNormalization::sym_degree) {
                double deg_j = 0.0;
                for (double v : x[j]) {
                    deg_j += v;
                }
                out[i][j] = x[i][j] / std::sqrt(deg_i) / std::sqrt(deg_j);
            } else if (method == SepNormalization::row_unit) {
                out[i][j] = x[i][j] / std::sqrt(norm_i);
            } else {
                out[i][j] = x[i][j];
            }
        }
    }
    return out;
}

// --- graph propagation ---------------------------------------------------------------

/// Dense symmetric-normalised bipartite adjacency over train interactions.
inline Dense dense_adjacency(const Dataset &ds) {
    const std::size_t nu = ds.n_users();
    const std::size_t n = nu + ds.n_items();
    Dense a = zeros(n, n);
    for (const Interaction &x : ds.interactions) {
        if (x.split == SplitTag::train) {
            a[x.user][nu + x.item] = 1.0;
            a[nu + x.item][x.user] = 1.0;
        }
    }
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : a[i]) {
            deg[i] += v;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (a[i][j] != 0.0) {
                a[i][j] /= std::sqrt(deg[i] * deg[j]);
            }
        }
    }
    return a;
}

/// Mean of E^0..E^K with E^k = A E^{k-1}.
inline Dense dense_lightgcn(const Dense &a, const Dense &e0, std::size_t layers) {
    Dense cur = e0;
    Dense sum = e0;
    for (std::size_t k = 1; k <= layers; ++k) {
        cur = matmul(a, cur);
        for (std::size_t r = 0; r < sum.size(); ++r) {
            for (std::size_t c = 0; c < sum[r].size(); ++c) {
                sum[r][c] += cur[r][c];
            }
        }
    }
    for (auto &row : sum) {
        for (double &v : row) {
            v /= static_cast<double>(layers + 1);
        }
    }
    return sum;
}

/**
 * @brief Dense SEP-augmented forward pass written out step by step.
 *
 * Each layer: graph step, then (when refreshing) build the edge table of
 * concatenated endpoint rows, multiply by the normalised SEP matrix and
 * blend every node with the mean of its half over SEP-linked incident edges.
 */
inline Dense dense_sep_forward(const ModelConfig &cfg, const Dataset &ds, const EdgeIndex &idx, const Dense &x,
                               const Dense &e0) {
    const Dense a = dense_adjacency(ds);
    const std::size_t nu = ds.n_users();
    const std::size_t d = cfg.dim;
    const std::size_t m = idx.size();
    Dense cur = e0;
    Dense sum = e0;
    for (std::size_t k = 1; k <= cfg.layers; ++k) {
        Dense next = matmul(a, cur);
        const bool refresh = cfg.sep_enabled && !x.empty() && (cfg.sep_every_layer || k == 1);
        if (refresh) {
            Dense s = zeros(m, 2 * d);
            for (std::size_t e = 0; e < m; ++e) {
                for (std::size_t c = 0; c < d; ++c) {
                    s[e][c] = next[idx.users[e]][c];
                    s[e][d + c] = next[nu + idx.items[e]][c];
                }
            }
            const Dense sp = matmul(x, s);
            Dense updated = next;
            for (std::size_t v = 0; v < next.size(); ++v) {
                const bool is_user = v < nu;
                std::vector<std::size_t> linked;
                for (std::size_t e = 0; e < m; ++e) {
                    const bool touches = is_user ? idx.users[e] == v : nu + idx.items[e] == v;
                    bool has_neighbour = false;
                    for (double w : x[e]) {
                        has_neighbour = has_neighbour || w != 0.0;
                    }
                    if (touches && has_neighbour) {
                        linked.push_back(e);
                    }
                }
                if (linked.empty()) {
                    continue;
                }
                const double keep = is_user ? cfg.alpha_user : cfg.beta_item;
                for (std::size_t c = 0; c < d; ++c) {
                    double mean = 0.0;
                    for (std::size_t e : linked) {
                        mean += sp[e][(is_user ? 0 : d) + c];
                    }
                    mean /= static_cast<double>(linked.size());
                    updated[v][c] = keep * next[v][c] + (1.0 - keep) * mean;
                }
            }
            next = updated;
        }
        for (std::size_t r = 0; r < sum.size(); ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                sum[r][c] += next[r][c];
            }
        }
        cur = next;
    }
    for (auto &row : sum) {
        for (double &v : row) {
            v /= static_cast<double>(cfg.layers + 1);
        }
    }
    return sum;
}

// --- gradients -------------------------------------------------------------------------

/// Central differences of @p f at @p x, one coordinate at a time.
inline std::vector<double> finite_difference(const std::function<double(const Matrix &)> &f, const Matrix &x,
                                             double h = 1e-5) {
    std::vector<double> g(x.size());
    Matrix probe = x;
    for (std::size_t p = 0; p < x.size(); ++p) {
        const double orig = probe.data()[p];
        probe.data()[p] = orig + h;
        const double up = f(probe);
        probe.data()[p] = orig - h;
        const double down = f(probe);
        probe.data()[p] = orig;
        g[p] = (up - down) / (2.0 * h);
    }
    return g;
}

// --- metrics ---------------------------------------------------------------------------

struct LiteralMetrics {
    double recall, precision, ndcg, accuracy;
};

/// Metric definitions evaluated literally on the first k entries of @p ranked.
inline LiteralMetrics literal_metrics(const std::vector<std::uint32_t> &ranked, const std::vector<std::uint32_t> &relevant,
                                      std::size_t k) {
    const std::set<std::uint32_t> rel(relevant.begin(), relevant.end());
    double hits = 0, dcg = 0, idcg = 0;
    for (std::size_t p = 1; p <= k && p <= ranked.size(); ++p) {
        if (rel.count(ranked[p - 1])) {
            hits += 1;
            dcg += 1.0 / std::log2(static_cast<double>(p) + 1.0);
        }
    }
    for (std::size_t p = 1; p <= std::min(k, rel.size()); ++p) {
        idcg += 1.0 / std::log2(static_cast<double>(p) + 1.0);
    }
    return {hits / static_cast<double>(rel.size()), hits / static_cast<double>(k), dcg / idcg, hits >= 1 ? 1.0 : 0.0};
}

/// Top-k by sorting every candidate index (ties broken by lower index).
inline std::vector<std::uint32_t> literal_topk(const std::vector<double> &scores, const std::set<std::uint32_t> &exclude,
                                               std::size_t k) {
    std::vector<std::uint32_t> all;
    for (std::uint32_t i = 0; i < scores.size(); ++i) {
        if (!exclude.count(i)) {
            all.push_back(i);
        }
    }
    std::stable_sort(all.begin(), all.end(), [&](std::uint32_t a, std::uint32_t b) { return scores[a] > scores[b]; });
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

// --- k-core ------------------------------------------------------------------------------

/// Repeatedly drop every record whose user or item has fewer than k distinct partners.
inline std::vector<CheckinRecord> brute_kcore(std::vector<CheckinRecord> records, std::size_t k) {
    while (true) {
        std::map<std::string, std::set<std::string>> user_items, item_users;
        for (const CheckinRecord &r : records) {
            user_items[r.user_id].insert(r.item_id);
            item_users[r.item_id].insert(r.user_id);
        }
        std::vector<CheckinRecord> kept;
        for (const CheckinRecord &r : records) {
            if (user_items[r.user_id].size() >= k && item_users[r.item_id].size() >= k) {
                kept.push_back(r);
            }
        }
        if (kept.size() == records.size()) {
            return kept;
        }
        records = std::move(kept);
    }
}

}  // namespace sepgcn::oracle
