/**
 * @file
 * @brief Production code against the slow references on seeded instances.
 *        Each check returns its worst observed discrepancy.
 */

#pragma once

#include "sepgcn/evaluator.hpp"
#include "sepgcn/interaction_graph.hpp"
#include "sepgcn/model.hpp"
#include "sepgcn/oracle.hpp"
#include "sepgcn/sep_graph.hpp"
#include "sepgcn/synthetic.hpp"
#include "sepgcn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace sepgcn::oracle {

struct CheckResult {
    std::string name;
    double worst = 0.0;  ///< largest discrepancy seen
    double tolerance = 0.0;
    std::size_t cases = 0;
    std::string detail;

    [[nodiscard]] bool ok() const { return worst <= tolerance; }
};

/// Raw SEP matrix built by the production path for @p ds.
inline SepMatrix sep_for(const Dataset &ds, const SimilarityParams &sim, const PruningParams &pruning) {
    const EdgeIndex idx = build_edge_index(ds);
    return build_sep_matrix(idx, sim, compute_median_context(idx, sim), pruning);
}

/**
 * @brief Graph-only forward against a dense LightGCN in three settings:
 *        SEP disabled, alpha = beta = 1, and an empty SEP matrix.
 */
inline CheckResult check_lightgcn_reduction(std::uint64_t seed, std::size_t dim = 16, std::size_t layers = 3) {
    CheckResult res{"lightgcn reduction", 0.0, 1e-10, 0, ""};
    RandomGraphConfig rc;
    rc.n_records = 430;
    rc.train_ratio = 0.95;
    rc.seed = seed;
    const Dataset ds = random_dataset(rc);
    const EdgeIndex idx = build_edge_index(ds);
    const BipartiteGraph graph = build_adjacency(ds);
    ModelConfig cfg;
    cfg.dim = dim;
    cfg.layers = layers;
    cfg.seed = seed;
    const Matrix e0 = init_embeddings(graph.n_nodes(), cfg);
    const Dense expect = dense_lightgcn(dense_adjacency(ds), to_dense(e0), layers);

    SimilarityParams sim;
    PruningParams pruning;
    const SepMatrix full = normalize_sep(sep_for(ds, sim, pruning), SepNormalization::sym_degree);
    SepMatrix empty;
    empty.n = idx.size();
    empty.normalization = SepNormalization::sym_degree;

    ModelConfig off = cfg;
    off.sep_enabled = false;
    ModelConfig identity = cfg;
    identity.alpha_user = identity.beta_item = 1.0;
    const std::pair<const ModelConfig *, const SepMatrix *> settings[] = {{&off, &full}, {&identity, &full}, {&cfg, &empty}};
    for (const auto &[mc, sep] : settings) {
        res.worst = std::max(res.worst, max_abs_diff(expect, forward(*mc, graph, sep, idx, e0).final_embeddings));
        ++res.cases;
    }
    res.detail = std::to_string(ds.n_users()) + " users, " + std::to_string(ds.n_items()) + " items, " +
                 std::to_string(idx.size()) + " train edges, " + std::to_string(full.pair_count()) + " SEP pairs";
    return res;
}

/// Full SEP forward against the dense step-by-step reference.
inline CheckResult check_sep_forward(std::uint64_t seed, bool every_layer = true) {
    CheckResult res{"sep forward", 0.0, 1e-10, 0, ""};
    RandomGraphConfig rc;
    rc.seed = seed;
    const Dataset ds = random_dataset(rc);
    const EdgeIndex idx = build_edge_index(ds);
    const BipartiteGraph graph = build_adjacency(ds);
    SimilarityParams sim;
    PruningParams pruning;
    pruning.max_neighbors = 8;
    const SepMatrix raw = sep_for(ds, sim, pruning);
    ModelConfig cfg;
    cfg.dim = 8;
    cfg.layers = 3;
    cfg.alpha_user = 0.3;
    cfg.beta_item = 0.6;
    cfg.sep_every_layer = every_layer;
    cfg.seed = seed;
    const Matrix e0 = init_embeddings(graph.n_nodes(), cfg);
    for (SepNormalization norm : {SepNormalization::sym_degree, SepNormalization::row_unit}) {
        const SepMatrix x = normalize_sep(raw, norm);
        const Dense expect = dense_sep_forward(cfg, ds, idx, dense_normalized_sep(idx.size(), raw.entries, norm), to_dense(e0));
        res.worst = std::max(res.worst, max_abs_diff(expect, forward(cfg, graph, &x, idx, e0).final_embeddings));
        ++res.cases;
    }
    res.detail = std::to_string(raw.pair_count()) + " SEP pairs";
    return res;
}

/**
 * @brief Analytic BPR gradient against central differences.
 *
 * Relative error is |a - f| / max(|a|, |f|, floor) per coordinate.
 */
inline CheckResult check_gradient(std::uint64_t seed, std::size_t n_triples = 30, double h = 1e-5,
                                  double floor = 1e-6) {
    CheckResult res{"gradient", 0.0, 1e-4, 0, ""};
    RandomGraphConfig rc;
    rc.n_users = 20;
    rc.n_items = 20;
    rc.n_records = 90;
    rc.seed = seed;
    const Dataset ds = random_dataset(rc);
    const EdgeIndex idx = build_edge_index(ds);
    const BipartiteGraph graph = build_adjacency(ds);
    SimilarityParams sim;
    PruningParams pruning;
    const SepMatrix x = normalize_sep(sep_for(ds, sim, pruning), SepNormalization::sym_degree);
    ModelConfig cfg;
    cfg.dim = 4;
    cfg.layers = 3;
    cfg.alpha_user = 0.4;
    cfg.beta_item = 0.7;
    cfg.init_std = 0.5;
    cfg.seed = seed;
    const Propagator prop(cfg, graph, idx, &x);
    const Matrix e0 = init_embeddings(graph.n_nodes(), cfg);
    Rng rng(seed);
    const TripletBatch batch = TripletSampler(ds).sample(n_triples, rng);
    const double lambda = 1e-2;
    const Matrix analytic = bpr_objective(prop, e0, batch, lambda).gradient;
    const auto numeric = finite_difference(
        [&](const Matrix &e) {
            const Matrix fin = prop.forward(e).final_embeddings;
            double loss = 0.0;
            for (const BprTriple &t : batch) {
                double s = 0.0;
                for (std::size_t c = 0; c < cfg.dim; ++c) {
                    s += fin(t.user, c) * (fin(ds.n_users() + t.neg, c) - fin(ds.n_users() + t.pos, c));
                }
                loss += std::log1p(std::exp(s));
            }
            double reg = 0.0;
            for (double v : e.data()) {
                reg += v * v;
            }
            return loss + lambda * reg;
        },
        e0, h);
    for (std::size_t p = 0; p < numeric.size(); ++p) {
        const double a = analytic.data()[p];
        const double f = numeric[p];
        res.worst = std::max(res.worst, std::abs(a - f) / std::max({std::abs(a), std::abs(f), floor}));
    }
    res.cases = numeric.size();
    res.detail = std::to_string(numeric.size()) + " coordinates, " + std::to_string(x.pair_count()) + " SEP pairs";
    return res;
}

/**
 * @brief Optimised SEP construction against the double loop on random
 *        instances with varying variant, median mode, cap and self-loops.
 *
 * worst counts instances whose support differs, plus the largest value gap.
 */
inline CheckResult check_sep_builder(std::size_t instances, std::uint64_t seed, std::size_t max_edges = 500) {
    CheckResult res{"sep builder", 0.0, 1e-12, 0, ""};
    Rng rng(seed);
    std::size_t total_pairs = 0;
    for (std::size_t t = 0; t < instances; ++t) {
        RandomGraphConfig rc;
        rc.n_users = 20 + uniform_index(rng, 60);
        rc.n_items = 20 + uniform_index(rng, 100);
        rc.n_records = std::max(rc.n_users, rc.n_items) + uniform_index(rng, max_edges * 12 / 10 - 120);
        rc.box_km = 1.0 + 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        rc.n_hours = 2 + static_cast<int>(uniform_index(rng, 10));
        rc.train_ratio = 0.99;
        rc.seed = seed * 1000 + t;
        const Dataset ds = random_dataset(rc);
        const EdgeIndex idx = build_edge_index(ds);
        if (idx.size() > max_edges) {
            fail(ErrorKind::config, "oracle instance exceeds the edge limit");
        }
        SimilarityParams sim;
        sim.alpha_sim = t % 3 == 0 ? 0.3 : 0.5;
        sim.median_mode = t % 4 == 1 ? MedianMode::per_user : MedianMode::global;
        sim.seed = rc.seed;
        PruningParams pruning;
        pruning.sigma_floor = t % 2 == 0 ? 0.01 : 0.1;
        pruning.max_neighbors = t % 5 == 2 ? 0 : 4 + uniform_index(rng, 30);
        pruning.self_loops = t % 7 == 3;
        const SepVariant variant = t % 6 == 4 ? SepVariant::spatial_only
                                   : t % 6 == 5 ? SepVariant::temporal_only
                                                : SepVariant::spatio_temporal;
        const MedianContext med = compute_median_context(idx, sim);
        const SepMatrix fast = build_sep_matrix(idx, sim, med, pruning, variant);
        const std::vector<Triplet> slow = brute_force_sep(idx, sim, med, pruning, variant);
        ++res.cases;
        total_pairs += fast.pair_count();
        if (fast.entries.size() != slow.size()) {
            res.worst = std::max(res.worst, 1.0);
            res.detail += " instance " + std::to_string(t) + ": nnz " + std::to_string(fast.entries.size()) + " vs " +
                          std::to_string(slow.size()) + ";";
            continue;
        }
        for (std::size_t k = 0; k < slow.size(); ++k) {
            const Triplet &a = fast.entries[k];
            const Triplet &b = slow[k];
            if (a.row != b.row || a.col != b.col) {
                res.worst = std::max(res.worst, 1.0);
                res.detail += " instance " + std::to_string(t) + ": support differs;";
                break;
            }
            res.worst = std::max(res.worst, std::abs(a.value - b.value));
        }
    }
    if (res.detail.empty()) {
        res.detail = std::to_string(total_pairs) + " pairs compared";
    }
    return res;
}

/// Library metrics against literal loops on random score vectors.
inline CheckResult check_metrics(std::size_t cases, std::uint64_t seed) {
    CheckResult res{"metrics", 0.0, 1e-12, cases, ""};
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t n_items = 5 + uniform_index(rng, 200);
        std::vector<double> scores(n_items);
        for (double &s : scores) {
            // coarse grid so ties occur
            s = std::round(normal(rng) * 4.0) / 4.0;
        }
        std::set<std::uint32_t> train, test;
        for (std::size_t k = 0; k < 1 + uniform_index(rng, n_items / 3); ++k) {
            train.insert(static_cast<std::uint32_t>(uniform_index(rng, n_items)));
        }
        for (std::size_t k = 0; k < 1 + uniform_index(rng, 30); ++k) {
            const auto i = static_cast<std::uint32_t>(uniform_index(rng, n_items));
            if (!train.count(i)) {
                test.insert(i);
            }
        }
        if (test.empty()) {
            continue;
        }
        const std::vector<std::uint32_t> excl(train.begin(), train.end());
        const std::vector<std::uint32_t> rel(test.begin(), test.end());
        const std::vector<std::uint32_t> ranked = rank_topk(scores, excl, 20).items;
        if (ranked != literal_topk(scores, train, 20)) {
            res.worst = std::max(res.worst, 1.0);
            res.detail = "ranking differs in case " + std::to_string(c);
        }
        for (std::size_t k : {5, 20}) {
            const UserMetrics m = user_metrics(ranked, rel, k);
            const LiteralMetrics l = literal_metrics(ranked, rel, k);
            res.worst = std::max({res.worst, std::abs(m.recall - l.recall), std::abs(m.precision - l.precision),
                                  std::abs(m.ndcg - l.ndcg), std::abs(m.accuracy - l.accuracy)});
        }
    }
    return res;
}

/// Queue-based k-core against repeated full passes.
inline CheckResult check_kcore(std::uint64_t seed) {
    CheckResult res{"kcore", 0.0, 0.0, 0, ""};
    for (std::size_t k : {2, 3, 5}) {
        SynthConfig sc;
        sc.n_users = 300;
        sc.n_items = 300;
        sc.n_checkins = 6000;
        sc.n_regions = 20;
        sc.seed = seed + k;
        const auto raw = generate_city(sc);
        const auto fast = kcore_filter(raw, k);
        const auto slow = brute_kcore(raw, k);
        bool same = fast.size() == slow.size();
        for (std::size_t r = 0; same && r < fast.size(); ++r) {
            same = fast[r].user_id == slow[r].user_id && fast[r].item_id == slow[r].item_id;
        }
        res.worst = std::max(res.worst, same ? 0.0 : 1.0);
        ++res.cases;
    }
    return res;
}

/// Every check with its default size; returns false if any failed.
inline bool run_all(std::ostream &os, std::uint64_t seed = 2024) {
    const std::vector<CheckResult> results = {
        check_lightgcn_reduction(seed), check_sep_forward(seed, true), check_sep_forward(seed, false),
        check_gradient(seed),           check_sep_builder(20, seed),   check_metrics(1000, seed),
        check_kcore(seed)};
    bool all = true;
    for (const CheckResult &r : results) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3g (tol %.0e)", r.worst, r.tolerance);
        os << (r.ok() ? "PASS " : "FAIL ") << r.name << ": worst " << buf << ", " << r.cases << " cases";
        if (!r.detail.empty()) {
            os << " [" << r.detail << ']';
        }
        os << '\n';
        all = all && r.ok();
    }
    return all;
}

}  // namespace sepgcn::oracle
