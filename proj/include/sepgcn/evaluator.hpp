/**
 * @file
 * @brief Full-ranking top-k evaluation: Recall, Precision, NDCG and
 *        Accuracy (hit rate) at each cut-off, plus multi-run aggregation.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/core.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sepgcn {

struct TopK {
    std::vector<std::uint32_t> items;
    bool truncated = false;  ///< fewer than k candidates were available
};

/**
 * @brief Highest-scoring k items, excluding @p exclude (sorted ascending).
 *
 * Ties go to the lower item index.
 */
[[nodiscard]] inline TopK rank_topk(std::span<const double> scores, std::span<const std::uint32_t> exclude, std::size_t k) {
    TopK out;
    std::vector<std::uint32_t> cand;
    cand.reserve(scores.size());
    std::size_t ex = 0;
    for (std::uint32_t i = 0; i < scores.size(); ++i) {
        while (ex < exclude.size() && exclude[ex] < i) {
            ++ex;
        }
        if (ex < exclude.size() && exclude[ex] == i) {
            continue;
        }
        cand.push_back(i);
    }
    auto better = [&](std::uint32_t a, std::uint32_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; };
    const std::size_t take = std::min(k, cand.size());
    out.truncated = take < k;
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), better);
    cand.resize(take);
    out.items = std::move(cand);
    return out;
}

struct UserMetrics {
    double recall = 0.0;
    double precision = 0.0;
    double ndcg = 0.0;
    double accuracy = 0.0;  ///< 1 when the list holds at least one relevant item
};

/// Metrics of one ranked list against a non-empty sorted relevant set.
[[nodiscard]] inline UserMetrics user_metrics(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> relevant,
                                             std::size_t k) {
    UserMetrics m;
    double dcg = 0.0;
    std::size_t hits = 0;
    const std::size_t depth = std::min(k, ranked.size());
    for (std::size_t p = 0; p < depth; ++p) {
        if (std::binary_search(relevant.begin(), relevant.end(), ranked[p])) {
            ++hits;
            dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
        }
    }
    double idcg = 0.0;
    for (std::size_t p = 0; p < std::min(k, relevant.size()); ++p) {
        idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
    m.precision = static_cast<double>(hits) / static_cast<double>(k);
    m.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
    m.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
    m.accuracy = hits > 0 ? 1.0 : 0.0;
    return m;
}

struct MetricBlock {
    std::size_t k = 0;
    double recall = 0.0;
    double precision = 0.0;
    double ndcg = 0.0;
    double accuracy = 0.0;
};

struct MetricsReport {
    std::vector<MetricBlock> blocks;
    std::size_t n_evaluated = 0;
    std::size_t n_skipped = 0;  ///< users without test items
    std::vector<std::pair<std::string, std::string>> echo;
    std::vector<std::vector<UserMetrics>> per_user;  ///< [block][user], filled on request

    [[nodiscard]] const MetricBlock &at(std::size_t k) const {
        for (const MetricBlock &b : blocks) {
            if (b.k == k) {
                return b;
            }
        }
        fail(ErrorKind::config, "no metrics computed at k=" + std::to_string(k));
    }
};

/**
 * @brief Mean metrics over users with a non-empty test set.
 *
 * @p ranked holds each user's list (at least max(ks) long when enough
 * candidates exist); @p relevant each user's sorted test items.
 */
[[nodiscard]] inline MetricsReport metrics_at_k(const std::vector<std::vector<std::uint32_t>> &ranked,
                                               const std::vector<std::vector<std::uint32_t>> &relevant,
                                               const std::vector<std::size_t> &ks, bool keep_per_user = false) {
    MetricsReport r;
    r.blocks.resize(ks.size());
    if (keep_per_user) {
        r.per_user.resize(ks.size());
    }
    for (std::size_t b = 0; b < ks.size(); ++b) {
        if (ks[b] == 0) {
            fail(ErrorKind::config, "metric cut-off k must be >= 1");
        }
        r.blocks[b].k = ks[b];
    }
    for (std::size_t u = 0; u < relevant.size(); ++u) {
        if (relevant[u].empty()) {
            ++r.n_skipped;
            continue;
        }
        ++r.n_evaluated;
        for (std::size_t b = 0; b < ks.size(); ++b) {
            const UserMetrics m = user_metrics(ranked[u], relevant[u], ks[b]);
            r.blocks[b].recall += m.recall;
            r.blocks[b].precision += m.precision;
            r.blocks[b].ndcg += m.ndcg;
            r.blocks[b].accuracy += m.accuracy;
            if (keep_per_user) {
                r.per_user[b].push_back(m);
            }
        }
    }
    if (r.n_evaluated > 0) {
        const double n = static_cast<double>(r.n_evaluated);
        for (MetricBlock &blk : r.blocks) {
            blk.recall /= n;
            blk.precision /= n;
            blk.ndcg /= n;
            blk.accuracy /= n;
        }
    }
    return r;
}

/**
 * @brief Rank every non-train item for every user and score the lists
 *        against the held-out interactions.
 */
[[nodiscard]] inline MetricsReport evaluate(const Matrix &final_embeddings, const Dataset &ds,
                                           const std::vector<std::size_t> &ks) {
    const std::size_t n_users = ds.n_users();
    const std::size_t n_items = ds.n_items();
    if (final_embeddings.rows() != n_users + n_items) {
        fail(ErrorKind::config, "evaluate: embedding rows do not match the dataset");
    }
    const auto train = ds.items_by_user(SplitTag::train);
    const auto test = ds.items_by_user(SplitTag::test);
    const std::size_t depth = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());
    std::vector<std::vector<std::uint32_t>> ranked(n_users);
    const std::size_t d = final_embeddings.cols();
    parallel_for(n_users, [&](std::size_t u) {
        if (test[u].empty()) {
            return;
        }
        std::vector<double> scores(n_items);
        const auto eu = final_embeddings.row(u);
        for (std::size_t i = 0; i < n_items; ++i) {
            const auto ei = final_embeddings.row(n_users + i);
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                s += eu[c] * ei[c];
            }
            scores[i] = s;
        }
        ranked[u] = rank_topk(scores, train[u], depth).items;
    });
    return metrics_at_k(ranked, test, ks);
}

struct AggregateBlock {
    std::size_t k = 0;
    double recall_mean = 0.0, recall_std = 0.0;
    double precision_mean = 0.0, precision_std = 0.0;
    double ndcg_mean = 0.0, ndcg_std = 0.0;
    double accuracy_mean = 0.0, accuracy_std = 0.0;
};

struct AggregateReport {
    std::size_t runs = 0;
    std::vector<AggregateBlock> blocks;

    [[nodiscard]] const AggregateBlock &at(std::size_t k) const {
        for (const AggregateBlock &b : blocks) {
            if (b.k == k) {
                return b;
            }
        }
        fail(ErrorKind::config, "no aggregate at k=" + std::to_string(k));
    }
};

/// Mean and sample standard deviation of each metric across runs.
[[nodiscard]] inline AggregateReport multi_seed_report(const std::vector<MetricsReport> &runs) {
    if (runs.empty()) {
        fail(ErrorKind::config, "multi-run report needs at least one run");
    }
    AggregateReport agg;
    agg.runs = runs.size();
    const double n = static_cast<double>(runs.size());
    auto mean_std = [&](auto getter, std::size_t b, double &mean, double &sd) {
        mean = 0.0;
        for (const MetricsReport &r : runs) {
            mean += getter(r.blocks[b]);
        }
        mean /= n;
        double ss = 0.0;
        for (const MetricsReport &r : runs) {
            const double dv = getter(r.blocks[b]) - mean;
            ss += dv * dv;
        }
        sd = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    };
    for (std::size_t b = 0; b < runs.front().blocks.size(); ++b) {
        AggregateBlock blk;
        blk.k = runs.front().blocks[b].k;
        mean_std([](const MetricBlock &m) { return m.recall; }, b, blk.recall_mean, blk.recall_std);
        mean_std([](const MetricBlock &m) { return m.precision; }, b, blk.precision_mean, blk.precision_std);
        mean_std([](const MetricBlock &m) { return m.ndcg; }, b, blk.ndcg_mean, blk.ndcg_std);
        mean_std([](const MetricBlock &m) { return m.accuracy; }, b, blk.accuracy_mean, blk.accuracy_std);
        agg.blocks.push_back(blk);
    }
    return agg;
}

namespace detail {
inline std::string fixed(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}
}  // namespace detail

/// Tab-separated table: one row per cut-off.
inline void write_report_tsv(std::ostream &os, const MetricsReport &r) {
    for (const auto &[k, v] : r.echo) {
        os << "# " << k << ' ' << v << '\n';
    }
    os << "k\trecall\tprecision\tndcg\taccuracy\tusers\n";
    for (const MetricBlock &b : r.blocks) {
        os << b.k << '\t' << detail::fixed(b.recall) << '\t' << detail::fixed(b.precision) << '\t'
           << detail::fixed(b.ndcg) << '\t' << detail::fixed(b.accuracy) << '\t' << r.n_evaluated << '\n';
    }
}

/// Flat `key = value` text with the full-precision values.
inline void write_report_kv(std::ostream &os, const MetricsReport &r) {
    for (const auto &[k, v] : r.echo) {
        os << k << " = " << v << '\n';
    }
    os << "users.evaluated = " << r.n_evaluated << "\nusers.skipped = " << r.n_skipped << '\n';
    for (const MetricBlock &b : r.blocks) {
        const std::string p = "at" + std::to_string(b.k) + ".";
        os << p << "recall = " << format_double(b.recall) << '\n'
           << p << "precision = " << format_double(b.precision) << '\n'
           << p << "ndcg = " << format_double(b.ndcg) << '\n'
           << p << "accuracy = " << format_double(b.accuracy) << '\n';
    }
}

inline void write_aggregate_tsv(std::ostream &os, const AggregateReport &a) {
    os << "k\truns\trecall_mean\trecall_std\tprecision_mean\tprecision_std\tndcg_mean\tndcg_std\taccuracy_mean\taccuracy_std\n";
    for (const AggregateBlock &b : a.blocks) {
        os << b.k << '\t' << a.runs << '\t' << detail::fixed(b.recall_mean) << '\t' << detail::fixed(b.recall_std) << '\t'
           << detail::fixed(b.precision_mean) << '\t' << detail::fixed(b.precision_std) << '\t'
           << detail::fixed(b.ndcg_mean) << '\t' << detail::fixed(b.ndcg_std) << '\t' << detail::fixed(b.accuracy_mean)
           << '\t' << detail::fixed(b.accuracy_std) << '\n';
    }
}

}  // namespace sepgcn
