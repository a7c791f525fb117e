/**
 * @file
 * @brief BPR training of the initial embedding table with uniform negative
 *        sampling, exact gradients through the linear propagation, Adam/SGD
 *        updates and Recall@20-based early stopping.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/core.hpp"
#include "sepgcn/model.hpp"

#include <chrono>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace sepgcn {

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
    double lr = 0.001;
    double l2_lambda = 1e-5;
    std::size_t epochs_max = 400;
    std::size_t batch_size = 2048;
    std::size_t neg_per_pos = 1;
    std::size_t eval_every = 5;
    std::size_t patience = 10;  ///< evaluations without Recall@20 improvement
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 2024;
    bool deterministic = true;  ///< also zeroes the wall-clock log column

    void validate() const {
        if (!(lr > 0.0)) {
            fail(ErrorKind::config, "train.lr must be > 0");
        }
        if (l2_lambda < 0.0) {
            fail(ErrorKind::config, "train.l2_lambda must be >= 0");
        }
        if (batch_size == 0 || neg_per_pos == 0 || eval_every == 0) {
            fail(ErrorKind::config, "train.batch_size, train.neg_per_pos and train.eval_every must be >= 1");
        }
    }
};

struct BprTriple {
    std::uint32_t user;
    std::uint32_t pos;
    std::uint32_t neg;
};

using TripletBatch = std::vector<BprTriple>;

/**
 * @brief Draws (user, positive, negative) triples: a training interaction
 *        uniformly at random, then negatives uniformly over items with
 *        rejection of the user's training items.
 */
class TripletSampler {
  public:
    explicit TripletSampler(const Dataset &ds, std::size_t neg_per_pos = 1)
        : n_items_(ds.n_items()), neg_per_pos_(neg_per_pos), train_(ds.items_by_user(SplitTag::train)) {
        for (const Interaction &x : ds.interactions) {
            if (x.split != SplitTag::train) {
                continue;
            }
            if (train_[x.user].size() >= n_items_) {
                continue;
            }
            positives_.push_back({x.user, x.item});
        }
        for (const auto &items : train_) {
            skipped_users_ += !items.empty() && items.size() >= n_items_ ? 1 : 0;
        }
    }

    /// Users excluded because they interacted with every item.
    [[nodiscard]] std::size_t skipped_users() const noexcept { return skipped_users_; }
    [[nodiscard]] std::size_t positives() const noexcept { return positives_.size(); }

    [[nodiscard]] TripletBatch sample(std::size_t n_positive, Rng &rng) const {
        TripletBatch batch;
        if (positives_.empty()) {
            return batch;
        }
        batch.reserve(n_positive * neg_per_pos_);
        for (std::size_t s = 0; s < n_positive; ++s) {
            const auto [u, i] = positives_[uniform_index(rng, positives_.size())];
            const auto &seen = train_[u];
            for (std::size_t r = 0; r < neg_per_pos_; ++r) {
                std::uint32_t j = 0;
                do {
                    j = static_cast<std::uint32_t>(uniform_index(rng, n_items_));
                } while (std::binary_search(seen.begin(), seen.end(), j));
                batch.push_back({u, i, j});
            }
        }
        return batch;
    }

  private:
    std::size_t n_items_;
    std::size_t neg_per_pos_;
    std::vector<std::vector<std::uint32_t>> train_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> positives_;
    std::size_t skipped_users_ = 0;
};

/// ln(1 + e^x) without overflow.
[[nodiscard]] inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

/// 1 / (1 + e^-x) without overflow.
[[nodiscard]] inline double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Sum of -ln logistic(pos - neg) over the triples plus lambda * ||table||^2.
[[nodiscard]] inline double bpr_loss(std::span<const double> pos_scores, std::span<const double> neg_scores,
                                     const Matrix &table, double lambda) {
    if (pos_scores.size() != neg_scores.size()) {
        fail(ErrorKind::numerical, "bpr_loss: score lists differ in length");
    }
    double loss = 0.0;
    for (std::size_t t = 0; t < pos_scores.size(); ++t) {
        loss += softplus(neg_scores[t] - pos_scores[t]);
    }
    return loss + lambda * squared_norm(table);
}

struct LossAndGradient {
    double loss = 0.0;
    Matrix gradient;
};

/**
 * @brief BPR objective of a batch and its exact gradient with respect to
 *        the initial table.
 */
[[nodiscard]] inline LossAndGradient bpr_objective(const Propagator &prop, const Matrix &e0, const TripletBatch &batch,
                                                   double lambda) {
    const EmbeddingState st = prop.forward(e0);
    const Matrix &fin = st.final_embeddings;
    const std::size_t n_users = prop.n_users();
    const std::size_t d = fin.cols();
    Matrix grad_final(fin.rows(), d);
    std::vector<double> pos(batch.size());
    std::vector<double> neg(batch.size());
    for (std::size_t t = 0; t < batch.size(); ++t) {
        pos[t] = score(fin, n_users, batch[t].user, batch[t].pos);
        neg[t] = score(fin, n_users, batch[t].user, batch[t].neg);
    }
    for (std::size_t t = 0; t < batch.size(); ++t) {
        // d/dx softplus(-x) at x = pos - neg
        const double g = -logistic(neg[t] - pos[t]);
        const auto eu = fin.row(batch[t].user);
        const auto ei = fin.row(n_users + batch[t].pos);
        const auto ej = fin.row(n_users + batch[t].neg);
        auto gu = grad_final.row(batch[t].user);
        auto gi = grad_final.row(n_users + batch[t].pos);
        auto gj = grad_final.row(n_users + batch[t].neg);
        for (std::size_t c = 0; c < d; ++c) {
            gu[c] += g * (ei[c] - ej[c]);
            gi[c] += g * eu[c];
            gj[c] -= g * eu[c];
        }
    }
    LossAndGradient out;
    out.loss = bpr_loss(pos, neg, e0, lambda);
    out.gradient = prop.backward(grad_final);
    auto gdata = out.gradient.data();
    const auto w = e0.data();
    for (std::size_t p = 0; p < gdata.size(); ++p) {
        gdata[p] += 2.0 * lambda * w[p];
    }
    if (!out.gradient.all_finite()) {
        fail(ErrorKind::numerical, "non-finite gradient after the regulariser step");
    }
    return out;
}

/// Adam or plain SGD over a dense table.
class Optimizer {
  public:
    explicit Optimizer(const TrainConfig &cfg) : cfg_(cfg) {}

    void step(Matrix &params, const Matrix &grad) {
        auto p = params.data();
        const auto g = grad.data();
        if (cfg_.optimizer == OptimizerKind::sgd) {
            for (std::size_t k = 0; k < p.size(); ++k) {
                p[k] -= cfg_.lr * g[k];
            }
            return;
        }
        if (m_.size() != p.size()) {
            m_.assign(p.size(), 0.0);
            v_.assign(p.size(), 0.0);
            t_ = 0;
        }
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < p.size(); ++k) {
            m_[k] = cfg_.adam_beta1 * m_[k] + (1.0 - cfg_.adam_beta1) * g[k];
            v_[k] = cfg_.adam_beta2 * v_[k] + (1.0 - cfg_.adam_beta2) * g[k] * g[k];
            p[k] -= cfg_.lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + cfg_.adam_eps);
        }
    }

  private:
    TrainConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

/// One optimizer update from a batch; returns the batch objective.
inline double grad_step(Matrix &e0, const TripletBatch &batch, const Propagator &prop, const TrainConfig &cfg,
                        Optimizer &opt) {
    const LossAndGradient lg = bpr_objective(prop, e0, batch, cfg.l2_lambda);
    opt.step(e0, lg.gradient);
    return lg.loss;
}

struct EvalPoint {
    double recall20 = 0.0;
    double ndcg20 = 0.0;
};

using EvalHook = std::function<EvalPoint(const Matrix &final_embeddings)>;

struct LogRow {
    std::size_t epoch = 0;
    double loss = 0.0;  ///< mean batch objective over the epoch
    double recall20 = 0.0;
    double ndcg20 = 0.0;
    double wallclock_s = 0.0;
};

struct TrainResult {
    Matrix best_embeddings;  ///< E^0 of the best evaluated epoch (initial table if none)
    std::size_t best_epoch = 0;
    double best_recall20 = -1.0;
    std::size_t epochs_run = 0;
    std::vector<LogRow> log;
    std::string stop_reason = "epochs_max";
};

/**
 * @brief Train E^0 from @p init.
 *
 * Each epoch draws as many positives as there are training interactions,
 * in batches. Every `eval_every` epochs (and after the last one) the hook
 * is asked for Recall@20/NDCG@20; the best table by Recall@20 is retained
 * and training stops after `patience` evaluations without improvement. A
 * non-finite objective aborts training and returns the best table so far.
 */
[[nodiscard]] inline TrainResult train(const Dataset &ds, const Propagator &prop, const TrainConfig &cfg,
                                       const Matrix &init, const EvalHook &eval) {
    cfg.validate();
    TrainResult res;
    res.best_embeddings = init;
    if (cfg.epochs_max == 0) {
        res.stop_reason = "epochs_max";
        return res;
    }
    const TripletSampler sampler(ds, cfg.neg_per_pos);
    Rng rng(cfg.seed);
    Optimizer opt(cfg);
    Matrix e0 = init;
    const auto started = std::chrono::steady_clock::now();
    const std::size_t per_epoch = sampler.positives();
    const std::size_t batches = std::max<std::size_t>(1, (per_epoch + cfg.batch_size - 1) / cfg.batch_size);
    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs_max; ++epoch) {
        double total = 0.0;
        bool diverged = false;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t take = std::min(cfg.batch_size, per_epoch - b * cfg.batch_size);
            const TripletBatch batch = sampler.sample(take, rng);
            double loss = 0.0;
            try {
                loss = grad_step(e0, batch, prop, cfg, opt);
            } catch (const Error &err) {
                if (err.kind() != ErrorKind::numerical) {
                    throw;
                }
                loss = std::numeric_limits<double>::quiet_NaN();
            }
            if (!std::isfinite(loss)) {
                diverged = true;
                break;
            }
            total += loss;
        }
        res.epochs_run = epoch;
        if (diverged) {
            res.stop_reason = "diverged";
            break;
        }
        if (epoch % cfg.eval_every != 0 && epoch != cfg.epochs_max) {
            continue;
        }
        const EvalPoint ep = eval ? eval(prop.forward(e0).final_embeddings) : EvalPoint{};
        const double wall = cfg.deterministic
                                ? 0.0
                                : std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        res.log.push_back({epoch, total / static_cast<double>(batches), ep.recall20, ep.ndcg20, wall});
        if (ep.recall20 > res.best_recall20) {
            res.best_recall20 = ep.recall20;
            res.best_epoch = epoch;
            res.best_embeddings = e0;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            res.stop_reason = "early_stop";
            break;
        }
    }
    return res;
}

/// Tab-separated: epoch, loss, recall@20, ndcg@20, wallclock_s.
inline void write_train_log(std::ostream &os, const std::vector<LogRow> &log) {
    os << "epoch\tloss\trecall@20\tndcg@20\twallclock_s\n";
    for (const LogRow &r : log) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%zu\t%.10g\t%.6f\t%.6f\t%.3f\n", r.epoch, r.loss, r.recall20, r.ndcg20,
                      r.wallclock_s);
        os << buf;
    }
}

}  // namespace sepgcn
