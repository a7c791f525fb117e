#include "sepgcn/evaluator.hpp"
#include "sepgcn/oracle_suite.hpp"
#include "sepgcn/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace sepgcn;

namespace {

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

/// Graph-only propagation over a dataset; keeps its structures alive.
struct Model {
    EdgeIndex idx;
    BipartiteGraph graph;
    std::unique_ptr<Propagator> prop;

    Model(const Dataset &ds, ModelConfig cfg) : idx(build_edge_index(ds)), graph(build_adjacency(ds)) {
        cfg.sep_enabled = false;
        prop = std::make_unique<Propagator>(cfg, graph, idx, nullptr);
    }
};

Dataset small_city() {
    SynthConfig sc;
    sc.n_users = 150;
    sc.n_items = 200;
    sc.n_checkins = 4000;
    sc.n_regions = 12;
    return build_dataset(generate_city(sc), SplitConfig{});
}

}  // namespace

TEST(Sampler, NegativeIsForcedWhenOneCandidateRemains) {
    const Dataset ds = edges_only(1, 2, {{0, 0}});
    const TripletSampler s(ds);
    Rng rng(1);
    for (const BprTriple &t : s.sample(200, rng)) {
        EXPECT_EQ(t.user, 0U);
        EXPECT_EQ(t.pos, 0U);
        EXPECT_EQ(t.neg, 1U);
    }
}

TEST(Sampler, UsersWhoSawEverythingAreSkipped) {
    const Dataset ds = edges_only(2, 2, {{0, 0}, {0, 1}, {1, 0}});
    const TripletSampler s(ds);
    EXPECT_EQ(s.skipped_users(), 1U);
    EXPECT_EQ(s.positives(), 1U);
}

TEST(Sampler, SameSeedSameBatch) {
    const Dataset ds = small_city();
    const TripletSampler s(ds, 2);
    Rng a(5), b(5);
    const TripletBatch x = s.sample(300, a), y = s.sample(300, b);
    ASSERT_EQ(x.size(), 600U);
    for (std::size_t k = 0; k < x.size(); ++k) {
        EXPECT_EQ(x[k].user, y[k].user);
        EXPECT_EQ(x[k].pos, y[k].pos);
        EXPECT_EQ(x[k].neg, y[k].neg);
    }
}

TEST(Sampler, NegativesNeverSeenAndUniform) {
    const Dataset ds = edges_only(1, 11, {{0, 3}});
    const TripletSampler s(ds);
    Rng rng(9);
    std::map<std::uint32_t, std::size_t> freq;
    const std::size_t n = 100000;
    for (const BprTriple &t : s.sample(n, rng)) {
        ASSERT_NE(t.neg, 3U);
        ++freq[t.neg];
    }
    EXPECT_EQ(freq.size(), 10U);
    for (const auto &[item, c] : freq) {
        EXPECT_NEAR(static_cast<double>(c) / n, 0.1, 0.006) << item;
    }
}

TEST(BprLoss, EqualScoresGiveLnTwo) {
    const std::vector<double> pos{0.0}, neg{0.0};
    EXPECT_NEAR(bpr_loss(pos, neg, Matrix(), 0.0), std::log(2.0), 1e-15);
}

TEST(BprLoss, LimitsAndRegulariser) {
    const std::vector<double> big{50.0}, zero{0.0};
    EXPECT_LT(bpr_loss(big, zero, Matrix(), 0.0), 1e-20);
    EXPECT_NEAR(bpr_loss(zero, big, Matrix(), 0.0), 50.0, 1e-15);
    const std::vector<double> huge{1e6};
    EXPECT_TRUE(std::isfinite(bpr_loss(zero, huge, Matrix(), 0.0)));
    Matrix t(1, 2);
    t(0, 0) = 3;
    t(0, 1) = 4;
    EXPECT_NEAR(bpr_loss(zero, zero, t, 0.1), std::log(2.0) + 2.5, 1e-15);
}

TEST(BprObjective, ClosedFormForOneDimensionOneLayer) {
    // one user, item 0 seen, item 1 unseen: E* = (E + A E) / 2
    const Dataset ds = edges_only(1, 2, {{0, 0}});
    ModelConfig mc;
    mc.dim = 1;
    mc.layers = 1;
    const Model m(ds, mc);
    Matrix e0(3, 1);
    const double u = 0.4, i0 = -0.3, i1 = 0.9, lambda = 0.05;
    e0(0, 0) = u;
    e0(1, 0) = i0;
    e0(2, 0) = i1;
    const LossAndGradient lg = bpr_objective(*m.prop, e0, {{0, 0, 1}}, lambda);
    const double pos = (u + i0) / 2 * (u + i0) / 2;
    const double neg = (u + i0) / 2 * i1 / 2;
    const double g = -1.0 / (1.0 + std::exp(pos - neg));
    EXPECT_NEAR(lg.loss, std::log1p(std::exp(neg - pos)) + lambda * (u * u + i0 * i0 + i1 * i1), 1e-14);
    EXPECT_NEAR(lg.gradient(0, 0), g * ((u + i0) / 2 - i1 / 4) + 2 * lambda * u, 1e-14);
    EXPECT_NEAR(lg.gradient(1, 0), g * ((u + i0) / 2 - i1 / 4) + 2 * lambda * i0, 1e-14);
    EXPECT_NEAR(lg.gradient(2, 0), -g * (u + i0) / 4 + 2 * lambda * i1, 1e-14);
}

TEST(BprObjective, MatchesFiniteDifferencesWithSep) {
    const auto r = oracle::check_gradient(21);
    EXPECT_TRUE(r.ok()) << r.worst << " " << r.detail;
}

TEST(BprObjective, SmallStepDescends) {
    const Dataset ds = small_city();
    ModelConfig mc;
    mc.dim = 8;
    const Model m(ds, mc);
    const Matrix e0 = init_embeddings(m.graph.n_nodes(), mc);
    Rng rng(2);
    const TripletBatch batch = TripletSampler(ds).sample(256, rng);
    const LossAndGradient lg = bpr_objective(*m.prop, e0, batch, 1e-4);
    Matrix moved = e0;
    for (std::size_t p = 0; p < moved.size(); ++p) {
        moved.data()[p] -= 1e-3 * lg.gradient.data()[p];
    }
    EXPECT_LT(bpr_objective(*m.prop, moved, batch, 1e-4).loss, lg.loss);
}

TEST(Optimizer, RegulariserOnlyShrinksGeometrically) {
    const Dataset ds = edges_only(1, 2, {{0, 0}});
    ModelConfig mc;
    mc.dim = 3;
    const Model m(ds, mc);
    TrainConfig tc;
    tc.optimizer = OptimizerKind::sgd;
    tc.lr = 0.1;
    tc.l2_lambda = 0.5;
    Optimizer opt(tc);
    Matrix e0 = init_embeddings(3, mc);
    const Matrix before = e0;
    (void)grad_step(e0, {}, *m.prop, tc, opt);
    for (std::size_t p = 0; p < e0.size(); ++p) {
        EXPECT_NEAR(e0.data()[p], before.data()[p] * (1.0 - 2 * 0.5 * 0.1), 1e-15);
    }
}

TEST(Optimizer, AdamFirstStepHasLearningRateMagnitude) {
    TrainConfig tc;
    tc.lr = 0.01;
    Optimizer opt(tc);
    Matrix p(1, 3), g(1, 3);
    g(0, 0) = 5;
    g(0, 1) = -0.001;
    opt.step(p, g);
    EXPECT_NEAR(p(0, 0), -0.01, 1e-9);
    EXPECT_NEAR(p(0, 1), 0.01, 1e-5);
    EXPECT_EQ(p(0, 2), 0.0);
}

TEST(Train, ZeroEpochsReturnsInitialTable) {
    const Dataset ds = small_city();
    ModelConfig mc;
    mc.dim = 4;
    const Model m(ds, mc);
    TrainConfig tc;
    tc.epochs_max = 0;
    const Matrix init = init_embeddings(m.graph.n_nodes(), mc);
    const TrainResult r = train(ds, *m.prop, tc, init, nullptr);
    EXPECT_TRUE(r.best_embeddings == init);
    EXPECT_TRUE(r.log.empty());
    EXPECT_EQ(r.epochs_run, 0U);
}

TEST(Train, LearnsAndIsDeterministic) {
    const Dataset ds = small_city();
    ModelConfig mc;
    mc.dim = 16;
    const Model m(ds, mc);
    TrainConfig tc;
    tc.lr = 0.01;
    tc.epochs_max = 30;
    tc.batch_size = 512;
    tc.patience = 100;
    auto hook = [&](const Matrix &fin) {
        const MetricsReport r = evaluate(fin, ds, {20});
        return EvalPoint{r.at(20).recall, r.at(20).ndcg};
    };
    const Matrix init = init_embeddings(m.graph.n_nodes(), mc);
    const double before = hook(m.prop->forward(init).final_embeddings).recall20;
    const TrainResult a = train(ds, *m.prop, tc, init, hook);
    const TrainResult b = train(ds, *m.prop, tc, init, hook);
    ASSERT_EQ(a.log.size(), 6U);
    EXPECT_LT(a.log.back().loss, a.log.front().loss);
    EXPECT_GT(a.best_recall20, before + 0.05);
    std::ostringstream la, lb;
    write_train_log(la, a.log);
    write_train_log(lb, b.log);
    EXPECT_EQ(la.str(), lb.str());
    EXPECT_TRUE(a.best_embeddings == b.best_embeddings);
    EXPECT_EQ(la.str().substr(0, la.str().find('\n')), "epoch\tloss\trecall@20\tndcg@20\twallclock_s");
}

TEST(Train, EarlyStopAfterPatienceStaleEvaluations) {
    const Dataset ds = small_city();
    ModelConfig mc;
    mc.dim = 4;
    const Model m(ds, mc);
    TrainConfig tc;
    tc.epochs_max = 100;
    tc.eval_every = 2;
    tc.patience = 3;
    std::vector<double> script{0.1, 0.3, 0.2, 0.3, 0.25, 0.9};
    std::size_t calls = 0;
    auto hook = [&](const Matrix &) { return EvalPoint{script[std::min(calls++, script.size() - 1)], 0.0}; };
    const TrainResult r = train(ds, *m.prop, tc, init_embeddings(m.graph.n_nodes(), mc), hook);
    EXPECT_EQ(r.stop_reason, "early_stop");
    EXPECT_EQ(r.best_epoch, 4U);
    EXPECT_DOUBLE_EQ(r.best_recall20, 0.3);
    EXPECT_EQ(r.epochs_run, 10U);
    ASSERT_EQ(r.log.size(), 5U);
    double running = -1.0;
    for (const LogRow &row : r.log) {
        running = std::max(running, row.recall20);
    }
    EXPECT_DOUBLE_EQ(running, r.best_recall20);
}

TEST(Train, NonFiniteObjectiveStopsWithBestSoFar) {
    const Dataset ds = edges_only(2, 3, {{0, 0}, {1, 1}});
    ModelConfig mc;
    mc.dim = 2;
    const Model m(ds, mc);
    Matrix init(m.graph.n_nodes(), 2, 1e160);
    TrainConfig tc;
    tc.epochs_max = 5;
    const TrainResult r = train(ds, *m.prop, tc, init, nullptr);
    EXPECT_EQ(r.stop_reason, "diverged");
    EXPECT_EQ(r.epochs_run, 1U);
    EXPECT_TRUE(r.best_embeddings == init);
}

TEST(Train, InvalidConfigRejected) {
    TrainConfig tc;
    tc.lr = 0.0;
    EXPECT_THROW(tc.validate(), Error);
    tc = TrainConfig{};
    tc.batch_size = 0;
    EXPECT_THROW(tc.validate(), Error);
}
