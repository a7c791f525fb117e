#include "sepgcn/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace sepgcn;

namespace {

RunConfig from_text(const std::string &text) {
    std::istringstream in(text);
    RunConfig cfg;
    cfg.apply(KeyValues::parse(in));
    return cfg;
}

ErrorKind kind_of(const std::string &text) {
    try {
        (void)from_text(text);
    } catch (const Error &e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for: " << text;
    return ErrorKind::input;
}

}  // namespace

TEST(Config, ParsesCommentsAndSections) {
    const RunConfig cfg = from_text(
        "# run\n"
        "run.variant = lightgcn   # trailing comment\n"
        "\n"
        "model.dim = 32\n"
        "model.layers=2\n"
        "train.optimizer = sgd\n"
        "eval.ks = 1, 10,50\n"
        "data.delimiter = comma\n"
        "data.col.zone = 5\n");
    EXPECT_EQ(cfg.variant, Variant::lightgcn);
    EXPECT_FALSE(cfg.model.sep_enabled);
    EXPECT_EQ(cfg.model.dim, 32U);
    EXPECT_EQ(cfg.model.layers, 2U);
    EXPECT_EQ(cfg.train.optimizer, OptimizerKind::sgd);
    EXPECT_EQ(cfg.ks, (std::vector<std::size_t>{1, 10, 50}));
    EXPECT_EQ(cfg.mapping.delimiter, ',');
    EXPECT_EQ(cfg.mapping.zone, 5);
}

TEST(Config, DefaultsMatchTheDocumentedValues) {
    const RunConfig cfg = from_text("");
    EXPECT_EQ(cfg.variant, Variant::sepgcn);
    EXPECT_TRUE(cfg.model.sep_enabled);
    EXPECT_EQ(cfg.model.dim, 64U);
    EXPECT_EQ(cfg.model.layers, 3U);
    EXPECT_DOUBLE_EQ(cfg.split.train_ratio, 0.7);
    EXPECT_DOUBLE_EQ(cfg.similarity.alpha_sim, 0.5);
    EXPECT_DOUBLE_EQ(cfg.pruning.sigma_floor, 0.01);
    EXPECT_DOUBLE_EQ(cfg.train.lr, 0.001);
    EXPECT_EQ(cfg.train.batch_size, 2048U);
    EXPECT_EQ(cfg.ks, (std::vector<std::size_t>{5, 20}));
}

TEST(Config, UnknownKeyAndBadValuesAreConfigErrors) {
    EXPECT_EQ(kind_of("model.depth = 3\n"), ErrorKind::config);
    EXPECT_EQ(kind_of("model.dim = -4\n"), ErrorKind::config);
    EXPECT_EQ(kind_of("model.dim = 0\n"), ErrorKind::config);
    EXPECT_EQ(kind_of("train.lr = fast\n"), ErrorKind::config);
    EXPECT_EQ(kind_of("run.variant = ngcf\n"), ErrorKind::config);
    EXPECT_EQ(kind_of("sep.self_loops = maybe\n"), ErrorKind::config);
    EXPECT_EQ(kind_of("eval.ks = 0\n"), ErrorKind::config);
    EXPECT_EQ(kind_of("just some words\n"), ErrorKind::config);
    try {
        (void)from_text("model.depth = 3\n");
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("model.depth"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 3);
    }
}

TEST(Config, OverridesWinOverFileValues) {
    std::istringstream in("model.dim = 16\ntrain.lr = 0.1\n");
    KeyValues kv = KeyValues::parse(in);
    kv.set_override("model.dim=8");
    kv.set_override(" train.epochs_max = 3 ");
    RunConfig cfg;
    cfg.apply(kv);
    EXPECT_EQ(cfg.model.dim, 8U);
    EXPECT_EQ(cfg.train.epochs_max, 3U);
    EXPECT_DOUBLE_EQ(cfg.train.lr, 0.1);
    EXPECT_THROW(kv.set_override("no-equals-sign"), Error);
}

TEST(Config, GammaSetsBothKeepWeights) {
    const RunConfig cfg = from_text("model.gamma = 0.2\n");
    EXPECT_DOUBLE_EQ(cfg.model.alpha_user, 0.8);
    EXPECT_DOUBLE_EQ(cfg.model.beta_item, 0.8);
}

TEST(Config, RunSeedDerivesComponentSeeds) {
    const RunConfig a = from_text("run.seed = 1\n");
    const RunConfig b = from_text("run.seed = 2\n");
    EXPECT_NE(a.split.seed, b.split.seed);
    EXPECT_NE(a.model.seed, b.model.seed);
    EXPECT_NE(a.train.seed, b.train.seed);
    EXPECT_NE(a.similarity.seed, b.similarity.seed);
    EXPECT_NE(a.model.seed, a.train.seed);
    const RunConfig pinned = from_text("run.seed = 2\nmodel.seed = 77\n");
    EXPECT_EQ(pinned.model.seed, 77U);
    EXPECT_EQ(pinned.train.seed, b.train.seed);
}

TEST(Config, HashTracksEffectiveSettings) {
    const RunConfig a = from_text("model.dim = 16\n");
    const RunConfig same = from_text("model.dim=16\n# comment\n");
    const RunConfig other = from_text("model.dim = 17\n");
    EXPECT_EQ(a.hash(), same.hash());
    EXPECT_NE(a.hash(), other.hash());
    EXPECT_EQ(a.hash().size(), 16U);
    // order of keys in the file does not matter
    EXPECT_EQ(from_text("model.dim = 8\ntrain.lr = 0.01\n").hash(), from_text("train.lr = 0.01\nmodel.dim = 8\n").hash());
}

TEST(Config, MissingFileIsInputError) {
    try {
        (void)KeyValues::load("/nonexistent/run.conf");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::input);
    }
}
