#include "sepgcn/pipeline.hpp"
#include "sepgcn/synthetic.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace sepgcn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<CheckinRecord> small_raw() {
    SynthConfig sc;
    sc.n_users = 120;
    sc.n_items = 200;
    sc.n_checkins = 3000;
    sc.n_regions = 10;
    return generate_city(sc);
}

/// A scratch directory with the raw file and a config pointing into it.
struct Workspace {
    fs::path dir;
    KeyValues kv;

    explicit Workspace(const std::string &name) {
        dir = fs::temp_directory_path() / ("sepgcn_test_" + name + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        std::ostringstream os;
        write_checkins_tsv(os, small_raw());
        write_file((dir / "raw.tsv").string(), os.str());
        kv.set("data.raw", (dir / "raw.tsv").string());
        kv.set("data.snapshot", (dir / "data.sepdata").string());
        kv.set("sep.file", (dir / "sep.tsv").string());
        kv.set("train.checkpoint", (dir / "model.sepckpt").string());
        kv.set("train.log", (dir / "log.tsv").string());
        kv.set("report.prefix", (dir / "report").string());
        kv.set("model.dim", "8");
        kv.set("train.epochs_max", "4");
        kv.set("train.eval_every", "2");
        kv.set("train.lr", "0.01");
    }
    ~Workspace() { fs::remove_all(dir); }

    [[nodiscard]] RunConfig config() const {
        RunConfig cfg;
        cfg.apply(kv);
        return cfg;
    }

    void run_all() const {
        const RunConfig cfg = config();
        (void)cmd_prepare(cfg);
        if (uses_sep(cfg.variant)) {
            (void)cmd_build_sep(cfg);
        }
        (void)cmd_train(cfg);
        (void)cmd_eval(cfg);
    }
};

}  // namespace

TEST(Pipeline, FullRunIsByteDeterministic) {
    Workspace a("det_a"), b("det_b");
    a.run_all();
    b.run_all();
    for (const char *f : {"data.sepdata", "sep.tsv", "model.sepckpt", "log.tsv", "report.tsv", "report.txt"}) {
        const std::string x = slurp(a.dir / f);
        EXPECT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(b.dir / f)) << f;
    }
}

TEST(Pipeline, ReportEchoesProvenance) {
    Workspace w("echo");
    w.run_all();
    const std::string txt = slurp(w.dir / "report.txt");
    for (const char *key : {"config_hash = ", "variant = sepgcn", "dataset_checksum = ", "train.seed = ", "at20.recall = "}) {
        EXPECT_NE(txt.find(key), std::string::npos) << key;
    }
    std::ifstream in(w.dir / "model.sepckpt", std::ios::binary);
    const Checkpoint ck = read_checkpoint(in);
    EXPECT_EQ(ck.get("dim"), std::optional<std::string>("8"));
    EXPECT_TRUE(ck.get("best_epoch"));
}

TEST(Pipeline, EvalOfCheckpointMatchesTrainReport) {
    Workspace w("trainreport");
    const RunConfig cfg = w.config();
    (void)cmd_prepare(cfg);
    (void)cmd_build_sep(cfg);
    const Trained t = cmd_train(cfg);
    const MetricsReport r = cmd_eval(cfg);
    ASSERT_EQ(r.blocks.size(), t.report.blocks.size());
    for (std::size_t b = 0; b < r.blocks.size(); ++b) {
        EXPECT_EQ(r.blocks[b].recall, t.report.blocks[b].recall);
        EXPECT_EQ(r.blocks[b].ndcg, t.report.blocks[b].ndcg);
    }
}

TEST(Pipeline, DimensionMismatchIsConfigError) {
    Workspace w("dim");
    w.run_all();
    w.kv.set("model.dim", "9");
    try {
        (void)cmd_eval(w.config());
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
        EXPECT_EQ(e.exit_code(), 3);
    }
}

TEST(Pipeline, GraphOnlyVariantIgnoresSepFileWithNotice) {
    Workspace w("notice");
    w.run_all();
    w.kv.set("run.variant", "lightgcn");
    std::string notice;
    (void)cmd_train(w.config(), &notice);
    EXPECT_NE(notice.find("ignores SEP file"), std::string::npos);
}

TEST(Pipeline, MissingInputsAreInputErrors) {
    Workspace w("missing");
    w.kv.set("data.raw", (w.dir / "nope.tsv").string());
    for (auto step : {0, 1, 2}) {
        try {
            const RunConfig cfg = w.config();
            if (step == 0) (void)cmd_prepare(cfg);
            if (step == 1) (void)cmd_build_sep(cfg);
            if (step == 2) (void)cmd_eval(cfg);
            FAIL() << step;
        } catch (const Error &e) {
            EXPECT_EQ(e.kind(), ErrorKind::input) << step;
        }
    }
}

TEST(Pipeline, BruteForceBuildEqualsGridBuild) {
    Workspace w("brute");
    const RunConfig cfg = w.config();
    const Prepared p = prepare_records(small_raw(), cfg);
    const SepBuild fast = build_sep(p.dataset, cfg);
    const SepBuild slow = build_sep(p.dataset, cfg, true);
    ASSERT_EQ(fast.raw.nnz(), slow.raw.nnz());
    for (std::size_t k = 0; k < fast.raw.nnz(); ++k) {
        EXPECT_EQ(fast.raw.entries[k].row, slow.raw.entries[k].row);
        EXPECT_EQ(fast.raw.entries[k].col, slow.raw.entries[k].col);
        EXPECT_NEAR(fast.raw.entries[k].value, slow.raw.entries[k].value, 1e-12);
    }
}

TEST(Sweep, OneRowPerValueAndSizeOneEqualsTrain) {
    Workspace w("sweep");
    const auto raw = small_raw();
    const auto rows = sweep(raw, w.kv, "layers", {"1", "2", "3"});
    ASSERT_EQ(rows.size(), 3U);
    EXPECT_EQ(rows[1].value, "2");
    std::ostringstream os;
    write_sweep_tsv(os, rows);
    // header + 3 values x 2 cut-offs
    const std::string table = os.str();
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 7);

    KeyValues kv = w.kv;
    kv.set("model.layers", "2");
    RunConfig cfg;
    cfg.apply(kv);
    const Prepared p = prepare_records(raw, cfg);
    const SepMatrix sep = build_sep(p.dataset, cfg).raw;
    const Trained t = train_run(p.dataset, cfg, &sep);
    for (std::size_t b = 0; b < t.report.blocks.size(); ++b) {
        EXPECT_EQ(rows[1].report.blocks[b].recall, t.report.blocks[b].recall);
    }
}

TEST(Sweep, KcoreAxisReprepares) {
    Workspace w("kcore");
    const auto rows = sweep(small_raw(), w.kv, "kcore", {"2", "5"});
    ASSERT_EQ(rows.size(), 2U);
    EXPECT_GE(rows[0].stats.min_user_degree, 2U);
    EXPECT_GE(rows[1].stats.min_user_degree, 5U);
    EXPECT_GE(rows[1].stats.min_item_degree, 5U);
    EXPECT_LE(rows[1].stats.n_users, rows[0].stats.n_users);
    EXPECT_THROW((void)sweep(small_raw(), w.kv, "depth", {"1"}), Error);
}
