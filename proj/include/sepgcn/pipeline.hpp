/**
 * @file
 * @brief End-to-end steps behind the command line: prepare, build-sep,
 *        train, eval and sweep. Each step is a function of its inputs and
 *        the run configuration.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/config.hpp"
#include "sepgcn/core.hpp"
#include "sepgcn/evaluator.hpp"
#include "sepgcn/interaction_graph.hpp"
#include "sepgcn/model.hpp"
#include "sepgcn/oracle.hpp"
#include "sepgcn/sep_graph.hpp"
#include "sepgcn/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sepgcn {

// --- file helpers ----------------------------------------------------------------

inline std::ifstream open_input(const std::string &path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        fail(ErrorKind::input, "cannot open '" + path + "'");
    }
    return in;
}

inline void write_file(const std::string &path, const std::string &bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        fail(ErrorKind::input, "cannot write '" + path + "'");
    }
}

// --- prepare -----------------------------------------------------------------------

struct Prepared {
    Dataset dataset;
    DatasetStats stats;
    std::string checksum;  ///< FNV-1a of the snapshot bytes
    std::size_t rejected_lines = 0;
};

[[nodiscard]] inline Prepared prepare_records(const std::vector<CheckinRecord> &raw, const RunConfig &cfg) {
    Prepared p;
    p.dataset = build_dataset(raw, cfg.split);
    p.stats = dataset_stats(p.dataset);
    p.checksum = hex64(fnv1a(snapshot_bytes(p.dataset)));
    return p;
}

[[nodiscard]] inline std::vector<CheckinRecord> load_raw(const RunConfig &cfg, std::size_t *rejected = nullptr) {
    if (cfg.raw_path.empty()) {
        fail(ErrorKind::config, "data.raw is not set");
    }
    std::ifstream in = open_input(cfg.raw_path);
    ParseResult parsed = parse_checkins(in, cfg.mapping);
    if (rejected) {
        *rejected = parsed.rejects.size();
    }
    return std::move(parsed.records);
}

/// Parse the raw file, build the dataset and write the snapshot.
inline Prepared cmd_prepare(const RunConfig &cfg) {
    std::size_t rejected = 0;
    const auto raw = load_raw(cfg, &rejected);
    Prepared p = prepare_records(raw, cfg);
    p.rejected_lines = rejected;
    write_file(cfg.snapshot_path, snapshot_bytes(p.dataset));
    return p;
}

[[nodiscard]] inline Dataset load_snapshot(const std::string &path) {
    std::ifstream in = open_input(path);
    return read_snapshot(in);
}

// --- build-sep -----------------------------------------------------------------------

struct SepBuild {
    SepMatrix raw;
    SepBuildReport report;
};

/// Raw SEP matrix for the run's variant; @p brute_force uses the double-loop reference.
[[nodiscard]] inline SepBuild build_sep(const Dataset &ds, const RunConfig &cfg, bool brute_force = false) {
    const EdgeIndex idx = build_edge_index(ds);
    const SepVariant variant = sep_variant(cfg.variant);
    const MedianContext medians = compute_median_context(idx, cfg.similarity);
    SepBuild b;
    b.raw = build_sep_matrix(idx, cfg.similarity, medians, cfg.pruning, variant, &b.report);
    if (brute_force) {
        b.raw.entries = oracle::brute_force_sep(idx, cfg.similarity, medians, cfg.pruning, variant);
    }
    return b;
}

inline SepBuild cmd_build_sep(const RunConfig &cfg, bool brute_force = false) {
    const Dataset ds = load_snapshot(cfg.snapshot_path);
    SepBuild b = build_sep(ds, cfg, brute_force);
    std::ostringstream os;
    write_sep_matrix(os, b.raw);
    write_file(cfg.sep_path, os.str());
    return b;
}

[[nodiscard]] inline SepMatrix load_sep(const std::string &path) {
    std::ifstream in = open_input(path);
    return read_sep_matrix(in);
}

// --- model assembly ---------------------------------------------------------------------

/// Graph structures for one run; owns everything the propagator points at.
struct ModelContext {
    EdgeIndex edges;
    BipartiteGraph graph;
    std::optional<SepMatrix> sep;  ///< normalised
    std::unique_ptr<Propagator> propagator;
};

[[nodiscard]] inline std::unique_ptr<ModelContext> make_model(const Dataset &ds, const RunConfig &cfg,
                                                              const SepMatrix *raw_sep) {
    auto ctx = std::make_unique<ModelContext>();
    ctx->edges = build_edge_index(ds);
    std::vector<Triplet> item_block;
    if (cfg.variant == Variant::lightgcn_spatial) {
        const double median = global_median_km(ds.item_coords, cfg.similarity);
        item_block = item_spatial_block(ds.item_coords, cfg.similarity, median, cfg.pruning);
    }
    ctx->graph = build_adjacency(ds, item_block);
    if (uses_sep(cfg.variant) && raw_sep) {
        ctx->sep = normalize_sep(*raw_sep, cfg.normalization);
    }
    ctx->propagator = std::make_unique<Propagator>(cfg.model, ctx->graph, ctx->edges, ctx->sep ? &*ctx->sep : nullptr);
    return ctx;
}

// --- train / eval -----------------------------------------------------------------------

/// Provenance lines written into every report and checkpoint.
[[nodiscard]] inline std::vector<std::pair<std::string, std::string>> run_echo(const RunConfig &cfg,
                                                                               const Dataset &ds) {
    return {{"config_hash", cfg.hash()},
            {"variant", to_string(cfg.variant)},
            {"run.seed", std::to_string(cfg.seed)},
            {"split.seed", std::to_string(cfg.split.seed)},
            {"similarity.seed", std::to_string(cfg.similarity.seed)},
            {"model.seed", std::to_string(cfg.model.seed)},
            {"train.seed", std::to_string(cfg.train.seed)},
            {"dataset_checksum", hex64(fnv1a(snapshot_bytes(ds)))}};
}

struct Trained {
    TrainResult result;
    Checkpoint checkpoint;
    MetricsReport report;  ///< test metrics of the retained table
};

[[nodiscard]] inline Trained train_run(const Dataset &ds, const RunConfig &cfg, const SepMatrix *raw_sep) {
    const auto ctx = make_model(ds, cfg, raw_sep);
    const Matrix init = init_embeddings(ds.n_users() + ds.n_items(), cfg.model);
    const EvalHook hook = [&](const Matrix &final_embeddings) {
        const MetricsReport r = evaluate(final_embeddings, ds, {20});
        return EvalPoint{r.at(20).recall, r.at(20).ndcg};
    };
    Trained t;
    t.result = train(ds, *ctx->propagator, cfg.train, init, hook);
    t.checkpoint.echo = run_echo(cfg, ds);
    t.checkpoint.echo.emplace_back("dim", std::to_string(cfg.model.dim));
    t.checkpoint.echo.emplace_back("best_epoch", std::to_string(t.result.best_epoch));
    t.checkpoint.echo.emplace_back("stop_reason", t.result.stop_reason);
    t.checkpoint.embeddings = t.result.best_embeddings;
    t.report = evaluate(ctx->propagator->forward(t.result.best_embeddings).final_embeddings, ds, cfg.ks);
    t.report.echo = run_echo(cfg, ds);
    return t;
}

/// Metrics of a stored E^0 table under the run's propagation settings.
[[nodiscard]] inline MetricsReport eval_run(const Dataset &ds, const RunConfig &cfg, const SepMatrix *raw_sep,
                                            const Matrix &e0) {
    if (e0.cols() != cfg.model.dim) {
        fail(ErrorKind::config, "checkpoint has dim " + std::to_string(e0.cols()) + " but model.dim is " +
                                    std::to_string(cfg.model.dim));
    }
    const auto ctx = make_model(ds, cfg, raw_sep);
    MetricsReport r = evaluate(ctx->propagator->forward(e0).final_embeddings, ds, cfg.ks);
    r.echo = run_echo(cfg, ds);
    return r;
}

/// The SEP matrix a run needs, or nothing for graph-only variants.
[[nodiscard]] inline std::optional<SepMatrix> sep_for_run(const RunConfig &cfg, std::string *notice = nullptr) {
    if (!uses_sep(cfg.variant)) {
        if (notice && std::filesystem::exists(cfg.sep_path)) {
            *notice = "variant " + to_string(cfg.variant) + " ignores SEP file '" + cfg.sep_path + "'";
        }
        return std::nullopt;
    }
    return load_sep(cfg.sep_path);
}

inline Trained cmd_train(const RunConfig &cfg, std::string *notice = nullptr) {
    const Dataset ds = load_snapshot(cfg.snapshot_path);
    const auto sep = sep_for_run(cfg, notice);
    Trained t = train_run(ds, cfg, sep ? &*sep : nullptr);
    std::ostringstream ck;
    write_checkpoint(ck, t.checkpoint);
    write_file(cfg.checkpoint_path, ck.str());
    std::ostringstream log;
    write_train_log(log, t.result.log);
    write_file(cfg.train_log_path, log.str());
    return t;
}

inline void write_reports(const RunConfig &cfg, const MetricsReport &r) {
    std::ostringstream tsv, kv;
    write_report_tsv(tsv, r);
    write_report_kv(kv, r);
    write_file(cfg.report_prefix + ".tsv", tsv.str());
    write_file(cfg.report_prefix + ".txt", kv.str());
}

inline MetricsReport cmd_eval(const RunConfig &cfg, std::string *notice = nullptr) {
    const Dataset ds = load_snapshot(cfg.snapshot_path);
    std::ifstream in = open_input(cfg.checkpoint_path, std::ios::binary);
    const Checkpoint ck = read_checkpoint(in);
    const auto sep = sep_for_run(cfg, notice);
    MetricsReport r = eval_run(ds, cfg, sep ? &*sep : nullptr, ck.embeddings);
    write_reports(cfg, r);
    return r;
}

// --- sweep ------------------------------------------------------------------------------

struct SweepRow {
    std::string axis;
    std::string value;
    MetricsReport report;
    DatasetStats stats;
};

/// Config key varied by a sweep axis.
[[nodiscard]] inline std::string sweep_key(const std::string &axis) {
    if (axis == "layers") return "model.layers";
    if (axis == "alpha") return "model.alpha_user";
    if (axis == "beta") return "model.beta_item";
    if (axis == "kcore") return "split.kcore";
    fail(ErrorKind::config, "unknown sweep axis '" + axis + "' (layers, alpha, beta, kcore)");
}

/**
 * @brief Train and evaluate once per axis value, starting from @p base.
 *
 * The dataset comes from @p raw (re-prepared per value on the kcore axis)
 * and the SEP matrix is rebuilt whenever the dataset changes.
 */
[[nodiscard]] inline std::vector<SweepRow> sweep(const std::vector<CheckinRecord> &raw, const KeyValues &base,
                                                 const std::string &axis, const std::vector<std::string> &values) {
    const std::string key = sweep_key(axis);
    if (values.empty()) {
        fail(ErrorKind::config, "sweep needs at least one value");
    }
    std::vector<SweepRow> rows;
    std::optional<Prepared> shared;
    std::optional<SepMatrix> shared_sep;
    for (const std::string &v : values) {
        KeyValues kv = base;
        kv.set(key, v);
        RunConfig cfg;
        cfg.apply(kv);
        std::optional<Prepared> own;
        std::optional<SepMatrix> own_sep;
        Prepared *prep = nullptr;
        std::optional<SepMatrix> *sep = nullptr;
        if (axis == "kcore") {
            own = prepare_records(raw, cfg);
            prep = &*own;
            sep = &own_sep;
        } else {
            if (!shared) {
                shared = prepare_records(raw, cfg);
            }
            prep = &*shared;
            sep = &shared_sep;
        }
        if (uses_sep(cfg.variant) && !*sep) {
            *sep = build_sep(prep->dataset, cfg).raw;
        }
        const Trained t = train_run(prep->dataset, cfg, *sep ? &**sep : nullptr);
        rows.push_back({axis, v, t.report, prep->stats});
    }
    return rows;
}

inline void write_sweep_tsv(std::ostream &os, const std::vector<SweepRow> &rows) {
    os << "axis\tvalue\tusers\titems\tk\trecall\tprecision\tndcg\taccuracy\n";
    for (const SweepRow &r : rows) {
        for (const MetricBlock &b : r.report.blocks) {
            os << r.axis << '\t' << r.value << '\t' << r.stats.n_users << '\t' << r.stats.n_items << '\t' << b.k << '\t'
               << detail::fixed(b.recall) << '\t' << detail::fixed(b.precision) << '\t' << detail::fixed(b.ndcg) << '\t'
               << detail::fixed(b.accuracy) << '\n';
        }
    }
}

}  // namespace sepgcn
