/**
 * @file
 * @brief Run configuration: flat `dotted.key = value` files with command-line
 *        overrides, mapped onto the per-module config structs.
 */

#pragma once

#include "sepgcn/checkin_data.hpp"
#include "sepgcn/core.hpp"
#include "sepgcn/geo_temporal.hpp"
#include "sepgcn/model.hpp"
#include "sepgcn/sep_graph.hpp"
#include "sepgcn/trainer.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sepgcn {

enum class Variant { sepgcn, lightgcn, sep_temporal_only, sep_spatial_only, lightgcn_spatial };

[[nodiscard]] inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::sepgcn: return "sepgcn";
        case Variant::lightgcn: return "lightgcn";
        case Variant::sep_temporal_only: return "sep_temporal_only";
        case Variant::sep_spatial_only: return "sep_spatial_only";
        case Variant::lightgcn_spatial: return "lightgcn_spatial";
    }
    return "sepgcn";
}

[[nodiscard]] inline bool uses_sep(Variant v) {
    return v == Variant::sepgcn || v == Variant::sep_temporal_only || v == Variant::sep_spatial_only;
}

[[nodiscard]] inline SepVariant sep_variant(Variant v) {
    return v == Variant::sep_temporal_only ? SepVariant::temporal_only
           : v == Variant::sep_spatial_only ? SepVariant::spatial_only
                                            : SepVariant::spatio_temporal;
}

/// Ordered `key -> value` text map.
class KeyValues {
  public:
    /// Parse `key = value` lines; `#` starts a comment.
    static KeyValues parse(std::istream &in, const std::string &origin = "config") {
        KeyValues kv;
        std::string line;
        std::size_t no = 0;
        while (std::getline(in, line)) {
            ++no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.erase(hash);
            }
            const std::string_view t = detail::trim(line);
            if (t.empty()) {
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string_view::npos) {
                fail(ErrorKind::config, origin + ":" + std::to_string(no) + ": expected 'key = value'");
            }
            kv.set(std::string(detail::trim(t.substr(0, eq))), std::string(detail::trim(t.substr(eq + 1))));
        }
        return kv;
    }

    static KeyValues load(const std::string &path) {
        std::ifstream in(path);
        if (!in) {
            fail(ErrorKind::input, "cannot open config file: " + path);
        }
        return parse(in, path);
    }

    void set(const std::string &key, const std::string &value) {
        if (key.empty()) {
            fail(ErrorKind::config, "empty config key");
        }
        values_[key] = value;
    }

    /// Apply a `key=value` override string.
    void set_override(const std::string &assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::config, "override '" + assignment + "' is not key=value");
        }
        set(std::string(detail::trim(assignment.substr(0, eq))), std::string(detail::trim(assignment.substr(eq + 1))));
    }

    [[nodiscard]] const std::map<std::string, std::string> &values() const noexcept { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

struct RunConfig {
    // paths
    std::string raw_path;
    std::string snapshot_path = "dataset.sepdata";
    std::string sep_path = "sep_matrix.tsv";
    std::string checkpoint_path = "model.sepckpt";
    std::string report_prefix = "report";
    std::string train_log_path = "train_log.tsv";

    FieldMapping mapping;
    SplitConfig split;
    SimilarityParams similarity;
    PruningParams pruning;
    SepNormalization normalization = SepNormalization::sym_degree;
    ModelConfig model;
    TrainConfig train;
    std::vector<std::size_t> ks{5, 20};
    Variant variant = Variant::sepgcn;
    std::uint64_t seed = 2024;
    std::size_t threads = 1;

    /// Apply @p kv on top of the defaults; unknown keys are config errors.
    void apply(const KeyValues &kv) {
        std::map<std::string, bool> explicit_seed;
        for (const auto &[key, value] : kv.values()) {
            if (key == "run.seed") {
                seed = to_u64(key, value);
            }
        }
        for (const auto &[key, value] : kv.values()) {
            if (key == "run.seed") {
                continue;
            }
            if (key.size() > 5 && key.compare(key.size() - 5, 5, ".seed") == 0) {
                explicit_seed[key] = true;
            }
            assign(key, value);
        }
        derive_seeds(explicit_seed);
        model.sep_enabled = uses_sep(variant);
        model.validate();
        train.validate();
    }

    /// Component seeds derived from the run seed unless set individually.
    void derive_seeds(const std::map<std::string, bool> &keep = {}) {
        auto derive = [&](const char *name) { return fnv1a(name, seed * 0x9E3779B97F4A7C15ULL + 1) >> 1; };
        if (!keep.count("split.seed")) split.seed = derive("split");
        if (!keep.count("similarity.seed")) similarity.seed = derive("similarity");
        if (!keep.count("model.seed")) model.seed = derive("model");
        if (!keep.count("train.seed")) train.seed = derive("train");
    }

    /// Canonical `key = value` dump; the config hash is taken over this text.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> entries() const {
        auto b = [](bool v) { return std::string(v ? "1" : "0"); };
        std::string ks_text;
        for (std::size_t k : ks) {
            ks_text += (ks_text.empty() ? "" : ",") + std::to_string(k);
        }
        return {
            {"run.variant", to_string(variant)},
            {"run.seed", std::to_string(seed)},
            {"split.train_ratio", format_double(split.train_ratio)},
            {"split.seed", std::to_string(split.seed)},
            {"split.min_interactions", std::to_string(split.min_interactions)},
            {"split.kcore", std::to_string(split.kcore)},
            {"similarity.alpha", format_double(similarity.alpha_sim)},
            {"similarity.median_mode", similarity.median_mode == MedianMode::global ? "global" : "per_user"},
            {"similarity.sample_budget", std::to_string(similarity.sample_budget)},
            {"similarity.seed", std::to_string(similarity.seed)},
            {"sep.sigma_floor", format_double(pruning.sigma_floor)},
            {"sep.max_neighbors", std::to_string(pruning.max_neighbors)},
            {"sep.pair_budget", std::to_string(pruning.pair_budget)},
            {"sep.self_loops", b(pruning.self_loops)},
            {"sep.normalization", to_string(normalization)},
            {"model.dim", std::to_string(model.dim)},
            {"model.layers", std::to_string(model.layers)},
            {"model.alpha_user", format_double(model.alpha_user)},
            {"model.beta_item", format_double(model.beta_item)},
            {"model.sep_every_layer", b(model.sep_every_layer)},
            {"model.init_std", format_double(model.init_std)},
            {"model.seed", std::to_string(model.seed)},
            {"train.lr", format_double(train.lr)},
            {"train.l2_lambda", format_double(train.l2_lambda)},
            {"train.epochs_max", std::to_string(train.epochs_max)},
            {"train.batch_size", std::to_string(train.batch_size)},
            {"train.neg_per_pos", std::to_string(train.neg_per_pos)},
            {"train.eval_every", std::to_string(train.eval_every)},
            {"train.patience", std::to_string(train.patience)},
            {"train.optimizer", train.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
            {"train.seed", std::to_string(train.seed)},
            {"eval.ks", ks_text},
        };
    }

    [[nodiscard]] std::string hash() const {
        std::string text;
        for (const auto &[k, v] : entries()) {
            text += k + "=" + v + "\n";
        }
        return hex64(fnv1a(text));
    }

  private:
    static double to_double(const std::string &key, const std::string &v) {
        const auto d = detail::parse_number(v);
        if (!d) {
            fail(ErrorKind::config, key + ": expected a number, got '" + v + "'");
        }
        return *d;
    }

    static std::uint64_t to_u64(const std::string &key, const std::string &v) {
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
            fail(ErrorKind::config, key + ": expected a non-negative integer, got '" + v + "'");
        }
        return std::stoull(v);
    }

    static int to_column(const std::string &key, const std::string &v) {
        if (v == "-1" || v == "none") {
            return -1;
        }
        return static_cast<int>(to_u64(key, v));
    }

    static bool to_bool(const std::string &key, const std::string &v) {
        if (v == "1" || v == "true" || v == "yes") return true;
        if (v == "0" || v == "false" || v == "no") return false;
        fail(ErrorKind::config, key + ": expected a boolean, got '" + v + "'");
    }

    void assign(const std::string &key, const std::string &v) {
        using Setter = std::function<void(const std::string &)>;
        const std::map<std::string, Setter> setters = {
            {"data.raw", [&](const std::string &s) { raw_path = s; }},
            {"data.snapshot", [&](const std::string &s) { snapshot_path = s; }},
            {"sep.file", [&](const std::string &s) { sep_path = s; }},
            {"train.checkpoint", [&](const std::string &s) { checkpoint_path = s; }},
            {"train.log", [&](const std::string &s) { train_log_path = s; }},
            {"report.prefix", [&](const std::string &s) { report_prefix = s; }},
            {"data.col.user", [&](const std::string &s) { mapping.user = to_column(key, s); }},
            {"data.col.item", [&](const std::string &s) { mapping.item = to_column(key, s); }},
            {"data.col.timestamp", [&](const std::string &s) { mapping.timestamp = to_column(key, s); }},
            {"data.col.lat", [&](const std::string &s) { mapping.lat = to_column(key, s); }},
            {"data.col.lon", [&](const std::string &s) { mapping.lon = to_column(key, s); }},
            {"data.col.zone", [&](const std::string &s) { mapping.zone = to_column(key, s); }},
            {"data.header", [&](const std::string &s) { mapping.header = to_bool(key, s); }},
            {"data.delimiter",
             [&](const std::string &s) {
                 if (s == "tab") mapping.delimiter = '\t';
                 else if (s == "comma") mapping.delimiter = ',';
                 else if (s == "auto") mapping.delimiter = '\0';
                 else fail(ErrorKind::config, key + ": expected tab, comma or auto");
             }},
            {"data.timestamp_format",
             [&](const std::string &s) {
                 if (s == "iso") mapping.format = TimestampFormat::iso;
                 else if (s == "epoch") mapping.format = TimestampFormat::epoch_with_zone;
                 else fail(ErrorKind::config, key + ": expected iso or epoch");
             }},
            {"split.train_ratio", [&](const std::string &s) { split.train_ratio = to_double(key, s); }},
            {"split.seed", [&](const std::string &s) { split.seed = to_u64(key, s); }},
            {"split.min_interactions", [&](const std::string &s) { split.min_interactions = to_u64(key, s); }},
            {"split.kcore", [&](const std::string &s) { split.kcore = to_u64(key, s); }},
            {"similarity.alpha", [&](const std::string &s) { similarity.alpha_sim = to_double(key, s); }},
            {"similarity.median_mode",
             [&](const std::string &s) {
                 if (s == "global") similarity.median_mode = MedianMode::global;
                 else if (s == "per_user") similarity.median_mode = MedianMode::per_user;
                 else fail(ErrorKind::config, key + ": expected global or per_user");
             }},
            {"similarity.sample_budget", [&](const std::string &s) { similarity.sample_budget = to_u64(key, s); }},
            {"similarity.seed", [&](const std::string &s) { similarity.seed = to_u64(key, s); }},
            {"sep.sigma_floor", [&](const std::string &s) { pruning.sigma_floor = to_double(key, s); }},
            {"sep.max_neighbors", [&](const std::string &s) { pruning.max_neighbors = to_u64(key, s); }},
            {"sep.pair_budget", [&](const std::string &s) { pruning.pair_budget = to_u64(key, s); }},
            {"sep.self_loops", [&](const std::string &s) { pruning.self_loops = to_bool(key, s); }},
            {"sep.normalization",
             [&](const std::string &s) {
                 if (s == "sym_degree") normalization = SepNormalization::sym_degree;
                 else if (s == "row_unit") normalization = SepNormalization::row_unit;
                 else fail(ErrorKind::config, key + ": expected sym_degree or row_unit");
             }},
            {"model.dim", [&](const std::string &s) { model.dim = to_u64(key, s); }},
            {"model.layers", [&](const std::string &s) { model.layers = to_u64(key, s); }},
            {"model.alpha_user", [&](const std::string &s) { model.alpha_user = to_double(key, s); }},
            {"model.beta_item", [&](const std::string &s) { model.beta_item = to_double(key, s); }},
            {"model.gamma",
             [&](const std::string &s) {
                 const double g = to_double(key, s);
                 model.alpha_user = model.beta_item = 1.0 - g;
             }},
            {"model.sep_every_layer", [&](const std::string &s) { model.sep_every_layer = to_bool(key, s); }},
            {"model.init_std", [&](const std::string &s) { model.init_std = to_double(key, s); }},
            {"model.seed", [&](const std::string &s) { model.seed = to_u64(key, s); }},
            {"train.lr", [&](const std::string &s) { train.lr = to_double(key, s); }},
            {"train.l2_lambda", [&](const std::string &s) { train.l2_lambda = to_double(key, s); }},
            {"train.epochs_max", [&](const std::string &s) { train.epochs_max = to_u64(key, s); }},
            {"train.batch_size", [&](const std::string &s) { train.batch_size = to_u64(key, s); }},
            {"train.neg_per_pos", [&](const std::string &s) { train.neg_per_pos = to_u64(key, s); }},
            {"train.eval_every", [&](const std::string &s) { train.eval_every = to_u64(key, s); }},
            {"train.patience", [&](const std::string &s) { train.patience = to_u64(key, s); }},
            {"train.optimizer",
             [&](const std::string &s) {
                 if (s == "adam") train.optimizer = OptimizerKind::adam;
                 else if (s == "sgd") train.optimizer = OptimizerKind::sgd;
                 else fail(ErrorKind::config, key + ": expected adam or sgd");
             }},
            {"train.seed", [&](const std::string &s) { train.seed = to_u64(key, s); }},
            {"eval.ks",
             [&](const std::string &s) {
                 ks.clear();
                 for (std::string_view part : detail::split_fields(s, ',')) {
                     ks.push_back(to_u64(key, std::string(detail::trim(part))));
                 }
                 if (ks.empty() || std::count(ks.begin(), ks.end(), 0U) > 0) {
                     fail(ErrorKind::config, key + ": expected a comma list of positive cut-offs");
                 }
             }},
            {"run.variant",
             [&](const std::string &s) {
                 if (s == "sepgcn") variant = Variant::sepgcn;
                 else if (s == "lightgcn") variant = Variant::lightgcn;
                 else if (s == "sep_temporal_only") variant = Variant::sep_temporal_only;
                 else if (s == "sep_spatial_only") variant = Variant::sep_spatial_only;
                 else if (s == "lightgcn_spatial") variant = Variant::lightgcn_spatial;
                 else fail(ErrorKind::config, key + ": unknown variant '" + s + "'");
             }},
            {"run.threads", [&](const std::string &s) { threads = std::max<std::size_t>(1, to_u64(key, s)); }},
            {"run.deterministic", [&](const std::string &s) { train.deterministic = to_bool(key, s); }},
        };
        const auto it = setters.find(key);
        if (it == setters.end()) {
            fail(ErrorKind::config, "unknown config key '" + key + "'");
        }
        it->second(v);
    }
};

}  // namespace sepgcn
