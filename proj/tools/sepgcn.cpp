// sepgcn: dataset preparation, SEP construction, training, evaluation and sweeps.
//
// Exit codes: 0 success, 2 input error, 3 config error, 4 numerical failure.

#include "sepgcn/oracle_suite.hpp"
#include "sepgcn/pipeline.hpp"
#include "sepgcn/synthetic.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace sepgcn;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::size_t threads = 0;
    bool deterministic = false;
};

RunConfig load_config(const Common &c, KeyValues *kv_out = nullptr) {
    KeyValues kv;
    if (!c.config_path.empty()) {
        kv = KeyValues::load(c.config_path);
    }
    if (const char *env = std::getenv("SEPGCN_THREADS")) {
        kv.set("run.threads", env);
    }
    for (const std::string &o : c.overrides) {
        kv.set_override(o);
    }
    if (c.threads > 0) {
        kv.set("run.threads", std::to_string(c.threads));
    }
    if (c.deterministic) {
        kv.set("run.deterministic", "1");
    }
    RunConfig cfg;
    cfg.apply(kv);
    const bool det = kv.values().count("run.deterministic") && cfg.train.deterministic;
    thread_count() = det ? 1 : cfg.threads;
    if (kv_out) {
        *kv_out = kv;
    }
    return cfg;
}

void print_metrics(const MetricsReport &r) { write_report_tsv(std::cout, r); }

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"SEP-GCN location recommender"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("-c,--config", common.config_path, "key = value config file");
        sub->add_option("-s,--set", common.overrides, "override, key=value (repeatable)");
        sub->add_option("--threads", common.threads, "worker threads");
        sub->add_flag("--deterministic", common.deterministic, "single thread, wallclock column zeroed");
    };

    CLI::App *prepare = app.add_subcommand("prepare", "parse raw check-ins, filter, split, write the snapshot");
    add_common(prepare);
    std::string name = "dataset";
    prepare->add_option("--name", name, "dataset name in the stats table");

    CLI::App *build = app.add_subcommand("build-sep", "build the similar-edge-pair matrix");
    add_common(build);
    bool brute = false;
    build->add_flag("--brute-force", brute, "use the double-loop reference builder");

    CLI::App *trainc = app.add_subcommand("train", "train and write checkpoint and log");
    add_common(trainc);

    CLI::App *evalc = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(evalc);

    CLI::App *sweepc = app.add_subcommand("sweep", "train and evaluate over one axis");
    add_common(sweepc);
    std::string axis;
    std::vector<std::string> values;
    std::string sweep_out;
    sweepc->add_option("--axis", axis, "layers, alpha, beta or kcore")->required();
    sweepc->add_option("--values", values, "axis values")->required()->delimiter(',');
    sweepc->add_option("-o,--out", sweep_out, "combined report path (default: stdout)");

    CLI::App *oracle = app.add_subcommand("oracle-check", "compare optimised code with brute-force references");
    std::uint64_t oracle_seed = 2024;
    oracle->add_option("--seed", oracle_seed, "instance seed");

    CLI::App *synth = app.add_subcommand("synth", "write a generated city as raw check-ins");
    SynthConfig sc;
    std::string synth_out;
    synth->add_option("-o,--out", synth_out, "output path")->required();
    synth->add_option("--users", sc.n_users);
    synth->add_option("--items", sc.n_items);
    synth->add_option("--checkins", sc.n_checkins);
    synth->add_option("--regions", sc.n_regions);
    synth->add_option("--seed", sc.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (*prepare) {
            const RunConfig cfg = load_config(common);
            const Prepared p = cmd_prepare(cfg);
            std::cout << format_stats_table(name, p.stats);
            std::cout << "snapshot " << cfg.snapshot_path << " checksum " << p.checksum;
            if (p.rejected_lines) {
                std::cout << " (" << p.rejected_lines << " lines rejected)";
            }
            std::cout << '\n';
        } else if (*build) {
            const RunConfig cfg = load_config(common);
            const SepBuild b = cmd_build_sep(cfg, brute);
            std::cout << "edges " << b.raw.n << " candidates " << b.report.candidate_pairs << " pairs "
                      << b.report.stored_pairs << " isolated " << b.report.isolated_edges << " density "
                      << format_double(b.report.density) << " median_km " << format_double(b.report.median_km)
                      << " cutoff_km " << format_double(b.report.cutoff_km) << '\n';
            if (b.report.stored_pairs == 0) {
                std::cerr << "warning: SEP matrix is empty; propagation reduces to the graph-only model\n";
            }
        } else if (*trainc) {
            const RunConfig cfg = load_config(common);
            std::string notice;
            const Trained t = cmd_train(cfg, &notice);
            if (!notice.empty()) {
                std::cerr << "notice: " << notice << '\n';
            }
            if (!t.result.log.empty()) {
                write_train_log(std::cout, {t.result.log.back()});
            }
            std::cout << "best epoch " << t.result.best_epoch << " recall@20 " << detail::fixed(t.result.best_recall20)
                      << " stop " << t.result.stop_reason << '\n';
        } else if (*evalc) {
            const RunConfig cfg = load_config(common);
            std::string notice;
            const MetricsReport r = cmd_eval(cfg, &notice);
            if (!notice.empty()) {
                std::cerr << "notice: " << notice << '\n';
            }
            print_metrics(r);
        } else if (*sweepc) {
            KeyValues kv;
            const RunConfig cfg = load_config(common, &kv);
            const auto raw = load_raw(cfg);
            const auto rows = sweep(raw, kv, axis, values);
            if (sweep_out.empty()) {
                write_sweep_tsv(std::cout, rows);
            } else {
                std::ostringstream os;
                write_sweep_tsv(os, rows);
                write_file(sweep_out, os.str());
            }
        } else if (*oracle) {
            if (!oracle::run_all(std::cout, oracle_seed)) {
                return 4;
            }
        } else if (*synth) {
            std::ostringstream os;
            write_checkins_tsv(os, generate_city(sc));
            write_file(synth_out, os.str());
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
