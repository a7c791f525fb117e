// Paired SEP-GCN / LightGCN comparison on a generated city.
//
//   desk_scale [seeds] [key=value ...]

#include "sepgcn/pipeline.hpp"
#include "sepgcn/synthetic.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace sepgcn;

int main(int argc, char **argv) {
    const std::size_t seeds = argc > 1 ? std::stoul(argv[1]) : 5;
    KeyValues kv;
    SynthConfig synth;
    for (int a = 2; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg.rfind("synth.", 0) == 0) {
            const auto eq = arg.find('=');
            const std::string k = arg.substr(6, eq - 6);
            const double v = std::stod(arg.substr(eq + 1));
            if (k == "regions") synth.n_regions = static_cast<std::size_t>(v);
            else if (k == "profiles") synth.n_profiles = static_cast<std::size_t>(v);
            else if (k == "spread") synth.region_spread_km = v;
            else if (k == "loyalty") synth.region_loyalty = v;
            else if (k == "routine") synth.routine_loyalty = v;
            else if (k == "skew") synth.popularity_skew = v;
            else if (k == "revisit") synth.revisit = v;
            else if (k == "seed") synth.seed = static_cast<std::uint64_t>(v);
            continue;
        }
        kv.set_override(arg);
    }
    const auto raw = generate_city(synth);
    const auto t0 = std::chrono::steady_clock::now();
    double mean[2] = {0, 0};
    for (std::size_t s = 0; s < seeds; ++s) {
        for (int v = 0; v < 2; ++v) {
            KeyValues run = kv;
            run.set("run.seed", std::to_string(s + 1));
            run.set("run.variant", v == 0 ? "sepgcn" : "lightgcn");
            RunConfig cfg;
            cfg.apply(run);
            const Prepared prep = prepare_records(raw, cfg);
            std::optional<SepBuild> sep;
            if (v == 0) {
                sep = build_sep(prep.dataset, cfg);
            }
            const Trained t = train_run(prep.dataset, cfg, sep ? &sep->raw : nullptr);
            const double r20 = t.report.at(20).recall;
            mean[v] += r20 / static_cast<double>(seeds);
            std::printf("seed %zu %-8s recall@20 %.4f ndcg@20 %.4f epoch %zu/%zu%s %.0fs\n", s + 1,
                        v == 0 ? "sepgcn" : "lightgcn", r20, t.report.at(20).ndcg, t.result.best_epoch,
                        t.result.epochs_run,
                        sep ? (" pairs " + std::to_string(sep->report.stored_pairs) + " edges " +
                               std::to_string(prep.stats.n_train))
                                  .c_str()
                            : "",
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            std::fflush(stdout);
        }
    }
    std::printf("mean recall@20 sepgcn %.4f lightgcn %.4f relative %+.2f%%\n", mean[0], mean[1],
                100.0 * (mean[0] - mean[1]) / mean[1]);
}
