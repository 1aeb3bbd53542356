// adadrug command-line interface.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 runtime failure.

#include "adadrug/config.hpp"
#include "adadrug/error.hpp"
#include "adadrug/eval.hpp"
#include "adadrug/pipeline.hpp"
#include "adadrug/synth.hpp"
#include "adadrug/train.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace adadrug;

namespace {

struct TrainOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<double> learning_rate;
    std::optional<std::string> sampler;
    std::optional<double> holdout;
    std::optional<double> max_zero_frac;
    std::optional<std::size_t> references;
    std::optional<std::string> out;

    void add_to(CLI::App* app, bool with_out = true) {
        app->add_option("--seed", seed, "Seed for every random draw");
        app->add_option("--epochs", epochs, "Training epochs");
        app->add_option("--batch-size", batch_size, "Tuples per batch");
        app->add_option("--lr", learning_rate, "Adam learning rate");
        app->add_option("--sampler", sampler, "Source upsampler: weight, smote or none");
        app->add_option("--holdout", holdout, "Fraction of each source held out for monitoring");
        app->add_option("--max-zero-frac", max_zero_frac, "Drop genes with a larger fraction of zeros in any domain");
        app->add_option("--references", references, "Reference rows per source for target weighting (0 = all)");
        if (with_out) app->add_option("--out", out, "Output directory");
    }

    // Flags win over the config file. Values go back through the JSON schema so
    // range errors report the same pointers as the file.
    RunConfig apply(RunConfig cfg) const {
        Json j = config_to_json(cfg);
        if (seed) j["seed"] = *seed;
        if (epochs) j["epochs"] = *epochs;
        if (batch_size) j["batch_size"] = *batch_size;
        if (learning_rate) j["learning_rate"] = *learning_rate;
        if (sampler) j["sampler"] = *sampler;
        if (holdout) j["holdout_fraction"] = *holdout;
        if (max_zero_frac) j["max_zero_frac"] = *max_zero_frac;
        if (references) j["reference_samples"] = *references;
        if (out) j["output_dir"] = *out;
        return parse_config(j);
    }
};

fs::path base_dir(const std::string& config_path) { return fs::absolute(config_path).parent_path(); }

std::vector<std::uint64_t> parse_seeds(const std::string& text) try {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        if (const auto dash = item.find('-'); dash != std::string::npos && dash > 0) {
            const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
            if (hi < lo) throw ValidationError("/seeds", "empty seed range '" + item + "'");
            for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        } else {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) throw ValidationError("/seeds", "bad seed '" + item + "'");
        }
        pos = comma + 1;
    }
    return seeds;
} catch (const std::logic_error&) {
    throw ValidationError("/seeds", "bad seed list '" + text + "'");
}

std::vector<VariantSpec> parse_variants(const std::string& text) {
    std::vector<VariantSpec> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        out.push_back(VariantSpec::parse(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

void print_table(const BenchmarkReport& r) {
    std::printf("%-12s %4s  %-17s %-17s\n", "variant", "n", "auroc", "aupr");
    for (const auto& row : r.rows) {
        std::printf("%-12s %4zu  %.4f +/- %.4f   %.4f +/- %.4f\n", row.variant.name().c_str(), row.n, row.auroc_mean,
                    row.auroc_sd, row.aupr_mean, row.aupr_sd);
    }
}

void write_report(const BenchmarkReport& r, const fs::path& dir, const std::string& stem) {
    fs::create_directories(dir);
    r.write_csv(dir / (stem + ".csv"));
    r.write_runs_csv(dir / (stem + "_runs.csv"));
    std::ofstream(dir / (stem + ".json")) << r.to_json() << '\n';
}

// ---------------------------------------------------------------------------

int cmd_prep(const std::string& config_path, const TrainOverrides& ov, const std::string& gene_sets) {
    const RunConfig cfg = ov.apply(load_config(config_path));
    const RunData data = load_run_data(cfg, base_dir(config_path));
    const fs::path out = ov.out ? fs::path(*ov.out) : cfg.output_dir / "prep";
    fs::create_directories(out);

    auto transform = [&](const ExpressionMatrix& m) {
        return gene_sets.empty() ? m : pathway_activity(m, load_gene_sets(gene_sets)).activity;
    };
    RunConfig prepared = cfg;
    prepared.genes = {};
    prepared.max_zero_frac.reset();
    prepared.sources.clear();
    for (std::size_t k = 0; k < data.bundle.sources.size(); ++k) {
        const auto& s = data.bundle.sources[k];
        const std::string stem = "source_" + std::to_string(k);
        save_expression(out / (stem + ".csv"), transform(s.expr));
        save_labels(out / (stem + "_labels.csv"), s.expr.sample_ids, s.labels);
        prepared.sources.push_back({stem + ".csv", stem + "_labels.csv"});
    }
    const ExpressionMatrix target = transform(data.bundle.target);
    save_expression(out / "target.csv", target);
    prepared.target_expression = "target.csv";
    prepared.target_labels.clear();
    if (!data.target_labels.empty()) {
        save_labels(out / "target_labels.csv", data.bundle.target.sample_ids, data.target_labels);
        prepared.target_labels = "target_labels.csv";
    }
    save_gene_list(out / "genes.txt", target.gene_names);
    write_config(out / "config.json", prepared);
    std::printf("prepared %zu source domain(s), %zu target samples, %zu features -> %s\n", data.bundle.sources.size(),
                target.samples(), target.genes(), out.string().c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const TrainOverrides& ov) {
    const RunConfig cfg = with_absolute_paths(ov.apply(load_config(config_path)), base_dir(config_path));
    const RunData data = load_run_data(cfg, {});
    const RunSummary s = run_training(cfg, data, cfg.output_dir);
    std::printf("trained %zu steps; %s auroc %.4f aupr %.4f -> %s\n", s.result.history.final_step,
                s.metrics_split.c_str(), s.metrics.auroc, s.metrics.aupr, cfg.output_dir.string().c_str());
    return 0;
}

int cmd_predict(const std::string& config_path, const std::string& checkpoint, const TrainOverrides& ov,
                const std::string& target_path, const std::string& scores_path, const std::string& embeddings_path) {
    const RunConfig cfg = ov.apply(load_config(config_path));
    const Checkpoint ck = load_checkpoint(checkpoint);
    const RunData data = load_run_data(cfg, base_dir(config_path));
    ExpressionMatrix target =
        target_path.empty() ? data.bundle.target : load_expression(target_path).restrict_genes(data.bundle.gene_names());
    if (target.genes() != ck.model.genes()) {
        throw DataError("checkpoint expects " + std::to_string(ck.model.genes()) + " genes, data has " +
                        std::to_string(target.genes()));
    }
    const PredictOptions popts{cfg.reference_samples, cfg.train.seed};
    const auto scores = predict_target(ck.model, target.values, data.bundle.sources, popts);
    const fs::path out = scores_path.empty() ? cfg.output_dir / "predictions.csv" : fs::path(scores_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_scores(out, target.sample_ids, scores, target_path.empty() ? data.target_labels : std::vector<int>{});
    if (!embeddings_path.empty()) {
        export_embeddings(embeddings_path, ck.model, target, ck.model.weighted, data.bundle.sources, popts);
    }
    std::printf("scored %zu samples -> %s\n", scores.size(), out.string().c_str());
    return 0;
}

int cmd_evaluate(const std::string& scores_path, const std::string& labels_path, const std::string& out_path,
                 const std::string& config_path) {
    const ScoreTable t = read_scores(scores_path);
    std::vector<int> labels = t.labels;
    if (!labels_path.empty()) {
        ExpressionMatrix ids;
        ids.sample_ids = t.sample_ids;
        ids.values = Matrix(t.sample_ids.size(), 0);
        labels = attach_labels(ids, load_labels(labels_path)).labels;
    }
    if (labels.empty()) throw DataError("no labels: pass --labels or a scores file with a label column");
    const MetricsReport m = evaluate_scores(t.scores, labels);
    const std::string hash = config_path.empty() ? "" : config_hash(config_to_json(load_config(config_path)));
    if (!out_path.empty()) write_metrics(out_path, m, hash);
    std::printf("%s\n", metrics_json(m, hash).c_str());
    return 0;
}

int cmd_ablate(const std::string& config_path, const TrainOverrides& ov, const std::string& seeds_text) {
    const RunConfig cfg = ov.apply(load_config(config_path));
    const RunData data = load_run_data(cfg, base_dir(config_path));
    const auto variants = ablation_variants();
    const auto seeds = seeds_text.empty() ? std::vector<std::uint64_t>{cfg.train.seed} : parse_seeds(seeds_text);
    const BenchmarkReport r = run_variants(cfg, data, variants, seeds);
    write_report(r, cfg.output_dir, "ablation");
    print_table(r);
    return 0;
}

struct SynthOptions {
    SynthConfig synth;
    std::optional<std::uint64_t> seed;
    std::string seeds;
    std::string variants = "full,baseline,wo_mda,wo_ind,wo_awg";
    std::string out = "synth-bench";
    std::string train_config;
    std::optional<std::size_t> epochs;
    std::size_t references = 128;
};

int cmd_synth_bench(const SynthOptions& o) {
    const auto variants = parse_variants(o.variants);
    std::vector<std::uint64_t> seeds;
    if (!o.seeds.empty()) {
        seeds = parse_seeds(o.seeds);
    } else {
        seeds.push_back(o.seed.value_or(0));
    }
    BenchmarkOptions opts;
    if (!o.train_config.empty()) {
        std::ifstream in(o.train_config);
        if (!in) throw ValidationError("/", "cannot open " + o.train_config);
        Json j = train_config_to_json(opts.train);
        try {
            j.merge_patch(Json::parse(in));
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("/", std::string("invalid JSON: ") + e.what());
        }
        opts.train = train_config_from_json(j);
    }
    if (o.epochs) {
        opts.train.epochs = *o.epochs;
        opts.train.validate();
    }
    opts.reference_samples = o.references;
    const BenchmarkReport r = run_benchmark(o.synth, variants, seeds, opts);
    write_report(r, o.out, "report");
    std::ofstream(fs::path(o.out) / "train_config.json") << train_config_to_json(opts.train).dump(2) << '\n';
    print_table(r);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-source adversarial domain adaptation for drug-response prediction"};
    app.require_subcommand(1);

    std::string config_path, checkpoint, target_path, scores_path, embeddings_path, labels_path, out_path, seeds,
        gene_sets;
    TrainOverrides ov;

    auto* prep = app.add_subcommand("prep", "Align, filter and select genes; write model-ready tables");
    prep->add_option("--config", config_path, "Run config JSON")->required();
    prep->add_option("--gene-sets", gene_sets, "Gene-set file; writes pathway activities instead of genes");
    ov.add_to(prep);

    auto* train_cmd = app.add_subcommand("train", "Train a model and write a run directory");
    train_cmd->add_option("--config", config_path, "Run config JSON")->required();
    ov.add_to(train_cmd);

    auto* predict_cmd = app.add_subcommand("predict", "Score target samples with a checkpoint");
    predict_cmd->add_option("--config", config_path, "Run config JSON (source references, genes)")->required();
    predict_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    predict_cmd->add_option("--target", target_path, "Expression file to score instead of the config target");
    predict_cmd->add_option("--scores", scores_path, "Output scores CSV");
    predict_cmd->add_option("--embeddings", embeddings_path, "Also write embeddings CSV");
    ov.add_to(predict_cmd, false);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "AUROC and AUPR of a scores file");
    evaluate_cmd->add_option("--scores", scores_path, "Scores CSV")->required();
    evaluate_cmd->add_option("--labels", labels_path, "Label CSV keyed by sample id");
    evaluate_cmd->add_option("--out", out_path, "Metrics JSON output");
    evaluate_cmd->add_option("--config", config_path, "Config whose hash goes into the metrics");

    auto* ablate = app.add_subcommand("ablate", "Compare full, wo_mda, wo_ind and wo_awg on the config's data");
    ablate->add_option("--config", config_path, "Run config JSON")->required();
    ablate->add_option("--seeds", seeds, "Seeds, e.g. 0,1,2 or 0-4");
    ov.add_to(ablate);

    SynthOptions so;
    auto* bench = app.add_subcommand("synth-bench", "Variant comparison on generated multi-domain data");
    auto* seed_opt = bench->add_option("--seed", so.seed, "Single seed (data and training)");
    auto* seeds_opt = bench->add_option("--seeds", so.seeds, "Seeds, e.g. 0,1,2 or 0-4");
    seed_opt->excludes(seeds_opt);
    bench->add_option("--variants", so.variants, "Comma list of full, baseline, wo_mda, wo_ind, wo_awg (suffix @K)");
    bench->add_option("--out", so.out, "Report directory");
    bench->add_option("--train-config", so.train_config, "JSON with training settings to override");
    bench->add_option("--epochs", so.epochs, "Training epochs");
    bench->add_option("--references", so.references, "Reference rows per source for target weighting");
    bench->add_option("--sources", so.synth.sources, "Source domains K");
    bench->add_option("--n-per-domain", so.synth.n_per_domain, "Samples per source domain");
    bench->add_option("--n-target", so.synth.n_target, "Target samples");
    bench->add_option("--genes", so.synth.genes, "Observed genes");
    bench->add_option("--signal-dim", so.synth.signal_dim, "Latent signal dimension");
    bench->add_option("--shift", so.synth.sigma_shift, "Per-domain shift magnitude");
    bench->add_option("--noise", so.synth.sigma_noise, "Observation noise");
    bench->add_option("--rho", so.synth.rho, "Expected positive fraction");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*prep) return cmd_prep(config_path, ov, gene_sets);
        if (*train_cmd) return cmd_train(config_path, ov);
        if (*predict_cmd) return cmd_predict(config_path, checkpoint, ov, target_path, scores_path, embeddings_path);
        if (*evaluate_cmd) return cmd_evaluate(scores_path, labels_path, out_path, config_path);
        if (*ablate) return cmd_ablate(config_path, ov, seeds);
        if (*bench) return cmd_synth_bench(so);
    } catch (const ValidationError& e) {
        std::cerr << "error: invalid configuration at " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CheckpointError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
