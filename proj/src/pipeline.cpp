#include "adadrug/pipeline.hpp"

#include "adadrug/error.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>

namespace adadrug {

namespace {

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

DomainBundle restrict_bundle(const DomainBundle& b, std::span<const std::string> genes) {
    DomainBundle out;
    for (const auto& s : b.sources) out.sources.push_back({s.expr.restrict_genes(genes), s.labels});
    out.target = b.target.restrict_genes(genes);
    return out;
}

ExpressionMatrix pooled_sources(const DomainBundle& b) {
    ExpressionMatrix pooled;
    pooled.gene_names = b.gene_names();
    std::vector<Matrix> parts;
    for (std::size_t k = 0; k < b.sources.size(); ++k) {
        for (const auto& id : b.sources[k].expr.sample_ids) pooled.sample_ids.push_back(std::to_string(k) + ":" + id);
        parts.push_back(b.sources[k].expr.values);
    }
    pooled.values = vstack(parts);
    return pooled;
}

}  // namespace

RunConfig with_absolute_paths(RunConfig cfg, const std::filesystem::path& base_dir) {
    auto fix = [&](std::filesystem::path& p) {
        if (!p.empty()) p = std::filesystem::absolute(resolve(p, base_dir)).lexically_normal();
    };
    for (auto& s : cfg.sources) {
        fix(s.expression);
        fix(s.labels);
    }
    fix(cfg.target_expression);
    fix(cfg.target_labels);
    fix(cfg.genes.file);
    return cfg;
}

std::vector<std::string> select_genes(const RunConfig& cfg, const DomainBundle& aligned,
                                      const std::filesystem::path& base_dir) {
    const std::string& method = cfg.genes.method;
    if (method == "none") return aligned.gene_names();
    if (method == "file") {
        const auto list = load_gene_list(resolve(cfg.genes.file, base_dir));
        return select_from_list(aligned.target, list).genes;
    }
    const ExpressionMatrix pooled = pooled_sources(aligned);
    if (method == "hvg") return select_hvg(pooled, cfg.genes.n_top).genes;

    std::vector<std::size_t> sens, res;
    std::size_t row = 0;
    for (const auto& s : aligned.sources) {
        for (int y : s.labels) (y == 1 ? sens : res).push_back(row++);
    }
    auto genes = select_deg(pooled.select_samples(sens), pooled.select_samples(res), cfg.genes.lfc_min,
                            cfg.genes.p_max)
                     .genes;
    if (genes.empty()) throw DataError("DEG selection kept no genes; relax lfc_min or p_max");
    return genes;
}

RunData load_run_data(const RunConfig& cfg, const std::filesystem::path& base_dir) {
    if (cfg.sources.empty()) throw ValidationError("/sources", "at least one source domain is required");
    if (cfg.target_expression.empty()) throw ValidationError("/target/expression", "required field missing");

    std::vector<LabeledDomain> sources;
    for (const auto& s : cfg.sources) {
        sources.push_back(
            attach_labels(load_expression(resolve(s.expression, base_dir)), load_labels(resolve(s.labels, base_dir))));
    }
    ExpressionMatrix target = load_expression(resolve(cfg.target_expression, base_dir));
    RunData data;
    if (!cfg.target_labels.empty()) {
        data.target_labels = attach_labels(target, load_labels(resolve(cfg.target_labels, base_dir))).labels;
    }
    DomainBundle bundle = align_bundle(std::move(sources), std::move(target));

    if (cfg.max_zero_frac) {
        std::vector<ExpressionMatrix> all;
        for (const auto& s : bundle.sources) all.push_back(s.expr);
        all.push_back(bundle.target);
        const auto kept = genes_below_zero_fraction(all, *cfg.max_zero_frac);
        if (kept.empty()) throw DataError("no gene passes the zero-fraction filter");
        bundle = restrict_bundle(bundle, kept);
    }
    const auto genes = select_genes(cfg, bundle, base_dir);
    data.bundle = genes.size() == bundle.genes() && genes == bundle.gene_names() ? std::move(bundle)
                                                                                 : restrict_bundle(bundle, genes);
    data.bundle.validate();
    return data;
}

RunSummary run_training(const RunConfig& cfg, const RunData& data, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunSummary s;
    s.config_hash = config_hash(config_to_json(cfg));
    write_config(out_dir / RunFiles::config, cfg);
    save_gene_list(out_dir / RunFiles::genes, data.bundle.gene_names());

    s.result = train(data.bundle, cfg.train);
    s.result.history.write_csv(out_dir / RunFiles::history);
    {
        std::ofstream out(out_dir / RunFiles::epochs);
        if (!out) throw DataError("cannot write " + (out_dir / RunFiles::epochs).string());
        out << std::setprecision(17) << "epoch,seconds,discriminator_accuracy,holdout_auroc\n";
        for (const auto& e : s.result.history.epochs) {
            out << e.epoch << ',' << e.seconds << ',' << e.discriminator_accuracy << ',' << e.holdout_auroc << '\n';
        }
    }
    save_checkpoint(out_dir / RunFiles::checkpoint, s.result.model, cfg.train, s.result.history.final_step);

    const PredictOptions popts{cfg.reference_samples, cfg.train.seed};
    s.target_scores = predict_target(s.result.model, data.bundle.target.values, data.bundle.sources, popts);
    write_scores(out_dir / RunFiles::scores, data.bundle.target.sample_ids, s.target_scores, data.target_labels);

    if (!data.target_labels.empty()) {
        s.metrics = evaluate_scores(s.target_scores, data.target_labels);
        s.metrics_split = "target";
    } else {
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& src : data.bundle.sources) {
            const auto p = predict_target(s.result.model, src.expr.values, data.bundle.sources, popts);
            scores.insert(scores.end(), p.begin(), p.end());
            labels.insert(labels.end(), src.labels.begin(), src.labels.end());
        }
        s.metrics = evaluate_scores(scores, labels);
        s.metrics_split = "sources";
    }
    write_metrics(out_dir / RunFiles::metrics, s.metrics, s.config_hash, s.metrics_split);
    return s;
}

BenchmarkReport run_variants(const RunConfig& cfg, const RunData& data, std::span<const VariantSpec> variants,
                             std::span<const std::uint64_t> seeds, std::size_t threads) {
    if (data.target_labels.empty()) {
        throw DataError("comparing variants needs target labels (target.labels in the config)");
    }
    BenchmarkReport report;
    const std::size_t n_jobs = variants.size() * seeds.size();
    report.runs.resize(n_jobs);
    run_parallel(n_jobs, threads ? threads : env_threads(), [&](std::size_t i) {
        const VariantSpec& v = variants[i % variants.size()];
        const std::uint64_t seed = seeds[i / variants.size()];
        const DomainBundle bundle = variant_bundle(data.bundle, v);
        TrainConfig tc = variant_config(cfg.train, v);
        tc.seed = seed;
        const TrainResult r = train(bundle, tc);
        const auto scores =
            predict_target(r.model, bundle.target.values, bundle.sources, {cfg.reference_samples, seed});
        const MetricsReport m = evaluate_scores(scores, data.target_labels);
        report.runs[i] = {v, seed, m.auroc, m.aupr, 0.0};
    });
    summarize(report, variants);
    return report;
}

}  // namespace adadrug
