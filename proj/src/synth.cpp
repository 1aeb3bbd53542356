#include "adadrug/synth.hpp"

#include "adadrug/error.hpp"
#include "adadrug/rng.hpp"

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <thread>

namespace adadrug {

void SynthConfig::validate() const {
    if (sources == 0 || n_per_domain == 0 || n_target == 0 || genes == 0 || signal_dim == 0) {
        throw ValidationError("/", "synthetic counts must be positive");
    }
    if (!(sigma_shift >= 0.0) || !(sigma_noise >= 0.0)) {
        throw ValidationError("/", "sigma values must be non-negative");
    }
    if (!(rho > 0.0 && rho < 1.0)) {
        throw ValidationError("/rho", "rho must lie in (0, 1)");
    }
}

SynthBundle::SynthBundle(DomainBundle bundle, std::vector<int> target_labels)
    : bundle_(std::move(bundle)), target_labels_(std::move(target_labels)) {
    if (target_labels_.size() != bundle_.target.samples()) {
        throw ShapeError("hidden label count differs from target sample count");
    }
}

MetricsReport SynthBundle::evaluate(std::span<const double> target_scores) const {
    return evaluate_scores(target_scores, target_labels_);
}

namespace {

struct DomainDraw {
    Matrix x;
    std::vector<int> y;
};

DomainDraw draw_domain(const SynthConfig& cfg, const Matrix& a0, std::span<const double> b0,
                       std::span<const double> beta, double threshold, std::size_t n, std::uint64_t domain) {
    const std::size_t g = cfg.genes, s = cfg.signal_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(s));

    Rng shift_rng = make_rng(cfg.seed, {0x73686966, domain});
    Matrix a = a0;
    std::vector<double> b(b0.begin(), b0.end());
    for (double& v : a.values()) v += cfg.sigma_shift * scale * normal01(shift_rng);
    for (double& v : b) v += cfg.sigma_shift * normal01(shift_rng);

    Rng rng = make_rng(cfg.seed, {0x73616d70, domain});
    DomainDraw out{Matrix(n, g), std::vector<int>(n)};
    std::vector<double> u(s);
    for (std::size_t i = 0; i < n; ++i) {
        double proj = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            u[j] = normal01(rng);
            proj += beta[j] * u[j];
        }
        out.y[i] = proj > threshold ? 1 : 0;
        auto row = out.x.row(i);
        for (std::size_t r = 0; r < g; ++r) {
            double v = b[r];
            for (std::size_t j = 0; j < s; ++j) v += a(r, j) * u[j];
            row[r] = v + cfg.sigma_noise * normal01(rng);
        }
    }
    return out;
}

ExpressionMatrix named(Matrix x, const std::string& prefix, const std::vector<std::string>& genes) {
    ExpressionMatrix m;
    m.values = std::move(x);
    m.gene_names = genes;
    m.sample_ids.reserve(m.values.rows());
    for (std::size_t i = 0; i < m.values.rows(); ++i) m.sample_ids.push_back(prefix + "_" + std::to_string(i));
    return m;
}

}  // namespace

SynthBundle generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t g = cfg.genes, s = cfg.signal_dim;
    Rng base = make_rng(cfg.seed, {0x62617365});

    std::vector<double> beta(s);
    double norm = 0.0;
    for (double& v : beta) {
        v = normal01(base);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : beta) v /= norm;
    const double threshold = boost::math::quantile(boost::math::normal(), 1.0 - cfg.rho);

    const double scale = 1.0 / std::sqrt(static_cast<double>(s));
    Matrix a0(g, s);
    for (double& v : a0.values()) v = scale * normal01(base);
    std::vector<double> b0(g);
    for (double& v : b0) v = normal01(base);

    std::vector<std::string> genes;
    for (std::size_t r = 0; r < g; ++r) genes.push_back("g" + std::to_string(r));

    DomainBundle bundle;
    for (std::size_t k = 0; k < cfg.sources; ++k) {
        DomainDraw d = draw_domain(cfg, a0, b0, beta, threshold, cfg.n_per_domain, k);
        bundle.sources.push_back({named(std::move(d.x), "s" + std::to_string(k), genes), std::move(d.y)});
    }
    DomainDraw t = draw_domain(cfg, a0, b0, beta, threshold, cfg.n_target, cfg.sources);
    bundle.target = named(std::move(t.x), "t", genes);
    return SynthBundle(std::move(bundle), std::move(t.y));
}

// ---------------------------------------------------------------------------

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::Baseline: return "baseline";
        case Variant::WithoutMda: return "wo_mda";
        case Variant::WithoutInd: return "wo_ind";
        case Variant::WithoutAwg: return "wo_awg";
    }
    return "?";
}

std::string VariantSpec::name() const {
    std::string n = variant_name(variant);
    if (sources) n += "@" + std::to_string(*sources);
    return n;
}

VariantSpec VariantSpec::parse(const std::string& text) {
    VariantSpec v;
    std::string head = text;
    if (const auto at = text.find('@'); at != std::string::npos) {
        head = text.substr(0, at);
        const std::string count = text.substr(at + 1);
        if (count.empty() || !std::all_of(count.begin(), count.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            throw ValidationError("/variants", "bad source count in variant '" + text + "'");
        }
        v.sources = std::stoul(count);
        if (*v.sources == 0) throw ValidationError("/variants", "variant '" + text + "' needs at least one source");
    }
    for (Variant c : {Variant::Full, Variant::Baseline, Variant::WithoutMda, Variant::WithoutInd, Variant::WithoutAwg}) {
        if (head == variant_name(c)) {
            v.variant = c;
            return v;
        }
    }
    throw ValidationError("/variants", "unknown variant '" + text + "' (full, baseline, wo_mda, wo_ind, wo_awg)");
}

std::vector<VariantSpec> ablation_variants() {
    return {{Variant::WithoutMda, {}}, {Variant::WithoutInd, {}}, {Variant::WithoutAwg, {}}, {Variant::Full, {}}};
}

DomainBundle variant_bundle(const DomainBundle& bundle, const VariantSpec& v) {
    std::size_t k = bundle.sources.size();
    if (v.variant == Variant::Baseline) k = 1;
    if (v.sources) k = *v.sources;
    if (k > bundle.sources.size()) {
        throw ValidationError("/variants", "variant " + v.name() + " asks for " + std::to_string(k) + " sources, only " +
                                               std::to_string(bundle.sources.size()) + " available");
    }
    DomainBundle out;
    out.sources.assign(bundle.sources.begin(), bundle.sources.begin() + static_cast<std::ptrdiff_t>(k));
    out.target = bundle.target;
    return out;
}

TrainConfig variant_config(const TrainConfig& base, const VariantSpec& v) {
    TrainConfig cfg = base;
    cfg.flags = {};
    switch (v.variant) {
        case Variant::Full: break;
        case Variant::Baseline: cfg.flags.awg = false; break;
        case Variant::WithoutMda: cfg.flags.mda = false; break;
        case Variant::WithoutInd: cfg.flags.ind = false; break;
        case Variant::WithoutAwg: cfg.flags.awg = false; break;
    }
    return cfg;
}

TrainConfig bench_train_config() {
    TrainConfig cfg;
    cfg.latent_dim = 32;
    cfg.encoder_hidden = {64};
    cfg.decoder_hidden = {64};
    cfg.generator_hidden = {32};
    cfg.discriminator_hidden = {32};
    cfg.predictor_hidden = {32};
    cfg.generator_output = Activation::Sigmoid;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 64;
    cfg.epochs = 60;
    return cfg;
}

// ---------------------------------------------------------------------------

const BenchmarkRow& BenchmarkReport::row(const std::string& variant_name) const {
    for (const auto& r : rows) {
        if (r.variant.name() == variant_name) return r;
    }
    throw ContractError("no benchmark row for variant " + variant_name);
}

void BenchmarkReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << std::setprecision(17) << "variant,n,auroc_mean,auroc_sd,aupr_mean,aupr_sd\n";
    for (const auto& r : rows) {
        out << r.variant.name() << ',' << r.n << ',' << r.auroc_mean << ',' << r.auroc_sd << ',' << r.aupr_mean << ','
            << r.aupr_sd << '\n';
    }
}

void BenchmarkReport::write_runs_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << std::setprecision(17) << "variant,seed,auroc,aupr\n";
    for (const auto& r : runs) out << r.variant.name() << ',' << r.seed << ',' << r.auroc << ',' << r.aupr << '\n';
}

std::string BenchmarkReport::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        j.push_back({{"variant", r.variant.name()},
                     {"n", r.n},
                     {"auroc_mean", r.auroc_mean},
                     {"auroc_sd", r.auroc_sd},
                     {"aupr_mean", r.aupr_mean},
                     {"aupr_sd", r.aupr_sd}});
    }
    return j.dump(2);
}

std::size_t env_threads() {
    if (const char* s = std::getenv("ADADRUG_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

void run_parallel(std::size_t n_jobs, std::size_t threads, const std::function<void(std::size_t)>& job) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n_jobs; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_jobs;
            }
        }
    };
    const std::size_t n_threads = std::min(std::max<std::size_t>(threads, 1), n_jobs);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

void summarize(BenchmarkReport& report, std::span<const VariantSpec> variants) {
    report.rows.clear();
    for (const VariantSpec& v : variants) {
        std::vector<double> au, ap;
        for (const auto& run : report.runs) {
            if (run.variant != v) continue;
            au.push_back(run.auroc);
            ap.push_back(run.aupr);
        }
        BenchmarkRow row;
        row.variant = v;
        row.n = au.size();
        if (!au.empty()) {
            std::tie(row.auroc_mean, row.auroc_sd) = mean_sd(au);
            std::tie(row.aupr_mean, row.aupr_sd) = mean_sd(ap);
        }
        report.rows.push_back(row);
    }
}

BenchmarkReport run_benchmark(const SynthConfig& synth, std::span<const VariantSpec> variants,
                              std::span<const std::uint64_t> seeds, const BenchmarkOptions& opts) {
    if (variants.empty()) throw ContractError("run_benchmark needs at least one variant");
    if (seeds.empty()) throw ContractError("run_benchmark needs at least one seed");
    synth.validate();
    opts.train.validate();

    BenchmarkReport report;
    report.runs.resize(variants.size() * seeds.size());
    run_parallel(report.runs.size(), opts.threads ? opts.threads : env_threads(), [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const VariantSpec& v = variants[i % variants.size()];
        const std::uint64_t seed = seeds[i / variants.size()];
        SynthConfig sc = synth;
        sc.seed = seed;
        const SynthBundle data = generate(sc);
        const DomainBundle bundle = variant_bundle(data.bundle(), v);
        TrainConfig tc = variant_config(opts.train, v);
        tc.seed = seed;
        const TrainResult result = train(bundle, tc);
        const auto scores =
            predict_target(result.model, bundle.target.values, bundle.sources, {opts.reference_samples, seed});
        const MetricsReport m = data.evaluate(scores);
        report.runs[i] = {v, seed, m.auroc, m.aupr,
                          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
    });
    summarize(report, variants);
    return report;
}

}  // namespace adadrug
