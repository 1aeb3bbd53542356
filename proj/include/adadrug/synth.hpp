#pragma once

#include "adadrug/data.hpp"
#include "adadrug/eval.hpp"
#include "adadrug/train.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adadrug {

struct SynthConfig {
    std::size_t sources = 3;  // K
    std::size_t n_per_domain = 400;
    std::size_t n_target = 400;
    std::size_t genes = 60;
    std::size_t signal_dim = 8;
    double sigma_shift = 1.0;
    double sigma_noise = 0.3;
    double rho = 0.35;  // expected positive fraction
    std::uint64_t seed = 0;

    void validate() const;
};

/// Generated domains plus the target labels, which stay private: callers can only
/// score predictions against them.
class SynthBundle {
public:
    SynthBundle(DomainBundle bundle, std::vector<int> target_labels);

    const DomainBundle& bundle() const { return bundle_; }
    MetricsReport evaluate(std::span<const double> target_scores) const;

private:
    DomainBundle bundle_;
    std::vector<int> target_labels_;
};

/// u ~ N(0, I_s); y = 1 iff <beta, u> > Phi^-1(1 - rho); x = A_dom u + b_dom + noise,
/// where every domain (target included) perturbs a shared base map by sigma_shift.
SynthBundle generate(const SynthConfig& cfg);

enum class Variant : std::uint8_t { Full, Baseline, WithoutMda, WithoutInd, WithoutAwg };

/// A variant, optionally restricted to the first `sources` source domains.
/// Text form: full | baseline | wo_mda | wo_ind | wo_awg, with an optional "@K" suffix.
struct VariantSpec {
    Variant variant = Variant::Full;
    std::optional<std::size_t> sources;

    std::string name() const;
    static VariantSpec parse(const std::string& text);
    bool operator==(const VariantSpec&) const = default;
};

const char* variant_name(Variant v);
/// The four ablation-table rows: wo_mda, wo_ind, wo_awg, full.
std::vector<VariantSpec> ablation_variants();

/// Applies a variant to a bundle and config: source restriction and objective flags.
DomainBundle variant_bundle(const DomainBundle& bundle, const VariantSpec& v);
TrainConfig variant_config(const TrainConfig& base, const VariantSpec& v);

/// Training settings sized for the synthetic benchmark on one core.
TrainConfig bench_train_config();

struct BenchmarkRun {
    VariantSpec variant;
    std::uint64_t seed = 0;
    double auroc = 0.0;
    double aupr = 0.0;
    double seconds = 0.0;
};

struct BenchmarkRow {
    VariantSpec variant;
    std::size_t n = 0;
    double auroc_mean = 0.0;
    double auroc_sd = 0.0;
    double aupr_mean = 0.0;
    double aupr_sd = 0.0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRun> runs;
    std::vector<BenchmarkRow> rows;  // one per variant, in request order

    const BenchmarkRow& row(const std::string& variant_name) const;
    void write_csv(const std::filesystem::path& path) const;
    void write_runs_csv(const std::filesystem::path& path) const;
    std::string to_json() const;
};

struct BenchmarkOptions {
    TrainConfig train = bench_train_config();
    std::size_t reference_samples = 128;
    /// Worker threads; 0 reads ADADRUG_THREADS and defaults to 1.
    std::size_t threads = 0;
};

/// For each seed: generate with synth.seed = seed, train every variant with that seed,
/// score the hidden target labels. Runs are independent and may use several threads.
BenchmarkReport run_benchmark(const SynthConfig& synth, std::span<const VariantSpec> variants,
                              std::span<const std::uint64_t> seeds, const BenchmarkOptions& opts = {});

/// Thread count from ADADRUG_THREADS (at least 1).
std::size_t env_threads();

/// Calls job(0..n_jobs-1) on up to `threads` workers; the first exception is rethrown.
void run_parallel(std::size_t n_jobs, std::size_t threads, const std::function<void(std::size_t)>& job);

/// Rebuilds report.rows (mean and sample sd per variant) from report.runs.
void summarize(BenchmarkReport& report, std::span<const VariantSpec> variants);

}  // namespace adadrug
