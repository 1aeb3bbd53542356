#pragma once

#include "adadrug/config.hpp"
#include "adadrug/data.hpp"
#include "adadrug/eval.hpp"
#include "adadrug/synth.hpp"
#include "adadrug/train.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adadrug {

/// Data described by a RunConfig, aligned and restricted to the selected genes.
struct RunData {
    DomainBundle bundle;
    std::vector<int> target_labels;  // empty without a target label file
};

/// Copy of `cfg` with every input path made absolute against `base_dir`.
RunConfig with_absolute_paths(RunConfig cfg, const std::filesystem::path& base_dir);

/// Relative paths in `cfg` are taken relative to `base_dir`.
/// Order: load, align to shared genes, zero-fraction filter, gene selection.
RunData load_run_data(const RunConfig& cfg, const std::filesystem::path& base_dir);

/// Gene list produced by the config's selection method on aligned data
/// (HVG and DEG look at the pooled sources; DEG compares sensitive vs resistant).
std::vector<std::string> select_genes(const RunConfig& cfg, const DomainBundle& aligned,
                                      const std::filesystem::path& base_dir);

/// Files written into a run directory.
struct RunFiles {
    static constexpr const char* config = "config.json";
    static constexpr const char* history = "history.csv";
    static constexpr const char* epochs = "epochs.csv";
    static constexpr const char* checkpoint = "model.ckpt";
    static constexpr const char* metrics = "metrics.json";
    static constexpr const char* scores = "scores.csv";
    static constexpr const char* genes = "genes.txt";
};

struct RunSummary {
    TrainResult result;
    std::vector<double> target_scores;
    /// Target metrics when target labels exist, otherwise in-sample source metrics.
    MetricsReport metrics;
    std::string metrics_split;  // "target" or "sources"
    std::string config_hash;
};

/// Trains on `data`, then writes config echo, history, checkpoint, scores and metrics to `out_dir`.
RunSummary run_training(const RunConfig& cfg, const RunData& data, const std::filesystem::path& out_dir);

/// Rows of a variant comparison on real data (needs target labels).
BenchmarkReport run_variants(const RunConfig& cfg, const RunData& data, std::span<const VariantSpec> variants,
                             std::span<const std::uint64_t> seeds, std::size_t threads = 0);

}  // namespace adadrug
