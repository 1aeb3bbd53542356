#pragma once

#include "adadrug/train.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace adadrug {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;

/// TrainConfig <-> flat JSON object (keys named after the struct fields, ablation
/// switches as top-level `mda`, `ind`, `awg`).
Json train_config_to_json(const TrainConfig& cfg);
/// Reads the TrainConfig keys present in `j` over the defaults. Keys not belonging to
/// TrainConfig are ignored here; callers reject unknown keys.
TrainConfig train_config_from_json(const Json& j);

struct SourceFiles {
    std::filesystem::path expression;
    std::filesystem::path labels;

    bool operator==(const SourceFiles&) const = default;
};

struct GeneSelectionConfig {
    std::string method = "none";  // none | hvg | deg | file
    std::size_t n_top = 4000;
    std::filesystem::path file;
    double lfc_min = 2.0;
    double p_max = 0.05;

    bool operator==(const GeneSelectionConfig&) const = default;
};

/// Everything one CLI run needs: the training configuration plus file locations.
struct RunConfig {
    int format_version = kConfigVersion;
    TrainConfig train;
    std::vector<SourceFiles> sources;
    std::filesystem::path target_expression;
    std::filesystem::path target_labels;  // optional, evaluation only
    GeneSelectionConfig genes;
    std::optional<double> max_zero_frac;
    std::size_t reference_samples = 128;
    std::filesystem::path output_dir = "run";

    bool operator==(const RunConfig&) const = default;
};

/// Validates and fills defaults. Unknown keys, wrong types and out-of-range values
/// throw ValidationError carrying the JSON pointer of the offending value.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Fully-defaulted document; parse_config(config_to_json(c)) == c.
Json config_to_json(const RunConfig& cfg);
void write_config(const std::filesystem::path& path, const RunConfig& cfg);

/// 16-hex-digit FNV-1a hash of the compact JSON dump.
std::string config_hash(const Json& j);

}  // namespace adadrug
