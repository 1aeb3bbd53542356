#pragma once

#include "adadrug/data.hpp"
#include "adadrug/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adadrug {

/// Mann-Whitney AUROC: P(score_pos > score_neg) with ties counted ½.
/// Throws DataError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Step-wise area under the precision-recall curve, sweeping thresholds from the
/// highest score down; tied scores enter as one group. Needs at least one positive.
double aupr(std::span<const double> scores, std::span<const int> labels);

struct MetricsReport {
    double auroc = 0.0;
    double aupr = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::vector<double> scores;
};

MetricsReport evaluate_scores(std::span<const double> scores, std::span<const int> labels);

struct PredictOptions {
    /// Reference rows drawn per source domain; 0 or ≥ domain size uses every row.
    std::size_t reference_samples = 128;
    std::uint64_t seed = 0;
};

/// Reference rows used for every target sample: R per source, drawn without replacement.
std::vector<Matrix> draw_references(std::span<const LabeledDomain> sources, const PredictOptions& opts);

/// Weighted target embeddings: h_T ⊙ w̄ where w̄ averages F(|h_T − h_ref|) over all
/// K·R reference rows. Unweighted models return h_T.
Matrix target_embeddings(const ModelBundle& model, const Matrix& target, std::span<const LabeledDomain> sources,
                         const PredictOptions& opts);

/// Sensitivity scores in (0, 1) for every target row.
std::vector<double> predict_target(const ModelBundle& model, const Matrix& target,
                                   std::span<const LabeledDomain> sources, const PredictOptions& opts);

/// Embeddings (h, or z when `weighted`) of `expr` with sample ids, as CSV.
void export_embeddings(const std::filesystem::path& path, const ModelBundle& model, const ExpressionMatrix& expr,
                       bool weighted, std::span<const LabeledDomain> sources, const PredictOptions& opts);

// Scores CSV: sample_id,score[,label]
struct ScoreTable {
    std::vector<std::string> sample_ids;
    std::vector<double> scores;
    std::vector<int> labels;  // empty when the file had no label column
};

void write_scores(const std::filesystem::path& path, std::span<const std::string> ids, std::span<const double> scores,
                  std::span<const int> labels = {});
ScoreTable read_scores(const std::filesystem::path& path);

/// Metrics JSON: {auroc, aupr, n_pos, n_neg, config_hash}.
/// {auroc, aupr, n_pos, n_neg, config_hash[, split]}; `split` is omitted when empty.
std::string metrics_json(const MetricsReport& report, const std::string& config_hash, const std::string& split = "");
void write_metrics(const std::filesystem::path& path, const MetricsReport& report, const std::string& config_hash,
                   const std::string& split = "");

}  // namespace adadrug
