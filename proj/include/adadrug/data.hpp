#pragma once

#include "adadrug/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace adadrug {

/// Samples × genes expression values with row and column names.
struct ExpressionMatrix {
    std::vector<std::string> sample_ids;
    std::vector<std::string> gene_names;
    Matrix values;

    std::size_t samples() const { return values.rows(); }
    std::size_t genes() const { return values.cols(); }
    /// Throws DataError on duplicate names or dimension mismatches.
    void validate() const;
    /// Keeps the named genes, in the given order. Unknown names throw DataError.
    ExpressionMatrix restrict_genes(std::span<const std::string> genes) const;
    ExpressionMatrix select_samples(std::span<const std::size_t> rows) const;
};

/// Expression rows with binary drug-response labels (1 = sensitive, 0 = resistant).
struct LabeledDomain {
    ExpressionMatrix expr;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::size_t count(int label) const;
    void validate() const;
};

/// K labeled sources and one unlabeled target sharing one ordered gene list.
struct DomainBundle {
    std::vector<LabeledDomain> sources;
    ExpressionMatrix target;

    std::size_t genes() const { return target.genes(); }
    const std::vector<std::string>& gene_names() const { return target.gene_names; }
    void validate() const;
};

// ---------------------------------------------------------------------------
// Files

enum class TableFormat { Csv, Tsv };

/// Csv unless the extension is .tsv or .txt.
TableFormat format_for(const std::filesystem::path& path);

/// Header: blank or "sample" cell, then gene names. Rows: sample id then values.
ExpressionMatrix parse_expression(std::istream& in, TableFormat format);
ExpressionMatrix load_expression(const std::filesystem::path& path, TableFormat format);
ExpressionMatrix load_expression(const std::filesystem::path& path);
void write_expression(std::ostream& out, const ExpressionMatrix& m, TableFormat format = TableFormat::Csv);
void save_expression(const std::filesystem::path& path, const ExpressionMatrix& m);

/// Two-column CSV keyed by sample id; the header names the value column
/// (`label` for binary labels, `ic50` for raw IC50 values).
struct LabelTable {
    enum class Kind { Binary, Ic50 };
    Kind kind = Kind::Binary;
    std::vector<std::string> sample_ids;
    std::vector<double> values;
};

LabelTable parse_labels(std::istream& in);
LabelTable load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, std::span<const std::string> ids, std::span<const int> labels);

/// Matches labels to expression rows by sample id; IC50 tables are binarized first.
/// Every expression sample needs a label.
LabeledDomain attach_labels(ExpressionMatrix expr, const LabelTable& labels);

/// One gene name per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_gene_list(const std::filesystem::path& path);
void save_gene_list(const std::filesystem::path& path, std::span<const std::string> genes);

/// `name<TAB>gene1,gene2,...` per line.
using GeneSets = std::vector<std::pair<std::string, std::vector<std::string>>>;
GeneSets parse_gene_sets(std::istream& in);
GeneSets load_gene_sets(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Preprocessing

/// Restricts every matrix to the shared genes, ordered as in the first matrix.
std::vector<ExpressionMatrix> align_genes(std::span<const ExpressionMatrix> matrices);
/// Aligns sources and target to their common genes.
DomainBundle align_bundle(std::vector<LabeledDomain> sources, ExpressionMatrix target);

/// 1 iff IC50 < mean, so a value equal to the mean is labeled resistant.
std::vector<int> binarize_ic50(std::span<const double> ic50);

/// Genes whose fraction of exact zeros is at most `max_zero_fraction` in every matrix,
/// in the order of the first matrix.
std::vector<std::string> genes_below_zero_fraction(std::span<const ExpressionMatrix> matrices,
                                                    double max_zero_fraction);

struct GeneSelection {
    enum class Method { Hvg, Deg, FileList };
    Method method = Method::Hvg;
    std::vector<std::string> genes;
    std::map<std::string, double> parameters;
};

const char* method_name(GeneSelection::Method m);

/// Ranks genes by binned, z-scored dispersion (variance / mean). Genes with
/// non-positive mean or zero variance are never selected. Genes are split into
/// equal-frequency mean bins: 20 bins, fewer when that would leave under 10 genes
/// per bin. Ties break on gene name.
GeneSelection select_hvg(const ExpressionMatrix& expr, std::size_t n);

/// Per-gene statistics used by select_deg.
struct DegStat {
    std::string gene;
    double log2_fold_change = 0.0;
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Welch two-sample t-test and log2((mean_a+ε)/(mean_b+ε)), ε = 1e-9, per gene.
std::vector<DegStat> deg_statistics(const ExpressionMatrix& group_a, const ExpressionMatrix& group_b);
/// Genes with |lfc| > lfc_min and p < p_max (both strict).
GeneSelection select_deg(const ExpressionMatrix& group_a, const ExpressionMatrix& group_b, double lfc_min,
                         double p_max);

GeneSelection select_from_list(const ExpressionMatrix& expr, std::span<const std::string> genes);

struct PathwayActivity {
    ExpressionMatrix activity;               // samples × retained pathways
    std::vector<std::string> dropped_sets;  // sets with no gene in the matrix
};

/// Per-gene z-score over samples (constant genes score 0), averaged over each set's members.
PathwayActivity pathway_activity(const ExpressionMatrix& expr, const GeneSets& gene_sets);

}  // namespace adadrug
