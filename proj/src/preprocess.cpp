#include "adadrug/data.hpp"

#include "adadrug/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace adadrug {

std::vector<ExpressionMatrix> align_genes(std::span<const ExpressionMatrix> matrices) {
    if (matrices.size() < 2) {
        throw ContractError("align_genes needs at least two matrices");
    }
    std::vector<std::string> shared = matrices[0].gene_names;
    for (std::size_t i = 1; i < matrices.size(); ++i) {
        std::unordered_set<std::string> present(matrices[i].gene_names.begin(), matrices[i].gene_names.end());
        std::erase_if(shared, [&](const std::string& g) { return !present.contains(g); });
    }
    if (shared.empty()) {
        throw DataError("no genes shared by all expression matrices");
    }
    std::vector<ExpressionMatrix> out;
    out.reserve(matrices.size());
    for (const auto& m : matrices) out.push_back(m.restrict_genes(shared));
    return out;
}

DomainBundle align_bundle(std::vector<LabeledDomain> sources, ExpressionMatrix target) {
    std::vector<ExpressionMatrix> all;
    for (auto& s : sources) all.push_back(std::move(s.expr));
    all.push_back(std::move(target));
    auto aligned = align_genes(all);
    DomainBundle b;
    for (std::size_t k = 0; k < sources.size(); ++k) {
        b.sources.push_back({std::move(aligned[k]), std::move(sources[k].labels)});
    }
    b.target = std::move(aligned.back());
    b.validate();
    return b;
}

std::vector<int> binarize_ic50(std::span<const double> ic50) {
    if (ic50.empty()) {
        throw ContractError("binarize_ic50: empty input");
    }
    double sum = 0.0;
    for (double v : ic50) {
        if (!std::isfinite(v)) throw DataError("binarize_ic50: non-finite IC50");
        sum += v;
    }
    const double mean = sum / static_cast<double>(ic50.size());
    std::vector<int> labels;
    labels.reserve(ic50.size());
    for (double v : ic50) labels.push_back(v < mean ? 1 : 0);
    return labels;
}

std::vector<std::string> genes_below_zero_fraction(std::span<const ExpressionMatrix> matrices,
                                                    double max_zero_fraction) {
    if (matrices.empty()) return {};
    std::unordered_set<std::string> rejected;
    for (const auto& m : matrices) {
        for (std::size_t j = 0; j < m.genes(); ++j) {
            std::size_t zeros = 0;
            for (std::size_t r = 0; r < m.samples(); ++r) zeros += m.values(r, j) == 0.0;
            if (m.samples() > 0 && static_cast<double>(zeros) / static_cast<double>(m.samples()) > max_zero_fraction) {
                rejected.insert(m.gene_names[j]);
            }
        }
    }
    std::vector<std::string> kept;
    for (const auto& g : matrices[0].gene_names) {
        if (!rejected.contains(g)) kept.push_back(g);
    }
    return kept;
}

const char* method_name(GeneSelection::Method m) {
    switch (m) {
        case GeneSelection::Method::Hvg: return "hvg";
        case GeneSelection::Method::Deg: return "deg";
        case GeneSelection::Method::FileList: return "file";
    }
    return "?";
}

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // unbiased
};

Moments column_moments(const Matrix& m, std::size_t j) {
    const std::size_t n = m.rows();
    Moments s;
    for (std::size_t r = 0; r < n; ++r) s.mean += m(r, j);
    s.mean /= static_cast<double>(n);
    if (n > 1) {
        for (std::size_t r = 0; r < n; ++r) {
            const double d = m(r, j) - s.mean;
            s.var += d * d;
        }
        s.var /= static_cast<double>(n - 1);
    }
    return s;
}

}  // namespace

GeneSelection select_hvg(const ExpressionMatrix& expr, std::size_t n) {
    if (n == 0) {
        throw ContractError("select_hvg: n must be at least 1");
    }
    struct Candidate {
        std::size_t col;
        double mean;
        double dispersion;
        double z = 0.0;
    };
    std::vector<Candidate> cands;
    for (std::size_t j = 0; j < expr.genes(); ++j) {
        bool constant = true;
        for (std::size_t r = 1; r < expr.samples() && constant; ++r) constant = expr.values(r, j) == expr.values(0, j);
        const Moments m = column_moments(expr.values, j);
        if (!constant && m.mean > 0.0 && m.var > 0.0) {
            cands.push_back({j, m.mean, m.var / m.mean});
        }
    }
    const auto& names = expr.gene_names;
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
        return a.mean != b.mean ? a.mean < b.mean : names[a.col] < names[b.col];
    });

    const std::size_t total = cands.size();
    const std::size_t bins = std::clamp<std::size_t>(total / 10, 1, 20);
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t lo = b * total / bins;
        const std::size_t hi = (b + 1) * total / bins;
        const std::size_t cnt = hi - lo;
        if (cnt < 2) continue;
        double mean = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean += cands[i].dispersion;
        mean /= static_cast<double>(cnt);
        double var = 0.0;
        for (std::size_t i = lo; i < hi; ++i) var += (cands[i].dispersion - mean) * (cands[i].dispersion - mean);
        const double sd = std::sqrt(var / static_cast<double>(cnt - 1));
        for (std::size_t i = lo; i < hi; ++i) {
            cands[i].z = sd > 0.0 ? (cands[i].dispersion - mean) / sd : 0.0;
        }
    }
    std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
        return a.z != b.z ? a.z > b.z : names[a.col] < names[b.col];
    });

    GeneSelection sel;
    sel.method = GeneSelection::Method::Hvg;
    sel.parameters = {{"n_top", static_cast<double>(n)}, {"bins", static_cast<double>(bins)}};
    for (std::size_t i = 0; i < std::min(n, total); ++i) sel.genes.push_back(names[cands[i].col]);
    return sel;
}

std::vector<DegStat> deg_statistics(const ExpressionMatrix& group_a, const ExpressionMatrix& group_b) {
    if (group_a.samples() < 2 || group_b.samples() < 2) {
        throw ContractError("select_deg: each group needs at least two samples");
    }
    if (group_a.gene_names != group_b.gene_names) {
        throw DataError("select_deg: groups are not gene-aligned");
    }
    constexpr double kEps = 1e-9;
    constexpr double kVarFloor = 1e-12;
    const double na = static_cast<double>(group_a.samples());
    const double nb = static_cast<double>(group_b.samples());
    std::vector<DegStat> stats;
    stats.reserve(group_a.genes());
    for (std::size_t j = 0; j < group_a.genes(); ++j) {
        const Moments a = column_moments(group_a.values, j);
        const Moments b = column_moments(group_b.values, j);
        DegStat s;
        s.gene = group_a.gene_names[j];
        s.log2_fold_change = std::log2((a.mean + kEps) / (b.mean + kEps));
        const double sa = a.var / na;
        const double sb = b.var / nb;
        const double se2 = std::max(sa + sb, kVarFloor);
        s.t = (a.mean - b.mean) / std::sqrt(se2);
        const double denom = sa * sa / (na - 1.0) + sb * sb / (nb - 1.0);
        s.df = denom > 0.0 ? (sa + sb) * (sa + sb) / denom : na + nb - 2.0;
        if (!std::isfinite(s.df) || s.df <= 0.0) s.df = na + nb - 2.0;
        boost::math::students_t dist(s.df);
        s.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(s.t)));
        stats.push_back(std::move(s));
    }
    return stats;
}

GeneSelection select_deg(const ExpressionMatrix& group_a, const ExpressionMatrix& group_b, double lfc_min,
                         double p_max) {
    GeneSelection sel;
    sel.method = GeneSelection::Method::Deg;
    sel.parameters = {{"lfc_min", lfc_min}, {"p_max", p_max}};
    for (const auto& s : deg_statistics(group_a, group_b)) {
        if (std::abs(s.log2_fold_change) > lfc_min && s.p_value < p_max) {
            sel.genes.push_back(s.gene);
        }
    }
    return sel;
}

GeneSelection select_from_list(const ExpressionMatrix& expr, std::span<const std::string> genes) {
    std::unordered_set<std::string> wanted(genes.begin(), genes.end());
    GeneSelection sel;
    sel.method = GeneSelection::Method::FileList;
    for (const auto& g : expr.gene_names) {
        if (wanted.contains(g)) sel.genes.push_back(g);
    }
    if (sel.genes.empty()) {
        throw DataError("none of the listed genes is present in the expression data");
    }
    return sel;
}

PathwayActivity pathway_activity(const ExpressionMatrix& expr, const GeneSets& gene_sets) {
    const std::size_t n = expr.samples();
    Matrix z(n, expr.genes());
    for (std::size_t j = 0; j < expr.genes(); ++j) {
        const Moments m = column_moments(expr.values, j);
        const double sd = std::sqrt(m.var);
        for (std::size_t r = 0; r < n; ++r) {
            z(r, j) = sd > 0.0 ? (expr.values(r, j) - m.mean) / sd : 0.0;
        }
    }
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < expr.genes(); ++j) index.emplace(expr.gene_names[j], j);

    PathwayActivity out;
    out.activity.sample_ids = expr.sample_ids;
    std::vector<std::vector<double>> columns;
    for (const auto& [name, genes] : gene_sets) {
        std::vector<std::size_t> members;
        std::unordered_set<std::size_t> seen;
        for (const auto& g : genes) {
            auto it = index.find(g);
            if (it != index.end() && seen.insert(it->second).second) members.push_back(it->second);
        }
        if (members.empty()) {
            out.dropped_sets.push_back(name);
            continue;
        }
        std::vector<double> col(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t j : members) s += z(r, j);
            col[r] = s / static_cast<double>(members.size());
        }
        out.activity.gene_names.push_back(name);
        columns.push_back(std::move(col));
    }
    out.activity.values = Matrix(n, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        for (std::size_t r = 0; r < n; ++r) out.activity.values(r, c) = columns[c][r];
    }
    return out;
}

}  // namespace adadrug
