#include "adadrug/eval.hpp"

#include "adadrug/error.hpp"
#include "adadrug/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace adadrug {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* what) {
    if (scores.size() != labels.size()) {
        throw ShapeError(std::string(what) + ": " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(labels.size()) + " labels");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw DataError(std::string(what) + ": labels must be 0 or 1");
    }
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return descending ? scores[a] > scores[b] : scores[a] < scores[b];
    });
    return order;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels, "auroc");
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw DataError("auroc needs both classes present");
    }
    const auto order = order_by_score(scores, false);
    // Sum of mid-ranks (1-based) of the positives.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::size_t pos_in_group = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            pos_in_group += labels[order[j]] == 1;
            ++j;
        }
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        rank_sum += mid_rank * static_cast<double>(pos_in_group);
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

double aupr(std::span<const double> scores, std::span<const int> labels) {
    check_inputs(scores, labels, "aupr");
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (n_pos == 0) {
        throw DataError("aupr needs at least one positive");
    }
    const auto order = order_by_score(scores, true);
    double area = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            tp += labels[order[j]] == 1;
            ++j;
        }
        seen = j;
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return area;
}

MetricsReport evaluate_scores(std::span<const double> scores, std::span<const int> labels) {
    MetricsReport r;
    r.auroc = auroc(scores, labels);
    r.aupr = aupr(scores, labels);
    r.n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    r.n_neg = labels.size() - r.n_pos;
    r.scores.assign(scores.begin(), scores.end());
    return r;
}

// ---------------------------------------------------------------------------

std::vector<Matrix> draw_references(std::span<const LabeledDomain> sources, const PredictOptions& opts) {
    std::vector<Matrix> refs;
    for (std::size_t k = 0; k < sources.size(); ++k) {
        const Matrix& x = sources[k].expr.values;
        const std::size_t n = x.rows();
        if (opts.reference_samples == 0 || opts.reference_samples >= n) {
            refs.push_back(x);
            continue;
        }
        Rng rng = make_rng(opts.seed, {0x7265, k});
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        shuffle(std::span<std::size_t>(rows), rng);
        rows.resize(opts.reference_samples);
        std::sort(rows.begin(), rows.end());
        refs.push_back(x.select_rows(rows));
    }
    return refs;
}

Matrix target_embeddings(const ModelBundle& model, const Matrix& target, std::span<const LabeledDomain> sources,
                         const PredictOptions& opts) {
    if (target.cols() != model.genes()) {
        throw ShapeError("target has " + std::to_string(target.cols()) + " genes, model expects " +
                         std::to_string(model.genes()));
    }
    Matrix h = encode(model, target);
    if (!model.weighted) {
        return h;
    }
    if (sources.empty()) {
        throw ContractError("weighted inference needs at least one source reference domain");
    }
    const auto refs = draw_references(sources, opts);
    const Matrix h_ref = encode(model, vstack(refs));
    const std::size_t n_ref = h_ref.rows();
    const std::size_t d = h.cols();
    const double inv = 1.0 / static_cast<double>(n_ref);

    Matrix z(h.rows(), d);
    Matrix diff(n_ref, d);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        auto ht = h.row(i);
        for (std::size_t r = 0; r < n_ref; ++r) {
            auto hr = h_ref.row(r);
            auto dst = diff.row(r);
            for (std::size_t c = 0; c < d; ++c) dst[c] = std::abs(ht[c] - hr[c]);
        }
        const Matrix w = forward(model.generator, diff);
        auto zi = z.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < n_ref; ++r) s += w(r, c);
            zi[c] = ht[c] * (inv * s);
        }
    }
    return z;
}

std::vector<double> predict_target(const ModelBundle& model, const Matrix& target,
                                   std::span<const LabeledDomain> sources, const PredictOptions& opts) {
    const Matrix p = predict(model, target_embeddings(model, target, sources, opts));
    return {p.values().begin(), p.values().end()};
}

void export_embeddings(const std::filesystem::path& path, const ModelBundle& model, const ExpressionMatrix& expr,
                       bool weighted, std::span<const LabeledDomain> sources, const PredictOptions& opts) {
    const Matrix emb = weighted ? target_embeddings(model, expr.values, sources, opts) : encode(model, expr.values);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << std::setprecision(17) << "sample_id";
    for (std::size_t c = 0; c < emb.cols(); ++c) out << ",dim" << c;
    out << '\n';
    for (std::size_t r = 0; r < emb.rows(); ++r) {
        out << expr.sample_ids[r];
        for (double v : emb.row(r)) out << ',' << v;
        out << '\n';
    }
}

void write_scores(const std::filesystem::path& path, std::span<const std::string> ids, std::span<const double> scores,
                  std::span<const int> labels) {
    if (ids.size() != scores.size() || (!labels.empty() && labels.size() != scores.size())) {
        throw ShapeError("write_scores: column lengths differ");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << std::setprecision(17) << "sample_id,score" << (labels.empty() ? "" : ",label") << '\n';
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i] << ',' << scores[i];
        if (!labels.empty()) out << ',' << labels[i];
        out << '\n';
    }
}

ScoreTable read_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    ScoreTable t;
    std::string line;
    std::size_t line_no = 0;
    bool has_label = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (line_no == 1) {
            if (cells.size() < 2 || cells[0] != "sample_id" || cells[1] != "score") {
                throw ParseError(path.string() + ": scores header must start with sample_id,score", line_no);
            }
            has_label = cells.size() == 3 && cells[2] == "label";
            continue;
        }
        if (cells.size() != (has_label ? 3u : 2u)) {
            throw ParseError(path.string() + ": wrong cell count", line_no);
        }
        try {
            t.sample_ids.push_back(cells[0]);
            t.scores.push_back(std::stod(cells[1]));
            if (has_label) t.labels.push_back(std::stoi(cells[2]));
        } catch (const std::exception&) {
            throw ParseError(path.string() + ": non-numeric cell", line_no);
        }
    }
    return t;
}

std::string metrics_json(const MetricsReport& report, const std::string& config_hash, const std::string& split) {
    nlohmann::ordered_json j;
    j["auroc"] = report.auroc;
    j["aupr"] = report.aupr;
    j["n_pos"] = report.n_pos;
    j["n_neg"] = report.n_neg;
    j["config_hash"] = config_hash;
    if (!split.empty()) j["split"] = split;
    return j.dump(2);
}

void write_metrics(const std::filesystem::path& path, const MetricsReport& report, const std::string& config_hash,
                   const std::string& split) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << metrics_json(report, config_hash, split) << '\n';
}

}  // namespace adadrug
