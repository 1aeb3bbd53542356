#include "adadrug/data.hpp"

#include "adadrug/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace adadrug {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        const std::string_view cell(line.data() + start, (pos == std::string::npos ? line.size() : pos) - start);
        cells.emplace_back(trim(cell));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return cells;
}

char delimiter(TableFormat f) { return f == TableFormat::Tsv ? '\t' : ','; }

double parse_number(const std::string& cell, std::size_t line) {
    if (cell.empty()) {
        throw ParseError("empty cell", line);
    }
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("non-numeric cell '" + cell + "'", line);
    }
    if (!std::isfinite(v)) {
        throw ParseError("non-finite value '" + cell + "'", line);
    }
    return v;
}

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << std::setprecision(17);
    return out;
}

template <typename Names>
void require_unique(const Names& names, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw DataError(std::string("duplicate ") + what + " '" + n + "'");
        }
    }
}

}  // namespace

void ExpressionMatrix::validate() const {
    if (values.rows() != sample_ids.size() || values.cols() != gene_names.size()) {
        throw DataError("expression matrix " + values.shape() + " with " + std::to_string(sample_ids.size()) +
                        " sample ids and " + std::to_string(gene_names.size()) + " gene names");
    }
    require_unique(sample_ids, "sample id");
    require_unique(gene_names, "gene name");
}

ExpressionMatrix ExpressionMatrix::restrict_genes(std::span<const std::string> genes) const {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < gene_names.size(); ++j) index.emplace(gene_names[j], j);
    std::vector<std::size_t> cols;
    cols.reserve(genes.size());
    for (const auto& g : genes) {
        auto it = index.find(g);
        if (it == index.end()) {
            throw DataError("gene '" + g + "' not present in expression matrix");
        }
        cols.push_back(it->second);
    }
    return {sample_ids, {genes.begin(), genes.end()}, values.select_cols(cols)};
}

ExpressionMatrix ExpressionMatrix::select_samples(std::span<const std::size_t> rows) const {
    ExpressionMatrix out{{}, gene_names, values.select_rows(rows)};
    out.sample_ids.reserve(rows.size());
    for (std::size_t r : rows) out.sample_ids.push_back(sample_ids[r]);
    return out;
}

std::size_t LabeledDomain::count(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void LabeledDomain::validate() const {
    expr.validate();
    if (labels.size() != expr.samples()) {
        throw DataError(std::to_string(labels.size()) + " labels for " + std::to_string(expr.samples()) + " samples");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw DataError("labels must be 0 or 1, got " + std::to_string(y));
        }
    }
}

void DomainBundle::validate() const {
    if (sources.empty()) {
        throw DataError("at least one source domain is required");
    }
    target.validate();
    for (std::size_t k = 0; k < sources.size(); ++k) {
        sources[k].validate();
        if (sources[k].expr.gene_names != target.gene_names) {
            throw DataError("source domain " + std::to_string(k + 1) + " is not gene-aligned with the target");
        }
    }
}

// ---------------------------------------------------------------------------

TableFormat format_for(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return ext == ".tsv" || ext == ".txt" ? TableFormat::Tsv : TableFormat::Csv;
}

ExpressionMatrix parse_expression(std::istream& in, TableFormat format) {
    const char delim = delimiter(format);
    std::string line;
    std::size_t line_no = 0;
    ExpressionMatrix m;
    bool have_header = false;
    std::vector<double> values;
    std::unordered_set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        auto cells = split(line, delim);
        if (!have_header) {
            if (cells.size() < 2) {
                throw ParseError("header needs a sample column and at least one gene", line_no);
            }
            if (!cells[0].empty() && cells[0] != "sample" && cells[0] != "sample_id") {
                throw ParseError("first header cell must be blank or 'sample', got '" + cells[0] + "'", line_no);
            }
            m.gene_names.assign(cells.begin() + 1, cells.end());
            std::unordered_set<std::string> seen;
            for (const auto& g : m.gene_names) {
                if (g.empty()) throw ParseError("empty gene name", line_no);
                if (!seen.insert(g).second) throw ParseError("duplicate gene name '" + g + "'", line_no);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != m.gene_names.size() + 1) {
            throw ParseError("row has " + std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(m.gene_names.size() + 1),
                             line_no);
        }
        if (cells[0].empty()) {
            throw ParseError("empty sample id", line_no);
        }
        if (!seen_ids.insert(cells[0]).second) {
            throw ParseError("duplicate sample id '" + cells[0] + "'", line_no);
        }
        m.sample_ids.push_back(cells[0]);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            values.push_back(parse_number(cells[j], line_no));
        }
    }
    if (!have_header) {
        throw ParseError("empty expression file", 0);
    }
    m.values = Matrix(m.sample_ids.size(), m.gene_names.size(), std::move(values));
    return m;
}

ExpressionMatrix load_expression(const std::filesystem::path& path, TableFormat format) {
    auto in = open_in(path);
    try {
        return parse_expression(in, format);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

ExpressionMatrix load_expression(const std::filesystem::path& path) {
    return load_expression(path, format_for(path));
}

void write_expression(std::ostream& out, const ExpressionMatrix& m, TableFormat format) {
    const char delim = delimiter(format);
    out << "sample";
    for (const auto& g : m.gene_names) out << delim << g;
    out << '\n';
    for (std::size_t r = 0; r < m.samples(); ++r) {
        out << m.sample_ids[r];
        for (double v : m.values.row(r)) out << delim << v;
        out << '\n';
    }
}

void save_expression(const std::filesystem::path& path, const ExpressionMatrix& m) {
    auto out = open_out(path);
    write_expression(out, m, format_for(path));
}

LabelTable parse_labels(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    LabelTable t;
    bool have_header = false;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const char delim = line.find('\t') != std::string::npos && line.find(',') == std::string::npos ? '\t' : ',';
        auto cells = split(line, delim);
        if (cells.size() != 2) {
            throw ParseError("label rows need exactly two cells", line_no);
        }
        if (!have_header) {
            std::string col = cells[1];
            std::transform(col.begin(), col.end(), col.begin(), [](unsigned char c) { return std::tolower(c); });
            if (col == "label") {
                t.kind = LabelTable::Kind::Binary;
            } else if (col == "ic50" || col == "ln_ic50" || col == "log_ic50") {
                t.kind = LabelTable::Kind::Ic50;
            } else {
                throw ParseError("label header must be sample_id,label or sample_id,ic50", line_no);
            }
            have_header = true;
            continue;
        }
        if (!seen.insert(cells[0]).second) {
            throw ParseError("duplicate sample id '" + cells[0] + "'", line_no);
        }
        const double v = parse_number(cells[1], line_no);
        if (t.kind == LabelTable::Kind::Binary && v != 0.0 && v != 1.0) {
            throw ParseError("binary label must be 0 or 1, got '" + cells[1] + "'", line_no);
        }
        t.sample_ids.push_back(cells[0]);
        t.values.push_back(v);
    }
    if (!have_header) {
        throw ParseError("empty label file", 0);
    }
    return t;
}

LabelTable load_labels(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return parse_labels(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void save_labels(const std::filesystem::path& path, std::span<const std::string> ids, std::span<const int> labels) {
    auto out = open_out(path);
    out << "sample_id,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << labels[i] << '\n';
}

LabeledDomain attach_labels(ExpressionMatrix expr, const LabelTable& table) {
    std::vector<int> by_row;
    if (table.kind == LabelTable::Kind::Ic50) {
        by_row = binarize_ic50(table.values);
    } else {
        by_row.reserve(table.values.size());
        for (double v : table.values) by_row.push_back(static_cast<int>(v));
    }
    std::unordered_map<std::string, int> lookup;
    for (std::size_t i = 0; i < table.sample_ids.size(); ++i) lookup.emplace(table.sample_ids[i], by_row[i]);
    LabeledDomain d{std::move(expr), {}};
    d.labels.reserve(d.expr.samples());
    for (const auto& id : d.expr.sample_ids) {
        auto it = lookup.find(id);
        if (it == lookup.end()) {
            throw DataError("no label for sample '" + id + "'");
        }
        d.labels.push_back(it->second);
    }
    return d;
}

std::vector<std::string> load_gene_list(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::string> genes;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        const std::string g(trim(line));
        if (g.empty() || g[0] == '#') continue;
        if (seen.insert(g).second) genes.push_back(g);
    }
    return genes;
}

void save_gene_list(const std::filesystem::path& path, std::span<const std::string> genes) {
    auto out = open_out(path);
    for (const auto& g : genes) out << g << '\n';
}

GeneSets parse_gene_sets(std::istream& in) {
    GeneSets sets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line) || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("gene set line needs name<TAB>genes", line_no);
        }
        std::vector<std::string> genes;
        for (auto& g : split(line.substr(tab + 1), ',')) {
            if (!g.empty()) genes.push_back(std::move(g));
        }
        sets.emplace_back(std::string(trim(line.substr(0, tab))), std::move(genes));
    }
    return sets;
}

GeneSets load_gene_sets(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_gene_sets(in);
}

}  // namespace adadrug
