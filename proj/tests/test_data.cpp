#include "support.hpp"

#include "adadrug/data.hpp"
#include "adadrug/error.hpp"

#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace adadrug;

namespace {

ExpressionMatrix parse(const std::string& text, TableFormat f = TableFormat::Csv) {
    std::istringstream in(text);
    return parse_expression(in, f);
}

ExpressionMatrix make_expr(std::vector<std::string> genes, Matrix values) {
    ExpressionMatrix m;
    for (std::size_t r = 0; r < values.rows(); ++r) m.sample_ids.push_back("s" + std::to_string(r));
    m.gene_names = std::move(genes);
    m.values = std::move(values);
    return m;
}

std::vector<int> binarize_oracle(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / static_cast<double>(v.size());
    std::vector<int> out;
    for (double x : v) out.push_back(x < mean ? 1 : 0);
    return out;
}

}  // namespace

TEST_CASE("parse well-formed expression tables") {
    const auto m = parse("sample,A,B,C\nx,1,2,3\ny,4,5,1e3\n");
    CHECK(m.samples() == 2);
    CHECK(m.genes() == 3);
    CHECK(m.gene_names == std::vector<std::string>{"A", "B", "C"});
    CHECK(m.sample_ids == std::vector<std::string>{"x", "y"});
    CHECK(m.values(1, 2) == 1000.0);

    const auto t = parse("\tA\tB\nx\t1.5\t-2\n", TableFormat::Tsv);
    CHECK(t.values == Matrix{{1.5, -2}});
    CHECK(format_for("a.tsv") == TableFormat::Tsv);
    CHECK(format_for("a.csv") == TableFormat::Csv);
}

TEST_CASE("expression parse errors") {
    CHECK_THROWS_AS(parse("sample,A,B\nx,1,2\nx,3,4\n"), ParseError);
    CHECK_THROWS_AS(parse("sample,A,A\nx,1,2\n"), ParseError);
    CHECK_THROWS_AS(parse("sample,A,B\nx,1\n"), ParseError);
    CHECK_THROWS_AS(parse("sample,A,B\nx,1,abc\n"), ParseError);
    CHECK_THROWS_AS(parse("sample,A,B\nx,1,nan\n"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    try {
        parse("sample,A\nx,1\ny,oops\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("expression write and reload round-trips") {
    const auto dir = adadrug::testing::scratch_dir("data_roundtrip");
    const auto m = make_expr({"A", "B"}, Matrix{{0.1, 1.0 / 3.0}, {-2.5e-8, 7}});
    save_expression(dir / "m.csv", m);
    const auto back = load_expression(dir / "m.csv");
    CHECK(back.values == m.values);
    CHECK(back.gene_names == m.gene_names);
    CHECK(back.sample_ids == m.sample_ids);
    CHECK_THROWS_AS(load_expression(dir / "missing.csv"), DataError);
}

TEST_CASE("labels") {
    std::istringstream bin("sample_id,label\na,1\nb,0\n");
    const auto t = parse_labels(bin);
    CHECK(t.kind == LabelTable::Kind::Binary);
    CHECK(t.values == std::vector<double>{1, 0});

    std::istringstream ic("sample_id,ic50\na,1\nb,2\nc,9\n");
    const auto t2 = parse_labels(ic);
    CHECK(t2.kind == LabelTable::Kind::Ic50);
    const auto expr = make_expr({"G"}, Matrix{{1}, {2}, {3}});
    LabelTable keyed = t2;
    keyed.sample_ids = {"s2", "s0", "s1"};
    const auto dom = attach_labels(expr, keyed);
    // s0 -> 2, s1 -> 9, s2 -> 1, mean 4
    CHECK(dom.labels == std::vector<int>{1, 0, 1});

    std::istringstream bad("sample_id,label\na,2\n");
    CHECK_THROWS_AS(parse_labels(bad), ParseError);
    std::istringstream dup("sample_id,label\na,1\na,0\n");
    CHECK_THROWS_AS(parse_labels(dup), ParseError);
    std::istringstream header("id,score\na,1\n");
    CHECK_THROWS_AS(parse_labels(header), ParseError);

    LabelTable partial;
    partial.sample_ids = {"s0"};
    partial.values = {1};
    CHECK_THROWS_AS(attach_labels(expr, partial), DataError);
}

TEST_CASE("binarize_ic50") {
    CHECK(binarize_ic50(std::vector<double>{1, 2, 9}) == std::vector<int>{1, 1, 0});
    CHECK(binarize_ic50(std::vector<double>{3, 3, 3}) == std::vector<int>{0, 0, 0});
    CHECK_THROWS(binarize_ic50(std::vector<double>{}));
    Rng rng = make_rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(1 + uniform_index(rng, 100));
        for (double& x : v) x = normal01(rng) * 3.0 + 1.0;
        CHECK(binarize_ic50(v) == binarize_oracle(v));
    }
}

TEST_CASE("align_genes") {
    const auto a = make_expr({"A", "B", "C"}, Matrix{{1, 2, 3}});
    const auto b = make_expr({"C", "A"}, Matrix{{30, 10}});
    const std::vector<ExpressionMatrix> in{a, b};
    const auto out = align_genes(in);
    CHECK(out[0].gene_names == std::vector<std::string>{"A", "C"});
    CHECK(out[1].gene_names == std::vector<std::string>{"A", "C"});
    CHECK(out[0].values == Matrix{{1, 3}});
    CHECK(out[1].values == Matrix{{10, 30}});
    const auto again = align_genes(out);
    CHECK(again[0].values == out[0].values);
    CHECK(again[1].values == out[1].values);
    CHECK(again[1].gene_names == out[1].gene_names);

    const std::vector<ExpressionMatrix> same{a, a};
    CHECK(align_genes(same)[1].values == a.values);
    const std::vector<ExpressionMatrix> disjoint{a, make_expr({"X"}, Matrix{{1}})};
    CHECK_THROWS_AS(align_genes(disjoint), DataError);
}

TEST_CASE("select_hvg") {
    // dispersions: A 2/2 = 1, B 8/4 = 2, D 2/11; C constant
    const auto m = make_expr({"A", "B", "C", "D"}, Matrix{{1, 2, 5, 10}, {3, 6, 5, 12}});
    CHECK(select_hvg(m, 2).genes == std::vector<std::string>{"B", "A"});
    CHECK(select_hvg(m, 10).genes == std::vector<std::string>{"B", "A", "D"});
    CHECK_THROWS(select_hvg(m, 0));
    // the mean of three 0.1s is not 0.1 in binary; the column is still constant
    const auto tenth = make_expr({"A", "T"}, Matrix{{1, 0.1}, {2, 0.1}, {4, 0.1}});
    CHECK(select_hvg(tenth, 2).genes == std::vector<std::string>{"A"});

    Rng rng = make_rng(2);
    Matrix big(30, 300);
    for (std::size_t j = 0; j < 300; ++j) {
        for (std::size_t r = 0; r < 30; ++r) big(r, j) = j % 7 == 0 ? 4.0 : std::exp(normal01(rng) * 0.1 * (1 + j % 5));
    }
    std::vector<std::string> names;
    for (int j = 0; j < 300; ++j) names.push_back("g" + std::to_string(j));
    const auto e = make_expr(names, big);
    const auto sel = select_hvg(e, 200);
    CHECK(sel.parameters.at("bins") == 20.0);
    CHECK(sel.genes.size() == 200);
    for (const auto& g : sel.genes) CHECK(std::stoi(g.substr(1)) % 7 != 0);
    CHECK(select_hvg(e, 200).genes == sel.genes);
}

TEST_CASE("select_deg") {
    const Matrix a{{7.9, 5.0, 3.0}, {8.0, 5.1, 3.2}, {8.1, 4.9, 2.9}, {8.05, 5.05, 3.1}};
    const Matrix b{{0.9, 5.0, 1.5}, {1.0, 5.1, 1.6}, {1.1, 4.9, 1.4}, {0.95, 5.05, 1.55}};
    const auto ga = make_expr({"up", "flat", "mid"}, a), gb = make_expr({"up", "flat", "mid"}, b);

    const auto stats = deg_statistics(ga, gb);
    for (std::size_t j = 0; j < 3; ++j) {
        double ma = 0, mb = 0, va = 0, vb = 0;
        for (std::size_t r = 0; r < 4; ++r) {
            ma += a(r, j) / 4;
            mb += b(r, j) / 4;
        }
        for (std::size_t r = 0; r < 4; ++r) {
            va += (a(r, j) - ma) * (a(r, j) - ma) / 3;
            vb += (b(r, j) - mb) * (b(r, j) - mb) / 3;
        }
        const double se2 = va / 4 + vb / 4;
        const double t = (ma - mb) / std::sqrt(se2);
        const double df = se2 * se2 / ((va / 4) * (va / 4) / 3 + (vb / 4) * (vb / 4) / 3);
        const double p = 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
        CHECK(stats[j].t == doctest::Approx(t).epsilon(1e-10));
        CHECK(stats[j].df == doctest::Approx(df).epsilon(1e-10));
        CHECK(stats[j].p_value == doctest::Approx(p).epsilon(1e-8));
    }
    CHECK(stats[0].log2_fold_change == doctest::Approx(std::log2(8.0125 / 0.9875)).epsilon(1e-9));

    CHECK(select_deg(ga, gb, 2.0, 0.05).genes == std::vector<std::string>{"up"});
    CHECK(select_deg(ga, gb, 0.5, 0.05).genes == std::vector<std::string>{"up", "mid"});
    // strict: a threshold equal to the fold change excludes the gene
    CHECK(select_deg(ga, gb, std::abs(stats[2].log2_fold_change), 0.05).genes == std::vector<std::string>{"up"});
    CHECK(select_deg(ga, ga, 0.0, 1.0).genes.empty());
}

TEST_CASE("select_from_list keeps matrix order of known genes") {
    const auto m = make_expr({"A", "B", "C"}, Matrix{{1, 2, 3}});
    const std::vector<std::string> want{"C", "A", "Z"};
    CHECK(select_from_list(m, want).genes == std::vector<std::string>{"A", "C"});
}

TEST_CASE("zero-fraction filter") {
    const auto a = make_expr({"A", "B", "C"}, Matrix{{0, 1, 0}, {0, 2, 1}, {1, 3, 1}, {1, 4, 1}});
    const auto b = make_expr({"A", "B", "C"}, Matrix{{1, 0, 1}, {1, 1, 1}});
    const std::vector<ExpressionMatrix> ms{a, b};
    CHECK(genes_below_zero_fraction(ms, 0.5) == std::vector<std::string>{"A", "B", "C"});
    CHECK(genes_below_zero_fraction(ms, 0.4) == std::vector<std::string>{"C"});
    CHECK(genes_below_zero_fraction(ms, 0.0).empty());
}

TEST_CASE("pathway_activity") {
    const auto m = make_expr({"X", "Y", "K"}, Matrix{{1, 0, 5}, {2, 0, 5}, {3, 3, 5}});
    GeneSets sets{{"const", {"K"}}, {"single", {"X"}}, {"pair", {"X", "Y"}}, {"none", {"Q"}}};
    const auto p = pathway_activity(m, sets);
    CHECK(p.dropped_sets == std::vector<std::string>{"none"});
    CHECK(p.activity.gene_names == std::vector<std::string>{"const", "single", "pair"});
    for (std::size_t r = 0; r < 3; ++r) CHECK(p.activity.values(r, 0) == 0.0);
    CHECK(p.activity.values(0, 1) == doctest::Approx(-1.0));
    CHECK(p.activity.values(1, 1) == doctest::Approx(0.0));
    CHECK(p.activity.values(2, 1) == doctest::Approx(1.0));
    // Y: mean 1, sd sqrt(3)
    const double s3 = std::sqrt(3.0);
    CHECK(p.activity.values(0, 2) == doctest::Approx((-1.0 - 1.0 / s3) / 2));
    CHECK(p.activity.values(1, 2) == doctest::Approx((0.0 - 1.0 / s3) / 2));
    CHECK(p.activity.values(2, 2) == doctest::Approx((1.0 + 2.0 / s3) / 2));

    std::istringstream in("setA\tX,Y\nsetB\tK\n");
    const auto parsed = parse_gene_sets(in);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].second == std::vector<std::string>{"X", "Y"});
}

TEST_CASE("gene list files and bundle validation") {
    const auto dir = adadrug::testing::scratch_dir("data_genes");
    {
        std::ofstream out(dir / "g.txt");
        out << "# header\nA\n\nB\n";
    }
    CHECK(load_gene_list(dir / "g.txt") == std::vector<std::string>{"A", "B"});
    const std::vector<std::string> genes{"x", "y"};
    save_gene_list(dir / "h.txt", genes);
    CHECK(load_gene_list(dir / "h.txt") == genes);

    LabeledDomain bad{make_expr({"A"}, Matrix{{1}, {2}}), {1}};
    CHECK_THROWS_AS(bad.validate(), DataError);
    LabeledDomain s{make_expr({"A", "B"}, Matrix{{1, 2}, {3, 4}}), {1, 0}};
    const auto b = align_bundle({s}, make_expr({"B", "A", "C"}, Matrix{{5, 6, 7}}));
    CHECK(b.gene_names() == std::vector<std::string>{"A", "B"});
    CHECK(b.target.values == Matrix{{6, 5}});
    CHECK(b.sources[0].count(1) == 1);
}
