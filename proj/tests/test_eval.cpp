#include "support.hpp"

#include "adadrug/error.hpp"
#include "adadrug/eval.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace adadrug;
using adadrug::testing::random_matrix;

namespace {

double pair_oracle(const std::vector<double>& s, const std::vector<int>& y) {
    double hits = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            pairs += 1.0;
            hits += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    }
    return hits / pairs;
}

double sweep_oracle(const std::vector<double>& s, const std::vector<int>& y) {
    std::set<double, std::greater<>> thresholds(s.begin(), s.end());
    double pos = 0.0;
    for (int v : y) pos += v;
    double area = 0.0, prev_recall = 0.0;
    for (double t : thresholds) {
        double tp = 0.0, called = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] >= t) {
                called += 1.0;
                tp += y[i];
            }
        }
        const double recall = tp / pos;
        area += (recall - prev_recall) * (tp / called);
        prev_recall = recall;
    }
    return area;
}

LabeledDomain source(std::size_t n, std::size_t g, Rng& rng) {
    LabeledDomain d;
    d.expr.values = random_matrix(n, g, rng);
    for (std::size_t i = 0; i < n; ++i) {
        d.expr.sample_ids.push_back("r" + std::to_string(i));
        d.labels.push_back(static_cast<int>(i % 2));
    }
    for (std::size_t j = 0; j < g; ++j) d.expr.gene_names.push_back("g" + std::to_string(j));
    return d;
}

std::vector<std::vector<double>> read_csv_values(const std::filesystem::path& p, std::vector<std::string>& ids) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        ids.push_back(cell);
        rows.emplace_back();
        while (std::getline(ss, cell, ',')) rows.back().push_back(std::stod(cell));
    }
    return rows;
}

}  // namespace

TEST_CASE("auroc examples") {
    const std::vector<double> s{0.9, 0.8, 0.3, 0.2};
    CHECK(auroc(s, std::vector<int>{1, 1, 0, 0}) == 1.0);
    CHECK(auroc(s, std::vector<int>{0, 0, 1, 1}) == 0.0);
    CHECK(auroc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}) == 0.5);
    CHECK_THROWS_AS(auroc(s, std::vector<int>{1, 1, 1, 1}), DataError);
    CHECK_THROWS(auroc(s, std::vector<int>{1, 0}));
}

TEST_CASE("auroc matches the pairwise count with ties") {
    Rng rng = make_rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s(200);
        std::vector<int> y(200);
        for (std::size_t i = 0; i < 200; ++i) {
            s[i] = static_cast<double>(uniform_index(rng, 30)) / 10.0;
            y[i] = uniform01(rng) < 0.3 ? 1 : 0;
        }
        y[0] = 1;
        y[1] = 0;
        CHECK(std::abs(auroc(s, y) - pair_oracle(s, y)) < 1e-12);
    }
}

TEST_CASE("auroc invariances") {
    Rng rng = make_rng(2);
    std::vector<double> s(100), neg(100), ex(100), aff(100);
    std::vector<int> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        s[i] = normal01(rng);
        y[i] = i % 3 == 0 ? 1 : 0;
        neg[i] = -s[i];
        ex[i] = std::exp(s[i]);
        aff[i] = 3.0 * s[i] - 7.0;
    }
    const double a = auroc(s, y);
    CHECK(auroc(ex, y) == doctest::Approx(a).epsilon(1e-15));
    CHECK(auroc(aff, y) == doctest::Approx(a).epsilon(1e-15));
    CHECK(a + auroc(neg, y) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("aupr") {
    CHECK(aupr(std::vector<double>{0.9, 0.8, 0.3, 0.2}, std::vector<int>{1, 1, 0, 0}) == 1.0);
    for (std::size_t n : {2, 5, 17}) {
        std::vector<double> s(n);
        std::vector<int> y(n, 0);
        for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<double>(n - i);
        y[n - 1] = 1;
        CHECK(aupr(s, y) == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-15));
    }
    CHECK_THROWS(aupr(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}));

    Rng rng = make_rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> s(150);
        std::vector<int> y(150);
        for (std::size_t i = 0; i < 150; ++i) {
            s[i] = trial % 2 ? normal01(rng) : static_cast<double>(uniform_index(rng, 12));
            y[i] = uniform01(rng) < 0.4 ? 1 : 0;
        }
        y[0] = 1;
        CHECK(std::abs(aupr(s, y) - sweep_oracle(s, y)) < 1e-12);
    }
}

TEST_CASE("aupr and prevalence") {
    std::vector<int> y(120, 0);
    for (std::size_t i = 0; i < 120; i += 4) y[i] = 1;
    const double prevalence = 30.0 / 120.0;
    std::vector<double> perfect(120);
    for (std::size_t i = 0; i < 120; ++i) perfect[i] = y[i];
    CHECK(aupr(perfect, y) >= prevalence);

    Rng rng = make_rng(4);
    double total = 0.0;
    for (int shuffle = 0; shuffle < 100; ++shuffle) {
        std::vector<double> s(120);
        for (double& v : s) v = uniform01(rng);
        total += aupr(s, y);
    }
    CHECK(std::abs(total / 100.0 - prevalence) < 0.05);
}

TEST_CASE("evaluate_scores counts classes") {
    const auto r = evaluate_scores(std::vector<double>{0.1, 0.7, 0.4}, std::vector<int>{0, 1, 0});
    CHECK(r.n_pos == 1);
    CHECK(r.n_neg == 2);
    CHECK(r.auroc == 1.0);
    const auto j = nlohmann::json::parse(metrics_json(r, "abc"));
    CHECK(j.at("auroc") == 1.0);
    CHECK(j.at("config_hash") == "abc");
    CHECK_FALSE(j.contains("split"));
    CHECK(nlohmann::json::parse(metrics_json(r, "abc", "target")).at("split") == "target");
}

TEST_CASE("predict_target") {
    Rng rng = make_rng(5);
    const auto model = init_params(ModelSpecs::defaults(6, 4), 5);
    const std::vector<LabeledDomain> sources{source(40, 6, rng), source(30, 6, rng)};
    const Matrix target = random_matrix(12, 6, rng, 2.0);

    const auto a = predict_target(model, target, sources, {16, 1});
    const auto b = predict_target(model, target, sources, {16, 1});
    CHECK(a == b);
    CHECK(a.size() == 12);
    for (double v : a) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    CHECK(predict_target(model, target, sources, {0, 1}) == predict_target(model, target, sources, {0, 2}));
    CHECK(predict_target(model, target, sources, {40, 1}) == predict_target(model, target, sources, {0, 9}));

    const auto refs = draw_references(sources, {16, 3});
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].rows() == 16);
    CHECK(draw_references(sources, {100, 3})[1].rows() == 30);

    ModelBundle plain = model;
    plain.weighted = false;
    const std::vector<LabeledDomain> other{source(10, 6, rng)};
    const auto p1 = predict_target(plain, target, sources, {16, 1});
    CHECK(p1 == predict_target(plain, target, other, {3, 8}));
    const Matrix h = encode(model, target);
    const Matrix p = predict(model, h);
    for (std::size_t i = 0; i < 12; ++i) CHECK(p1[i] == p(i, 0));

    // weighted scores follow h ⊙ mean weight over every reference row
    const Matrix z = target_embeddings(model, target, sources, {0, 0});
    Matrix manual(12, 4);
    for (std::size_t i = 0; i < 12; ++i) {
        std::vector<double> w(4, 0.0);
        std::size_t count = 0;
        for (const auto& s : sources) {
            const Matrix hr = encode(model, s.expr.values);
            for (std::size_t r = 0; r < hr.rows(); ++r) {
                Matrix ht(1, 4), hs(1, 4);
                for (std::size_t c = 0; c < 4; ++c) {
                    ht(0, c) = h(i, c);
                    hs(0, c) = hr(r, c);
                }
                const Matrix wr = gen_weights(model, ht, hs);
                for (std::size_t c = 0; c < 4; ++c) w[c] += wr(0, c);
                ++count;
            }
        }
        for (std::size_t c = 0; c < 4; ++c) manual(i, c) = h(i, c) * w[c] / static_cast<double>(count);
    }
    for (std::size_t e = 0; e < z.size(); ++e) {
        CHECK(z.values()[e] == doctest::Approx(manual.values()[e]).epsilon(1e-12));
    }
}

TEST_CASE("embeddings and scores files round-trip") {
    const auto dir = adadrug::testing::scratch_dir("eval_files");
    Rng rng = make_rng(6);
    const auto model = init_params(ModelSpecs::defaults(6, 4), 6);
    const std::vector<LabeledDomain> sources{source(20, 6, rng)};
    ExpressionMatrix expr = source(9, 6, rng).expr;

    export_embeddings(dir / "h.csv", model, expr, false, sources, {8, 0});
    std::vector<std::string> ids;
    const auto rows = read_csv_values(dir / "h.csv", ids);
    CHECK(ids == expr.sample_ids);
    REQUIRE(rows.size() == 9);
    const Matrix h = encode(model, expr.values);
    for (std::size_t r = 0; r < 9; ++r) {
        REQUIRE(rows[r].size() == 4);
        for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(rows[r][c] - h(r, c)) <= 1e-12 * std::max(1.0, std::abs(h(r, c))));
    }

    export_embeddings(dir / "z.csv", model, expr, true, sources, {8, 0});
    std::vector<std::string> zids;
    const auto zrows = read_csv_values(dir / "z.csv", zids);
    const Matrix z = target_embeddings(model, expr.values, sources, {8, 0});
    for (std::size_t r = 0; r < 9; ++r) CHECK(zrows[r][2] == doctest::Approx(z(r, 2)).epsilon(1e-14));

    const std::vector<double> scores{0.1, 1.0 / 3.0, 0.999999};
    const std::vector<std::string> sid{"a", "b", "c"};
    const std::vector<int> lab{0, 1, 1};
    write_scores(dir / "s.csv", sid, scores, lab);
    const auto t = read_scores(dir / "s.csv");
    CHECK(t.sample_ids == sid);
    CHECK(t.scores == scores);
    CHECK(t.labels == lab);
    write_scores(dir / "u.csv", sid, scores);
    CHECK(read_scores(dir / "u.csv").labels.empty());
    CHECK_THROWS_AS(write_scores(dir / "bad.csv", sid, std::vector<double>{0.1}), ShapeError);
}
