#include "support.hpp"

#include "adadrug/error.hpp"
#include "adadrug/sampling.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace adadrug;
using adadrug::testing::random_matrix;

namespace {

LabeledDomain domain(std::size_t pos, std::size_t neg, std::size_t genes, Rng& rng) {
    LabeledDomain d;
    d.expr.values = random_matrix(pos + neg, genes, rng);
    for (std::size_t i = 0; i < pos + neg; ++i) {
        d.expr.sample_ids.push_back("r" + std::to_string(i));
        d.labels.push_back(i < pos ? 1 : 0);
    }
    for (std::size_t g = 0; g < genes; ++g) d.expr.gene_names.push_back("g" + std::to_string(g));
    return d;
}

}  // namespace

TEST_CASE("balanced draw probabilities") {
    const std::vector<int> even{1, 0, 1, 0};
    for (double p : balanced_draw_probabilities(even)) CHECK(p == 0.25);

    std::vector<int> skew(100, 0);
    std::fill(skew.begin(), skew.begin() + 10, 1);
    const auto p = balanced_draw_probabilities(skew);
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < 100; ++i) (skew[i] ? pos : neg) += p[i];
    CHECK(pos == doctest::Approx(0.5));
    CHECK(neg == doctest::Approx(0.5));
    CHECK(p[0] == doctest::Approx(0.05));
    CHECK(p[50] == doctest::Approx(0.5 / 90));
}

TEST_CASE("weight_upsample balances classes and is deterministic") {
    Rng rng = make_rng(1);
    const auto d = domain(10, 90, 3, rng);
    const auto a = weight_upsample(d, 0, 5);
    CHECK(a.domain.size() == 180);
    CHECK(a.domain.count(1) == 90);
    CHECK(a.domain.count(0) == 90);
    CHECK_NOTHROW(a.domain.validate());
    const auto b = weight_upsample(d, 0, 5);
    CHECK(a.drawn == b.drawn);
    CHECK(a.domain.expr.values == b.domain.expr.values);
    const auto odd = weight_upsample(d, 7, 5);
    CHECK(odd.domain.size() == 8);
    CHECK(odd.domain.count(1) == odd.domain.count(0));
    for (std::size_t i = 0; i < a.drawn.size(); ++i) {
        CHECK(a.domain.labels[i] == d.labels[a.drawn[i]]);
        CHECK(std::equal(a.domain.expr.values.row(i).begin(), a.domain.expr.values.row(i).end(),
                         d.expr.values.row(a.drawn[i]).begin()));
    }
}

TEST_CASE("weight_upsample draw frequencies follow the balanced distribution") {
    Rng rng = make_rng(2);
    const auto d = domain(10, 90, 1, rng);
    const auto s = weight_upsample(d, 10000, 9);
    std::map<std::size_t, std::size_t> counts;
    for (std::size_t i : s.drawn) ++counts[i];
    // each minority row has probability 0.05: 500 expected, sd about 22
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(counts[i] > 400);
        CHECK(counts[i] < 600);
    }
    std::size_t majority = 0;
    for (std::size_t i = 10; i < 100; ++i) majority += counts[i];
    CHECK(majority == 5000);
}

TEST_CASE("smote") {
    Rng rng = make_rng(3);
    const auto balanced = domain(5, 5, 2, rng);
    const auto same = smote_upsample(balanced, 5, 1);
    CHECK(same.records.empty());
    CHECK(same.domain.expr.values == balanced.expr.values);

    LabeledDomain two;
    two.expr.gene_names = {"a", "b"};
    two.expr.sample_ids = {"p0", "p1", "n0", "n1", "n2", "n3"};
    two.expr.values = Matrix{{0, 0}, {2, 2}, {5, 1}, {6, 1}, {7, 1}, {8, 1}};
    two.labels = {1, 1, 0, 0, 0, 0};
    const auto s = smote_upsample(two, 1, 4);
    CHECK(s.records.size() == 2);
    CHECK(s.domain.count(1) == 4);
    CHECK(s.domain.count(0) == 4);
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto& r = s.records[i];
        const auto row = s.domain.expr.values.row(6 + i);
        const auto x = two.expr.values.row(r.base), xn = two.expr.values.row(r.neighbor);
        CHECK(r.base != r.neighbor);
        CHECK(r.lambda >= 0.0);
        CHECK(r.lambda <= 1.0);
        for (std::size_t c = 0; c < 2; ++c) CHECK(row[c] == doctest::Approx(x[c] + r.lambda * (xn[c] - x[c])));
        CHECK(row[0] == row[1]);
    }

    LabeledDomain lonely = two;
    lonely.labels = {1, 0, 0, 0, 0, 0};
    CHECK_THROWS(smote_upsample(lonely, 1, 0));
}

TEST_CASE("smote synthetic rows lie on their parent segment") {
    Rng rng = make_rng(5);
    const auto d = domain(8, 40, 6, rng);
    const auto s = smote_upsample(d, 5, 11);
    CHECK(s.domain.count(1) == 40);
    CHECK(s.domain.count(0) == 40);
    CHECK_NOTHROW(s.domain.validate());
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto& r = s.records[i];
        const auto row = s.domain.expr.values.row(d.size() + i);
        const auto a = d.expr.values.row(r.base), b = d.expr.values.row(r.neighbor);
        // distance of row from the line through a and b
        double ab2 = 0.0, t = 0.0;
        for (std::size_t c = 0; c < 6; ++c) {
            ab2 += (b[c] - a[c]) * (b[c] - a[c]);
            t += (row[c] - a[c]) * (b[c] - a[c]);
        }
        t /= ab2;
        double off = 0.0;
        for (std::size_t c = 0; c < 6; ++c) {
            const double e = row[c] - (a[c] + t * (b[c] - a[c]));
            off += e * e;
        }
        CHECK(std::sqrt(off) < 1e-9);
        CHECK(t >= -1e-12);
        CHECK(t <= 1.0 + 1e-12);
        CHECK(d.labels[r.base] == 1);
        CHECK(d.labels[r.neighbor] == 1);
    }
    const auto again = smote_upsample(d, 5, 11);
    CHECK(again.domain.expr.values == s.domain.expr.values);
}

TEST_CASE("batch sampler structure") {
    const BatchSampler s({3, 5}, 2, 7);
    CHECK(s.batches_per_epoch() == 3);
    const auto ep = s.epoch(0);
    CHECK(ep.size() == 3);
    for (const auto& b : ep) {
        CHECK(b.sources.size() == 1);
        CHECK(b.sources[0].size() == 2);
        CHECK(b.target.size() == 2);
    }
    const BatchSampler k2({3, 5, 4}, 2, 7);
    CHECK(k2.batches_per_epoch() == 3);
    for (const auto& b : k2.epoch(0)) {
        CHECK(b.sources.size() == 2);
        for (std::size_t i : b.sources[0]) CHECK(i < 3);
        for (std::size_t i : b.sources[1]) CHECK(i < 5);
        for (std::size_t i : b.target) CHECK(i < 4);
    }
}

TEST_CASE("batch sampler determinism and coverage") {
    const BatchSampler a({6, 12, 9}, 4, 3), b({6, 12, 9}, 4, 3);
    for (std::size_t e = 0; e < 3; ++e) {
        const auto ea = a.epoch(e), eb = b.epoch(e);
        REQUIRE(ea.size() == eb.size());
        for (std::size_t i = 0; i < ea.size(); ++i) {
            CHECK(ea[i].sources == eb[i].sources);
            CHECK(ea[i].target == eb[i].target);
        }
        // the largest domain is visited exactly once per epoch
        std::vector<std::size_t> seen;
        for (const auto& t : ea) seen.insert(seen.end(), t.sources[1].begin(), t.sources[1].end());
        std::sort(seen.begin(), seen.end());
        std::vector<std::size_t> all(12);
        for (std::size_t i = 0; i < 12; ++i) all[i] = i;
        CHECK(seen == all);
    }
    CHECK(a.epoch(0)[0].sources != a.epoch(1)[0].sources);
}

TEST_CASE("make_batch and assemble_batches") {
    Rng rng = make_rng(6);
    DomainBundle bundle;
    bundle.sources = {domain(2, 1, 4, rng), domain(3, 2, 4, rng)};
    bundle.target.values = random_matrix(4, 4, rng);
    bundle.target.gene_names = bundle.sources[0].expr.gene_names;
    bundle.sources[1].expr.gene_names = bundle.target.gene_names;
    for (int i = 0; i < 4; ++i) bundle.target.sample_ids.push_back("t" + std::to_string(i));
    const auto batches = assemble_batches(bundle, 2, 1);
    CHECK(batches.size() == 3);
    const BatchSampler s(bundle, 2, 1);
    const auto idx = s.epoch(0);
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& tb = batches[b];
        CHECK(tb.size() == 2);
        CHECK(tb.x_sources.size() == 2);
        CHECK(tb.y_sources.size() == 2);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(tb.y_sources[k].cols() == 1);
            for (std::size_t i = 0; i < 2; ++i) {
                const std::size_t row = idx[b].sources[k][i];
                CHECK(tb.y_sources[k](i, 0) == bundle.sources[k].labels[row]);
                CHECK(tb.x_sources[k](i, 3) == bundle.sources[k].expr.values(row, 3));
            }
        }
        CHECK(tb.x_target(1, 0) == bundle.target.values(idx[b].target[1], 0));
    }
}
