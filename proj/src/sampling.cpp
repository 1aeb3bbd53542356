#include "adadrug/sampling.hpp"

#include "adadrug/error.hpp"
#include "adadrug/rng.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace adadrug {

namespace {

struct ClassRows {
    std::vector<std::size_t> rows[2];
};

ClassRows split_classes(std::span<const int> labels) {
    ClassRows c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        c.rows[labels[i] == 1 ? 1 : 0].push_back(i);
    }
    return c;
}

std::string unique_id(const std::string& base, std::unordered_set<std::string>& taken) {
    std::string id = base;
    for (int suffix = 1; taken.contains(id); ++suffix) {
        id = base + "." + std::to_string(suffix);
    }
    taken.insert(id);
    return id;
}

}  // namespace

std::vector<double> balanced_draw_probabilities(std::span<const int> labels) {
    const ClassRows c = split_classes(labels);
    if (c.rows[0].empty() || c.rows[1].empty()) {
        throw DataError("balanced sampling needs both classes present");
    }
    std::vector<double> p(labels.size());
    for (int cls = 0; cls < 2; ++cls) {
        const double each = 0.5 / static_cast<double>(c.rows[cls].size());
        for (std::size_t i : c.rows[cls]) p[i] = each;
    }
    return p;
}

WeightedSample weight_upsample(const LabeledDomain& domain, std::size_t out_n, std::uint64_t seed) {
    domain.validate();
    const ClassRows c = split_classes(domain.labels);
    if (c.rows[0].empty() || c.rows[1].empty()) {
        throw DataError("weight sampling needs both classes present");
    }
    if (out_n == 0) {
        out_n = 2 * std::max(c.rows[0].size(), c.rows[1].size());
    }
    out_n += out_n % 2;

    Rng rng = make_rng(seed, {0x5753});
    std::vector<int> slots(out_n);
    std::fill(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(out_n / 2), 1);
    std::fill(slots.begin() + static_cast<std::ptrdiff_t>(out_n / 2), slots.end(), 0);
    shuffle(std::span<int>(slots), rng);

    WeightedSample out;
    out.drawn.reserve(out_n);
    for (int cls : slots) {
        const auto& rows = c.rows[cls];
        out.drawn.push_back(rows[uniform_index(rng, rows.size())]);
    }
    out.domain.expr = domain.expr.select_samples(out.drawn);
    out.domain.labels.reserve(out_n);
    std::unordered_set<std::string> taken;
    for (std::size_t i = 0; i < out_n; ++i) {
        out.domain.labels.push_back(domain.labels[out.drawn[i]]);
        out.domain.expr.sample_ids[i] = unique_id(domain.expr.sample_ids[out.drawn[i]] + "#" + std::to_string(i), taken);
    }
    return out;
}

SmoteSample smote_upsample(const LabeledDomain& domain, std::size_t k, std::uint64_t seed) {
    domain.validate();
    const ClassRows c = split_classes(domain.labels);
    SmoteSample out{domain, {}};
    if (c.rows[0].size() == c.rows[1].size()) {
        return out;
    }
    const int minority_label = c.rows[1].size() < c.rows[0].size() ? 1 : 0;
    const auto& minority = c.rows[minority_label];
    const std::size_t needed = c.rows[1 - minority_label].size() - minority.size();
    if (minority.size() < 2) {
        throw DataError("SMOTE needs at least two minority samples; use weight sampling instead");
    }
    k = std::min(std::max<std::size_t>(k, 1), minority.size() - 1);

    const Matrix& x = domain.expr.values;
    const std::size_t m = minority.size();
    // k nearest minority neighbours of every minority sample (Euclidean; ties by index).
    std::vector<std::vector<std::size_t>> neighbors(m);
    for (std::size_t a = 0; a < m; ++a) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(m - 1);
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            double d2 = 0.0;
            auto ra = x.row(minority[a]);
            auto rb = x.row(minority[b]);
            for (std::size_t j = 0; j < ra.size(); ++j) d2 += (ra[j] - rb[j]) * (ra[j] - rb[j]);
            dist.emplace_back(d2, b);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t i = 0; i < k; ++i) neighbors[a].push_back(minority[dist[i].second]);
    }

    Rng rng = make_rng(seed, {0x534d});
    Matrix synth(needed, x.cols());
    std::unordered_set<std::string> taken(domain.expr.sample_ids.begin(), domain.expr.sample_ids.end());
    std::vector<std::string> ids;
    for (std::size_t s = 0; s < needed; ++s) {
        const std::size_t a = uniform_index(rng, m);
        const std::size_t base = minority[a];
        const std::size_t nb = neighbors[a][uniform_index(rng, k)];
        const double lambda = uniform01(rng);
        auto rb = x.row(base);
        auto rn = x.row(nb);
        auto dst = synth.row(s);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = rb[j] + lambda * (rn[j] - rb[j]);
        out.records.push_back({base, nb, lambda});
        ids.push_back(unique_id("smote_" + std::to_string(s), taken));
    }

    const Matrix parts[] = {x, synth};
    out.domain.expr.values = vstack(parts);
    out.domain.expr.sample_ids.insert(out.domain.expr.sample_ids.end(), ids.begin(), ids.end());
    out.domain.labels.insert(out.domain.labels.end(), needed, minority_label);
    return out;
}

// ---------------------------------------------------------------------------

BatchSampler::BatchSampler(std::vector<std::size_t> domain_sizes, std::size_t batch_size, std::uint64_t seed)
    : sizes_(std::move(domain_sizes)), batch_size_(batch_size), seed_(seed) {
    if (batch_size_ < 1) {
        throw ContractError("batch size must be at least 1");
    }
    if (sizes_.size() < 2) {
        throw ContractError("batch sampler needs at least one source and the target");
    }
    for (std::size_t s : sizes_) {
        if (s == 0) throw DataError("cannot batch an empty domain");
    }
    const std::size_t largest = *std::max_element(sizes_.begin(), sizes_.end());
    batches_ = (largest + batch_size_ - 1) / batch_size_;
}

namespace {

std::vector<std::size_t> domain_sizes(const DomainBundle& b) {
    std::vector<std::size_t> sizes;
    for (const auto& s : b.sources) sizes.push_back(s.size());
    sizes.push_back(b.target.samples());
    return sizes;
}

}  // namespace

BatchSampler::BatchSampler(const DomainBundle& bundle, std::size_t batch_size, std::uint64_t seed)
    : BatchSampler(domain_sizes(bundle), batch_size, seed) {}

std::vector<TupleIndices> BatchSampler::epoch(std::size_t epoch_index) const {
    const std::size_t draws = batches_ * batch_size_;
    const std::size_t domains = sizes_.size();
    std::vector<std::vector<std::size_t>> streams(domains);
    for (std::size_t d = 0; d < domains; ++d) {
        Rng rng = make_rng(seed_, {0xba7c, epoch_index, d});
        std::vector<std::size_t> perm(sizes_[d]);
        auto& stream = streams[d];
        stream.reserve(draws);
        while (stream.size() < draws) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            shuffle(std::span<std::size_t>(perm), rng);
            const std::size_t take = std::min(perm.size(), draws - stream.size());
            stream.insert(stream.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take));
        }
    }
    std::vector<TupleIndices> batches(batches_);
    for (std::size_t b = 0; b < batches_; ++b) {
        const auto first = static_cast<std::ptrdiff_t>(b * batch_size_);
        const auto last = first + static_cast<std::ptrdiff_t>(batch_size_);
        auto& t = batches[b];
        for (std::size_t d = 0; d + 1 < domains; ++d) {
            t.sources.emplace_back(streams[d].begin() + first, streams[d].begin() + last);
        }
        t.target.assign(streams.back().begin() + first, streams.back().begin() + last);
    }
    return batches;
}

TupleBatch make_batch(const DomainBundle& bundle, const TupleIndices& idx) {
    if (idx.sources.size() != bundle.sources.size()) {
        throw ContractError("tuple indices cover " + std::to_string(idx.sources.size()) + " sources, bundle has " +
                            std::to_string(bundle.sources.size()));
    }
    TupleBatch batch;
    for (std::size_t k = 0; k < idx.sources.size(); ++k) {
        const auto& src = bundle.sources[k];
        const auto& rows = idx.sources[k];
        batch.x_sources.push_back(src.expr.values.select_rows(rows));
        Matrix y(rows.size(), 1);
        for (std::size_t i = 0; i < rows.size(); ++i) y(i, 0) = static_cast<double>(src.labels[rows[i]]);
        batch.y_sources.push_back(std::move(y));
    }
    batch.x_target = bundle.target.values.select_rows(idx.target);
    return batch;
}

std::vector<TupleBatch> assemble_batches(const DomainBundle& bundle, std::size_t batch_size, std::uint64_t seed,
                                         std::size_t epoch_index) {
    BatchSampler sampler(bundle, batch_size, seed);
    std::vector<TupleBatch> out;
    for (const auto& idx : sampler.epoch(epoch_index)) out.push_back(make_batch(bundle, idx));
    return out;
}

}  // namespace adadrug
