#pragma once

#include "adadrug/data.hpp"

#include <cstdint>
#include <vector>

namespace adadrug {

// Class-imbalance resampling of a source domain and tuple batching.

/// Per-sample draw probability of the class-balanced sampler: each class gets
/// total mass 1/2, split uniformly among its samples.
std::vector<double> balanced_draw_probabilities(std::span<const int> labels);

struct WeightedSample {
    LabeledDomain domain;
    std::vector<std::size_t> drawn;  // source row of every output row
};

/// Draws `out_n` rows with replacement from the balanced distribution above.
/// Exactly half the draws land in each class (odd `out_n` rounds up); the class
/// sequence is a seeded shuffle and rows are uniform within their class.
/// `out_n == 0` means twice the majority-class size.
WeightedSample weight_upsample(const LabeledDomain& domain, std::size_t out_n, std::uint64_t seed);

struct SmoteRecord {
    std::size_t base;      // row index of x in the input domain
    std::size_t neighbor;  // row index of x'
    double lambda;         // synthetic = x + lambda (x' - x)
};

struct SmoteSample {
    LabeledDomain domain;              // input rows first, then synthetic rows
    std::vector<SmoteRecord> records;  // one per synthetic row, in output order
};

/// Tops the minority class up to the majority size by interpolating each picked
/// minority sample towards one of its k nearest minority neighbours.
/// k is capped at minority size - 1; a minority of one sample is rejected.
SmoteSample smote_upsample(const LabeledDomain& domain, std::size_t k, std::uint64_t seed);

/// Row indices of one mini-batch: `sources[k][i]` and `target[i]` form tuple i.
struct TupleIndices {
    std::vector<std::vector<std::size_t>> sources;
    std::vector<std::size_t> target;
};

/// Materialized mini-batch; labels are B×1 columns.
struct TupleBatch {
    std::vector<Matrix> x_sources;
    std::vector<Matrix> y_sources;
    Matrix x_target;

    std::size_t size() const { return x_target.rows(); }
};

/// Per-epoch tuple pairing. Each domain stream is shuffled independently per
/// epoch and reshuffled when exhausted; an epoch has ceil(largest / B) batches of
/// exactly B tuples.
class BatchSampler {
public:
    /// `domain_sizes`: K source sizes followed by the target size.
    BatchSampler(std::vector<std::size_t> domain_sizes, std::size_t batch_size, std::uint64_t seed);
    explicit BatchSampler(const DomainBundle& bundle, std::size_t batch_size, std::uint64_t seed);

    std::size_t batches_per_epoch() const { return batches_; }
    std::size_t batch_size() const { return batch_size_; }
    std::vector<TupleIndices> epoch(std::size_t epoch_index) const;

private:
    std::vector<std::size_t> sizes_;
    std::size_t batch_size_;
    std::uint64_t seed_;
    std::size_t batches_;
};

TupleBatch make_batch(const DomainBundle& bundle, const TupleIndices& idx);

/// All batches of one epoch.
std::vector<TupleBatch> assemble_batches(const DomainBundle& bundle, std::size_t batch_size, std::uint64_t seed,
                                         std::size_t epoch_index = 0);

}  // namespace adadrug
