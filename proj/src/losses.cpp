#include "adadrug/losses.hpp"

#include "adadrug/error.hpp"

#include <cmath>

namespace adadrug {

LossParts LossTerms::values() const {
    return {reco.scalar(), ind.scalar(), adv.scalar(), cls.scalar(), total.scalar()};
}

namespace {

Var batch_mean_sq_error(Var a, Var b, const char* what) {
    if (!a.value().same_shape(b.value())) {
        throw ShapeError(std::string(what) + ": " + a.value().shape() + " vs " + b.value().shape());
    }
    Var diff = sub(a, b);
    return scale(sum_all(ewmul(diff, diff)), 1.0 / static_cast<double>(a.rows()));
}

}  // namespace

Var reco_loss(std::span<const Var> decoded_sources, std::span<const Var> x_sources, std::optional<Var> decoded_target,
              std::optional<Var> x_target) {
    if (decoded_sources.size() != x_sources.size() || decoded_sources.empty()) {
        throw ShapeError("reco_loss: " + std::to_string(decoded_sources.size()) + " reconstructions for " +
                         std::to_string(x_sources.size()) + " source batches");
    }
    if (decoded_target.has_value() != x_target.has_value()) {
        throw ContractError("reco_loss: target reconstruction and target input must be given together");
    }
    Var total = batch_mean_sq_error(decoded_sources[0], x_sources[0], "reco_loss");
    for (std::size_t k = 1; k < decoded_sources.size(); ++k) {
        total = add(total, batch_mean_sq_error(decoded_sources[k], x_sources[k], "reco_loss"));
    }
    if (decoded_target) {
        total = add(total, batch_mean_sq_error(*decoded_target, *x_target, "reco_loss"));
    }
    return total;
}

Var ind_loss(std::span<const Var> weights) {
    if (weights.empty()) {
        throw ContractError("ind_loss: needs at least one weight matrix");
    }
    const std::size_t batch = weights[0].rows();
    for (Var w : weights) {
        if (!w.value().same_shape(weights[0].value())) {
            throw ShapeError("ind_loss: " + weights[0].value().shape() + " vs " + w.value().shape());
        }
    }
    // Entry (k, l) of WWᵀ for every tuple at once is the row-wise dot product of w_k and w_l.
    std::optional<Var> acc;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            Var gram = row_sum(ewmul(weights[k], weights[l]));
            Var residual = k == l ? add_scalar(gram, -1.0) : gram;
            Var sq = sum_all(ewmul(residual, residual));
            acc = acc ? add(*acc, sq) : sq;
        }
    }
    return scale(*acc, 0.5 / static_cast<double>(batch));
}

Var adv_loss(std::span<const Var> source_probs, std::optional<Var> target_probs) {
    if (source_probs.empty()) {
        throw ContractError("adv_loss: needs at least one source batch");
    }
    std::size_t items = 0;
    std::optional<Var> log_lik;
    auto accumulate = [&](Var term, std::size_t n) {
        log_lik = log_lik ? add(*log_lik, term) : term;
        items += n;
    };
    for (Var p : source_probs) {
        if (p.cols() != 1) {
            throw ShapeError("adv_loss: probabilities must be a column, got " + p.value().shape());
        }
        accumulate(sum_all(log(clamp(p, kProbClamp, 1.0 - kProbClamp))), p.rows());
    }
    if (target_probs) {
        Var p = *target_probs;
        if (p.cols() != 1) {
            throw ShapeError("adv_loss: probabilities must be a column, got " + p.value().shape());
        }
        Var one_minus = add_scalar(scale(clamp(p, kProbClamp, 1.0 - kProbClamp), -1.0), 1.0);
        accumulate(sum_all(log(one_minus)), p.rows());
    }
    return scale(*log_lik, -1.0 / static_cast<double>(items));
}

Var cls_loss(std::span<const Var> probs, std::span<const Var> labels) {
    if (probs.size() != labels.size() || probs.empty()) {
        throw ShapeError("cls_loss: " + std::to_string(probs.size()) + " prediction columns for " +
                         std::to_string(labels.size()) + " label columns");
    }
    Var total = batch_mean_sq_error(labels[0], probs[0], "cls_loss");
    for (std::size_t k = 1; k < probs.size(); ++k) {
        total = add(total, batch_mean_sq_error(labels[k], probs[k], "cls_loss"));
    }
    return total;
}

Var total_loss(Var reco, Var ind, Var adv, Var cls) {
    return add(add(add(reco, ind), adv), cls);
}

namespace {

double gram_residual_sq(const Matrix& w) {
    const std::size_t k = w.rows();
    Matrix gram(k, k);
    kernels::matmul_nt_acc(w, w, gram);
    double sq = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double e = gram(i, j) - (i == j ? 1.0 : 0.0);
            sq += e * e;
        }
    }
    return sq;
}

}  // namespace

double independence_penalty(const Matrix& w) { return 0.5 * gram_residual_sq(w); }

double orthonormality_gap(const Matrix& w) { return std::sqrt(gram_residual_sq(w)); }

}  // namespace adadrug
