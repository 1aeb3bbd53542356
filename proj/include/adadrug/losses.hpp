#pragma once

#include "adadrug/matrix.hpp"
#include "adadrug/tape.hpp"

#include <optional>
#include <span>

namespace adadrug {

/// Probabilities entering log() are clamped to [kProbClamp, 1 - kProbClamp].
inline constexpr double kProbClamp = 1e-7;

struct LossParts {
    double reco = 0.0;
    double ind = 0.0;
    double adv = 0.0;
    double cls = 0.0;
    double total = 0.0;
};

/// The four objective terms as tape nodes. Terms switched off by an ablation are
/// exact zero constants, so `total` is bitwise the sum of the remaining ones.
struct LossTerms {
    Var reco;
    Var ind;
    Var adv;
    Var cls;
    Var total;

    LossParts values() const;
};

/// Reconstruction error: Σ_k mean_rows ‖decoded_k − x_k‖² plus the same batch mean for the
/// target pair when given.
Var reco_loss(std::span<const Var> decoded_sources, std::span<const Var> x_sources,
              std::optional<Var> decoded_target = std::nullopt, std::optional<Var> x_target = std::nullopt);

/// Independence penalty. `weights[k]` holds w^{S_k} for every tuple of the batch (B×d);
/// per tuple the K rows form W and the penalty is ½‖WWᵀ − I_K‖_F². Returns the batch mean.
Var ind_loss(std::span<const Var> weights);

/// Domain BCE, source items labeled 1 and target items labeled 0, averaged over all
/// (K+1)·B items. Inputs are B×1 discriminator probabilities.
Var adv_loss(std::span<const Var> source_probs, std::optional<Var> target_probs = std::nullopt);

/// Σ_k mean_rows (y_k − p_k)².
Var cls_loss(std::span<const Var> probs, std::span<const Var> labels);

/// Unweighted ((reco + ind) + adv) + cls.
Var total_loss(Var reco, Var ind, Var adv, Var cls);

/// ½‖WWᵀ − I‖_F² for one K×d matrix, outside the tape.
double independence_penalty(const Matrix& w);
/// ‖WWᵀ − I‖_F for one K×d matrix.
double orthonormality_gap(const Matrix& w);

}  // namespace adadrug
