#include "adadrug/train.hpp"

#include "adadrug/error.hpp"
#include "adadrug/eval.hpp"
#include "adadrug/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

namespace adadrug {

const char* sampler_name(Sampler s) {
    switch (s) {
        case Sampler::None: return "none";
        case Sampler::Weight: return "weight";
        case Sampler::Smote: return "smote";
    }
    return "?";
}

Sampler parse_sampler(const std::string& name) {
    if (name == "none") return Sampler::None;
    if (name == "weight") return Sampler::Weight;
    if (name == "smote") return Sampler::Smote;
    throw ContractError("unknown sampler '" + name + "' (expected none, weight or smote)");
}

const char* grl_schedule_name(GrlSchedule s) {
    return s == GrlSchedule::Constant ? "constant" : "warmup";
}

GrlSchedule parse_grl_schedule(const std::string& name) {
    if (name == "constant") return GrlSchedule::Constant;
    if (name == "warmup") return GrlSchedule::Warmup;
    throw ContractError("unknown lambda schedule '" + name + "' (expected constant or warmup)");
}

ModelSpecs TrainConfig::specs(std::size_t genes) const {
    const std::vector<std::size_t> gen = generator_hidden.empty() ? std::vector<std::size_t>{latent_dim} : generator_hidden;
    ModelSpecs s = ModelSpecs::make(genes, latent_dim, encoder_hidden, decoder_hidden, gen, discriminator_hidden,
                                    predictor_hidden);
    s.generator.output = generator_output;
    return s;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("/learning_rate", "must be a finite non-negative number");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("/beta1", "must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("/beta2", "must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ValidationError("/epsilon", "must be positive");
    if (batch_size < 1) throw ValidationError("/batch_size", "must be at least 1");
    if (epochs < 1) throw ValidationError("/epochs", "must be at least 1");
    if (latent_dim < 1) throw ValidationError("/latent_dim", "must be at least 1");
    if (!(grl_lambda >= 0.0)) throw ValidationError("/grl_lambda", "must be non-negative");
    if (!(grl_warmup_fraction >= 0.0 && grl_warmup_fraction <= 1.0)) {
        throw ValidationError("/grl_warmup_fraction", "must lie in [0, 1]");
    }
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
        throw ValidationError("/holdout_fraction", "must lie in [0, 1)");
    }
    if (smote_k < 1) throw ValidationError("/smote_k", "must be at least 1");
}

// ---------------------------------------------------------------------------

void TrainHistory::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << std::setprecision(17) << "step,reco,ind,adv,cls,total\n";
    for (const auto& s : steps) {
        out << s.step << ',' << s.parts.reco << ',' << s.parts.ind << ',' << s.parts.adv << ',' << s.parts.cls << ','
            << s.parts.total << '\n';
    }
}

Adam::Adam(double lr, double beta1, double beta2, double eps) : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
    if (params.size() != grads.size()) {
        throw ContractError("adam: " + std::to_string(params.size()) + " parameters, " + std::to_string(grads.size()) +
                            " gradients");
    }
    if (m_.empty()) {
        for (const Matrix* p : params) {
            m_.emplace_back(p->rows(), p->cols());
            v_.emplace_back(p->rows(), p->cols());
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i]->values();
        auto g = grads[i].values();
        auto m = m_[i].values();
        auto v = v_[i].values();
        if (g.size() != p.size()) {
            throw ShapeError("adam: gradient " + grads[i].shape() + " for parameter " + params[i]->shape());
        }
        for (std::size_t e = 0; e < p.size(); ++e) {
            m[e] = beta1_ * m[e] + (1.0 - beta1_) * g[e];
            v[e] = beta2_ * v[e] + (1.0 - beta2_) * g[e] * g[e];
            const double mhat = m[e] / c1;
            const double vhat = v[e] / c2;
            p[e] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

// ---------------------------------------------------------------------------

LossTerms build_objective(Tape& tape, const BoundModel& model, const TupleBatch& batch, const ObjectiveFlags& flags,
                          double grl_lambda) {
    const std::size_t k_count = batch.x_sources.size();
    if (k_count == 0 || batch.y_sources.size() != k_count) {
        throw ContractError("tuple batch needs K ≥ 1 source inputs with labels");
    }
    std::vector<Var> x_s, y_s, h_s;
    for (std::size_t k = 0; k < k_count; ++k) {
        x_s.push_back(tape.constant(batch.x_sources[k]));
        y_s.push_back(tape.constant(batch.y_sources[k]));
        h_s.push_back(encode(model, x_s.back()));
    }
    const Var x_t = tape.constant(batch.x_target);
    const Var h_t = encode(model, x_t);

    std::vector<Var> z_s, w_s;
    Var z_t = h_t;
    if (flags.awg) {
        for (std::size_t k = 0; k < k_count; ++k) {
            w_s.push_back(gen_weights(model, h_t, h_s[k]));
            z_s.push_back(apply_weights(h_s[k], w_s.back()));
        }
        z_t = apply_weights(h_t, mean_target_weight(w_s));
    } else {
        z_s = h_s;
    }

    const Var zero = tape.constant(Matrix(1, 1, 0.0));

    std::vector<Var> decoded;
    for (Var z : z_s) decoded.push_back(decode(model, z));
    const Var reco = flags.mda ? reco_loss(decoded, x_s, decode(model, z_t), x_t) : reco_loss(decoded, x_s);

    const Var ind = flags.mda && flags.ind && flags.awg ? ind_loss(w_s) : zero;

    Var adv = zero;
    if (flags.mda) {
        std::vector<Var> d_s;
        for (Var z : z_s) d_s.push_back(discriminate(model, grad_reverse(z, grl_lambda)));
        adv = adv_loss(d_s, discriminate(model, grad_reverse(z_t, grl_lambda)));
    }

    std::vector<Var> p_s;
    for (Var z : z_s) p_s.push_back(predict(model, z));
    const Var cls = cls_loss(p_s, y_s);

    return {reco, ind, adv, cls, total_loss(reco, ind, adv, cls)};
}

double grl_coefficient(const TrainConfig& cfg, std::size_t step, std::size_t total_steps) {
    if (cfg.grl_schedule == GrlSchedule::Constant || cfg.grl_warmup_fraction <= 0.0) {
        return cfg.grl_lambda;
    }
    const double warm = std::ceil(cfg.grl_warmup_fraction * static_cast<double>(total_steps));
    if (warm <= 0.0) return cfg.grl_lambda;
    return cfg.grl_lambda * std::min(1.0, static_cast<double>(step) / warm);
}

PreparedSources prepare_sources(const DomainBundle& bundle, const TrainConfig& cfg) {
    PreparedSources out;
    for (std::size_t k = 0; k < bundle.sources.size(); ++k) {
        const LabeledDomain& src = bundle.sources[k];
        LabeledDomain train_part = src;
        if (cfg.holdout_fraction > 0.0) {
            Rng rng = make_rng(cfg.seed, {0x686f, k});
            std::vector<std::size_t> rows(src.size());
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            shuffle(std::span<std::size_t>(rows), rng);
            const auto n_hold = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * static_cast<double>(rows.size())));
            std::vector<std::size_t> hold(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_hold));
            std::vector<std::size_t> keep(rows.begin() + static_cast<std::ptrdiff_t>(n_hold), rows.end());
            std::sort(hold.begin(), hold.end());
            std::sort(keep.begin(), keep.end());
            LabeledDomain h{src.expr.select_samples(hold), {}};
            for (std::size_t r : hold) h.labels.push_back(src.labels[r]);
            train_part = {src.expr.select_samples(keep), {}};
            for (std::size_t r : keep) train_part.labels.push_back(src.labels[r]);
            out.holdout.push_back(std::move(h));
        }
        const std::uint64_t sseed = derive_seed(cfg.seed, {0x7361, k});
        switch (cfg.sampler) {
            case Sampler::None: break;
            case Sampler::Weight: train_part = weight_upsample(train_part, 0, sseed).domain; break;
            case Sampler::Smote: train_part = smote_upsample(train_part, cfg.smote_k, sseed).domain; break;
        }
        if (train_part.count(0) == 0 || train_part.count(1) == 0) {
            throw DataError("source domain " + std::to_string(k + 1) + " has a single class after sampling");
        }
        out.train.push_back(std::move(train_part));
    }
    return out;
}

namespace {

double discriminator_accuracy(const ModelBundle& model, const TupleBatch& probe, bool weighted) {
    Tape tape;
    const BoundModel m = bind(tape, model, false);
    std::vector<Var> h_s;
    for (const auto& x : probe.x_sources) h_s.push_back(encode(m, tape.constant(x)));
    const Var h_t = encode(m, tape.constant(probe.x_target));
    std::vector<Var> z_s, w_s;
    Var z_t = h_t;
    if (weighted) {
        for (Var h : h_s) {
            w_s.push_back(gen_weights(m, h_t, h));
            z_s.push_back(apply_weights(h, w_s.back()));
        }
        z_t = apply_weights(h_t, mean_target_weight(w_s));
    } else {
        z_s = h_s;
    }
    std::size_t source_hits = 0, source_n = 0, target_hits = 0, target_n = 0;
    for (Var z : z_s) {
        for (double p : discriminate(m, z).value().values()) {
            source_hits += p >= 0.5;
            ++source_n;
        }
    }
    for (double p : discriminate(m, z_t).value().values()) {
        target_hits += p < 0.5;
        ++target_n;
    }
    return 0.5 * (static_cast<double>(source_hits) / static_cast<double>(source_n) +
                  static_cast<double>(target_hits) / static_cast<double>(target_n));
}

}  // namespace

TrainResult train_from(const DomainBundle& bundle, const TrainConfig& cfg, ModelBundle model, std::size_t start_step,
                       std::size_t epochs) {
    bundle.validate();
    if (cfg.input_dim != 0 && cfg.input_dim != bundle.genes()) {
        throw ShapeError("config input_dim " + std::to_string(cfg.input_dim) + " but data has " +
                         std::to_string(bundle.genes()) + " genes");
    }
    if (model.genes() != bundle.genes()) {
        throw ShapeError("model expects " + std::to_string(model.genes()) + " genes, data has " +
                         std::to_string(bundle.genes()));
    }
    const ObjectiveFlags flags = cfg.flags;
    model.weighted = flags.awg;

    PreparedSources prepared = prepare_sources(bundle, cfg);
    DomainBundle data{std::move(prepared.train), bundle.target};

    BatchSampler sampler(data, cfg.batch_size, cfg.seed);
    const std::size_t total_steps = std::max<std::size_t>(1, cfg.epochs * sampler.batches_per_epoch());

    // Fixed mixed batch for tracking the discriminator.
    BatchSampler probe_sampler(data, std::min<std::size_t>(128, cfg.batch_size * 2), derive_seed(cfg.seed, {0x7072}));
    const TupleBatch probe = make_batch(data, probe_sampler.epoch(0).front());

    Adam adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    auto params = model.parameters();

    TrainResult result;
    std::size_t step = start_step;
    for (std::size_t e = 0; e < epochs; ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t epoch_index = start_step / std::max<std::size_t>(1, sampler.batches_per_epoch()) + e;
        for (const auto& idx : sampler.epoch(epoch_index)) {
            const TupleBatch batch = make_batch(data, idx);
            const double lambda = grl_coefficient(cfg, step, total_steps);
            Tape tape;
            const BoundModel bound = bind(tape, model, true);
            const LossTerms terms = build_objective(tape, bound, batch, flags, lambda);
            tape.backward(terms.total);
            const LossParts parts = terms.values();
            if (!std::isfinite(parts.total)) {
                throw Error("training diverged at step " + std::to_string(step) + " (non-finite loss)");
            }
            std::vector<Matrix> grads;
            for (Var p : bound.parameters()) grads.push_back(p.grad());
            adam.step(params, grads);
            result.history.steps.push_back({step, epoch_index, lambda, parts});
            ++step;
        }
        EpochRecord rec;
        rec.epoch = epoch_index;
        rec.discriminator_accuracy =
            flags.mda ? discriminator_accuracy(model, probe, flags.awg) : std::numeric_limits<double>::quiet_NaN();
        rec.holdout_auroc = std::numeric_limits<double>::quiet_NaN();
        if (!prepared.holdout.empty()) {
            std::vector<double> scores;
            std::vector<int> labels;
            PredictOptions opts{32, cfg.seed};
            for (const auto& h : prepared.holdout) {
                if (h.size() == 0) continue;
                auto s = predict_target(model, h.expr.values, data.sources, opts);
                scores.insert(scores.end(), s.begin(), s.end());
                labels.insert(labels.end(), h.labels.begin(), h.labels.end());
            }
            if (std::count(labels.begin(), labels.end(), 1) > 0 && std::count(labels.begin(), labels.end(), 0) > 0) {
                rec.holdout_auroc = auroc(scores, labels);
            }
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(rec);
    }
    result.history.final_step = step;
    result.model = std::move(model);
    return result;
}

TrainResult train(const DomainBundle& bundle, const TrainConfig& cfg) {
    cfg.validate();
    ModelBundle model = init_params(cfg.specs(bundle.genes()), derive_seed(cfg.seed, {0x696e}));
    return train_from(bundle, cfg, std::move(model), 0, cfg.epochs);
}

}  // namespace adadrug
