#pragma once

#include "adadrug/data.hpp"
#include "adadrug/losses.hpp"
#include "adadrug/model.hpp"
#include "adadrug/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace adadrug {

enum class Sampler : std::uint8_t { None, Weight, Smote };
enum class GrlSchedule : std::uint8_t { Constant, Warmup };

const char* sampler_name(Sampler s);
Sampler parse_sampler(const std::string& name);
const char* grl_schedule_name(GrlSchedule s);
GrlSchedule parse_grl_schedule(const std::string& name);

/// Which objective terms are active. `ind` only has an effect with both `mda` and `awg`.
struct ObjectiveFlags {
    bool mda = true;
    bool ind = true;
    bool awg = true;

    bool operator==(const ObjectiveFlags&) const = default;
};

struct TrainConfig {
    // Architecture. An empty generator_hidden means one hidden layer of width latent_dim.
    std::size_t input_dim = 0;  // 0: take the gene count of the data
    std::size_t latent_dim = 128;
    std::vector<std::size_t> encoder_hidden{256};
    std::vector<std::size_t> decoder_hidden{256};
    std::vector<std::size_t> generator_hidden{};
    std::vector<std::size_t> discriminator_hidden{64};
    std::vector<std::size_t> predictor_hidden{64};
    Activation generator_output = Activation::Relu;

    // Adam
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    std::size_t batch_size = 64;
    std::size_t epochs = 200;

    GrlSchedule grl_schedule = GrlSchedule::Warmup;
    double grl_lambda = 1.0;
    double grl_warmup_fraction = 0.1;

    Sampler sampler = Sampler::Weight;
    std::size_t smote_k = 5;

    ObjectiveFlags flags;
    std::uint64_t seed = 0;
    /// Fraction of each source held out (before resampling) for monitoring only.
    double holdout_fraction = 0.0;

    ModelSpecs specs(std::size_t genes) const;
    /// Throws ValidationError with a JSON pointer naming the offending field.
    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

struct StepRecord {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double grl_lambda = 0.0;
    LossParts parts;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double seconds = 0.0;
    /// Class-balanced discriminator accuracy on a fixed mixed source/target batch; NaN without mda.
    double discriminator_accuracy = 0.0;
    /// Source hold-out AUROC; NaN when nothing is held out.
    double holdout_auroc = 0.0;
};

struct TrainHistory {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
    std::size_t final_step = 0;

    /// CSV with columns step,reco,ind,adv,cls,total.
    void write_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
    ModelBundle model;
    TrainHistory history;
};

/// Adam with bias correction; moments are allocated on the first step.
class Adam {
public:
    Adam(double lr, double beta1, double beta2, double eps);
    void step(std::span<Matrix* const> params, std::span<const Matrix> grads);
    std::size_t steps() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<Matrix> m_, v_;
};

/// Builds the full objective for one tuple batch on `tape`:
/// encode every member; with awg, weight sources by F(|h_T − h_S|) and the target
/// by the mean weight; reconstruction always (target term only with mda);
/// independence with mda+ind+awg; adversarial BCE through a gradient-reversal
/// layer with mda; classification on the source z always.
LossTerms build_objective(Tape& tape, const BoundModel& model, const TupleBatch& batch, const ObjectiveFlags& flags,
                          double grl_lambda);

/// Reversal coefficient for a given global step.
double grl_coefficient(const TrainConfig& cfg, std::size_t step, std::size_t total_steps);

/// Resampled source domains as used for training (holdout removed first).
struct PreparedSources {
    std::vector<LabeledDomain> train;
    std::vector<LabeledDomain> holdout;
};
PreparedSources prepare_sources(const DomainBundle& bundle, const TrainConfig& cfg);

/// Trains from a fresh initialization. Deterministic in cfg.seed.
TrainResult train(const DomainBundle& bundle, const TrainConfig& cfg);

/// Continues from `model` for `epochs` epochs (may be 0); step counting starts at `start_step`.
TrainResult train_from(const DomainBundle& bundle, const TrainConfig& cfg, ModelBundle model, std::size_t start_step,
                       std::size_t epochs);

// ---------------------------------------------------------------------------
// Checkpoints: 8-byte magic, u64 little-endian header length, JSON header,
// then every parameter block as little-endian doubles in declared order.

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    ModelBundle model;
    TrainConfig config;
    std::size_t step = 0;
};

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& model, const TrainConfig& cfg,
                     std::size_t step);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace adadrug
