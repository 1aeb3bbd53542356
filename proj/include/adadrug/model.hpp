#pragma once

#include "adadrug/matrix.hpp"
#include "adadrug/tape.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adadrug {

enum class Activation : std::uint8_t { None, Relu, Sigmoid };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

/// Fully connected network shape. `widths` lists input, hidden and output widths,
/// so a single affine layer has two entries. Hidden layers always use relu.
struct MlpSpec {
    std::vector<std::size_t> widths;
    Activation output = Activation::None;

    std::size_t input() const { return widths.front(); }
    std::size_t output_width() const { return widths.back(); }
    std::size_t layer_count() const { return widths.size() - 1; }
    /// Throws ContractError when there is no layer or a width is zero.
    void validate(const std::string& name) const;

    bool operator==(const MlpSpec&) const = default;
};

struct ModelSpecs {
    MlpSpec encoder;
    MlpSpec decoder;
    MlpSpec generator;
    MlpSpec discriminator;
    MlpSpec predictor;

    /// Encoder G→256→d, decoder d→256→G, generator d→d→d (relu output),
    /// discriminator and predictor d→64→1 (sigmoid output).
    static ModelSpecs defaults(std::size_t genes, std::size_t latent = 128);
    /// Same layout with configurable hidden widths.
    static ModelSpecs make(std::size_t genes, std::size_t latent, std::span<const std::size_t> encoder_hidden,
                           std::span<const std::size_t> decoder_hidden, std::span<const std::size_t> generator_hidden,
                           std::span<const std::size_t> discriminator_hidden,
                           std::span<const std::size_t> predictor_hidden);

    std::size_t genes() const { return encoder.input(); }
    std::size_t latent() const { return encoder.output_width(); }

    /// Checks every component and that the latent widths line up.
    void validate() const;

    bool operator==(const ModelSpecs&) const = default;
};

struct Layer {
    Matrix weight;  // fan_in × fan_out
    Matrix bias;    // 1 × fan_out
};

struct Mlp {
    MlpSpec spec;
    std::vector<Layer> layers;
};

/// Parameters of encoder, decoder, weight generator, discriminator and predictor.
struct ModelBundle {
    ModelSpecs specs;
    Mlp encoder;
    Mlp decoder;
    Mlp generator;
    Mlp discriminator;
    Mlp predictor;
    /// False for models trained without the weight generator; inference then scores h directly.
    bool weighted = true;

    std::size_t genes() const { return specs.genes(); }
    std::size_t latent() const { return specs.latent(); }

    /// All parameter matrices in declared order: encoder, decoder, generator,
    /// discriminator, predictor; per layer weight then bias.
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
    std::vector<std::string> parameter_names() const;
};

/// He-uniform weights in ±sqrt(6/fan_in), zero biases. Deterministic in `seed`.
ModelBundle init_params(const ModelSpecs& specs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Tape-bound forward passes (training and gradient checks).

struct BoundMlp {
    const MlpSpec* spec = nullptr;
    std::vector<Var> weights;
    std::vector<Var> biases;

    Var forward(Var x) const;
};

struct BoundModel {
    BoundMlp encoder;
    BoundMlp decoder;
    BoundMlp generator;
    BoundMlp discriminator;
    BoundMlp predictor;

    /// Same order as ModelBundle::parameters().
    std::vector<Var> parameters() const;
};

/// Puts every parameter matrix on the tape, as variables when `trainable`.
/// The bundle must outlive the returned handles' use of its specs.
BoundModel bind(Tape& tape, const ModelBundle& model, bool trainable = true);

Var encode(const BoundModel& m, Var x);
Var decode(const BoundModel& m, Var z);
/// w = F(|h_target - h_source|), one weight row per (target, source) row pair.
Var gen_weights(const BoundModel& m, Var h_target, Var h_source);
/// z = h ⊙ w
Var apply_weights(Var h, Var w);
/// Elementwise mean of K ≥ 1 equally shaped weight matrices.
Var mean_target_weight(std::span<const Var> weights);
Var discriminate(const BoundModel& m, Var z);
Var predict(const BoundModel& m, Var z);

// ---------------------------------------------------------------------------
// Tape-free forward passes (inference). Bitwise equal to the tape versions.

Matrix forward(const Mlp& mlp, const Matrix& x);
Matrix encode(const ModelBundle& m, const Matrix& x);
Matrix decode(const ModelBundle& m, const Matrix& z);
Matrix gen_weights(const ModelBundle& m, const Matrix& h_target, const Matrix& h_source);
Matrix apply_weights(const Matrix& h, const Matrix& w);
Matrix mean_target_weight(std::span<const Matrix> weights);
Matrix discriminate(const ModelBundle& m, const Matrix& z);
Matrix predict(const ModelBundle& m, const Matrix& z);

}  // namespace adadrug
