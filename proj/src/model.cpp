#include "adadrug/model.hpp"

#include "adadrug/error.hpp"
#include "adadrug/rng.hpp"

#include <cmath>

namespace adadrug {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::None: return "none";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "?";
}

Activation parse_activation(const std::string& name) {
    if (name == "none") return Activation::None;
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw ContractError("unknown activation '" + name + "'");
}

void MlpSpec::validate(const std::string& name) const {
    if (widths.size() < 2) {
        throw ContractError(name + ": needs at least one layer");
    }
    for (std::size_t w : widths) {
        if (w == 0) {
            throw ContractError(name + ": layer widths must be positive");
        }
    }
}

namespace {

std::vector<std::size_t> chain(std::size_t in, std::span<const std::size_t> hidden, std::size_t out) {
    std::vector<std::size_t> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

}  // namespace

ModelSpecs ModelSpecs::make(std::size_t genes, std::size_t latent, std::span<const std::size_t> encoder_hidden,
                            std::span<const std::size_t> decoder_hidden, std::span<const std::size_t> generator_hidden,
                            std::span<const std::size_t> discriminator_hidden,
                            std::span<const std::size_t> predictor_hidden) {
    ModelSpecs s;
    s.encoder = {chain(genes, encoder_hidden, latent), Activation::None};
    s.decoder = {chain(latent, decoder_hidden, genes), Activation::None};
    s.generator = {chain(latent, generator_hidden, latent), Activation::Relu};
    s.discriminator = {chain(latent, discriminator_hidden, 1), Activation::Sigmoid};
    s.predictor = {chain(latent, predictor_hidden, 1), Activation::Sigmoid};
    return s;
}

ModelSpecs ModelSpecs::defaults(std::size_t genes, std::size_t latent) {
    const std::size_t ae[] = {256};
    const std::size_t gen[] = {latent};
    const std::size_t head[] = {64};
    return make(genes, latent, ae, ae, gen, head, head);
}

void ModelSpecs::validate() const {
    encoder.validate("encoder");
    decoder.validate("decoder");
    generator.validate("generator");
    discriminator.validate("discriminator");
    predictor.validate("predictor");
    const std::size_t d = latent();
    if (decoder.input() != d || generator.input() != d || generator.output_width() != d ||
        discriminator.input() != d || predictor.input() != d) {
        throw ContractError("component widths do not agree on the latent dimension " + std::to_string(d));
    }
    if (decoder.output_width() != genes()) {
        throw ContractError("decoder output width must equal the encoder input width");
    }
    if (discriminator.output_width() != 1 || predictor.output_width() != 1) {
        throw ContractError("discriminator and predictor must have a single output");
    }
}

namespace {

template <typename Bundle, typename F>
void for_each_mlp(Bundle& b, F f) {
    f(b.encoder, "encoder");
    f(b.decoder, "decoder");
    f(b.generator, "generator");
    f(b.discriminator, "discriminator");
    f(b.predictor, "predictor");
}

Mlp init_mlp(const MlpSpec& spec, Rng& rng) {
    Mlp mlp{spec, {}};
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const std::size_t fan_in = spec.widths[l];
        const std::size_t fan_out = spec.widths[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        Layer layer{Matrix(fan_in, fan_out), Matrix(1, fan_out)};
        for (double& v : layer.weight.values()) {
            v = (2.0 * uniform01(rng) - 1.0) * bound;
        }
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

}  // namespace

std::vector<Matrix*> ModelBundle::parameters() {
    std::vector<Matrix*> out;
    for_each_mlp(*this, [&](Mlp& m, const char*) {
        for (auto& l : m.layers) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
        }
    });
    return out;
}

std::vector<const Matrix*> ModelBundle::parameters() const {
    std::vector<const Matrix*> out;
    for_each_mlp(*this, [&](const Mlp& m, const char*) {
        for (const auto& l : m.layers) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
        }
    });
    return out;
}

std::vector<std::string> ModelBundle::parameter_names() const {
    std::vector<std::string> out;
    for_each_mlp(*this, [&](const Mlp& m, const char* name) {
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            out.push_back(std::string(name) + "." + std::to_string(l) + ".weight");
            out.push_back(std::string(name) + "." + std::to_string(l) + ".bias");
        }
    });
    return out;
}

ModelBundle init_params(const ModelSpecs& specs, std::uint64_t seed) {
    specs.validate();
    ModelBundle b;
    b.specs = specs;
    // One stream per component so changing one architecture leaves the others' draws intact.
    Rng enc = make_rng(seed, {0}), dec = make_rng(seed, {1}), gen = make_rng(seed, {2}), dis = make_rng(seed, {3}),
        pre = make_rng(seed, {4});
    b.encoder = init_mlp(specs.encoder, enc);
    b.decoder = init_mlp(specs.decoder, dec);
    b.generator = init_mlp(specs.generator, gen);
    b.discriminator = init_mlp(specs.discriminator, dis);
    b.predictor = init_mlp(specs.predictor, pre);
    return b;
}

// ---------------------------------------------------------------------------

namespace {

Var activate(Var x, Activation a) {
    switch (a) {
        case Activation::None: return x;
        case Activation::Relu: return relu(x);
        case Activation::Sigmoid: return sigmoid(x);
    }
    return x;
}

void activate_inplace(Matrix& x, Activation a) {
    switch (a) {
        case Activation::None: break;
        case Activation::Relu: kernels::relu_inplace(x); break;
        case Activation::Sigmoid: kernels::sigmoid_inplace(x); break;
    }
}

void check_input(const MlpSpec& spec, std::size_t cols, const char* what) {
    if (cols != spec.input()) {
        throw ShapeError(std::string(what) + ": input has " + std::to_string(cols) + " columns, expected " +
                         std::to_string(spec.input()));
    }
}

BoundMlp bind_mlp(Tape& tape, const Mlp& mlp, bool trainable) {
    BoundMlp b{&mlp.spec, {}, {}};
    for (const auto& l : mlp.layers) {
        b.weights.push_back(trainable ? tape.variable(l.weight) : tape.constant(l.weight));
        b.biases.push_back(trainable ? tape.variable(l.bias) : tape.constant(l.bias));
    }
    return b;
}

}  // namespace

Var BoundMlp::forward(Var x) const {
    check_input(*spec, x.cols(), "mlp");
    Var h = x;
    const std::size_t n = weights.size();
    for (std::size_t l = 0; l < n; ++l) {
        h = add_bias(matmul(h, weights[l]), biases[l]);
        h = activate(h, l + 1 < n ? Activation::Relu : spec->output);
    }
    return h;
}

std::vector<Var> BoundModel::parameters() const {
    std::vector<Var> out;
    for (const BoundMlp* m : {&encoder, &decoder, &generator, &discriminator, &predictor}) {
        for (std::size_t l = 0; l < m->weights.size(); ++l) {
            out.push_back(m->weights[l]);
            out.push_back(m->biases[l]);
        }
    }
    return out;
}

BoundModel bind(Tape& tape, const ModelBundle& model, bool trainable) {
    return {bind_mlp(tape, model.encoder, trainable), bind_mlp(tape, model.decoder, trainable),
            bind_mlp(tape, model.generator, trainable), bind_mlp(tape, model.discriminator, trainable),
            bind_mlp(tape, model.predictor, trainable)};
}

Var encode(const BoundModel& m, Var x) { return m.encoder.forward(x); }
Var decode(const BoundModel& m, Var z) { return m.decoder.forward(z); }

Var gen_weights(const BoundModel& m, Var h_target, Var h_source) {
    return m.generator.forward(abs(sub(h_target, h_source)));
}

Var apply_weights(Var h, Var w) { return ewmul(h, w); }

Var mean_target_weight(std::span<const Var> weights) {
    if (weights.empty()) {
        throw ContractError("mean_target_weight: empty weight list");
    }
    Var sum = weights[0];
    for (std::size_t k = 1; k < weights.size(); ++k) {
        sum = add(sum, weights[k]);
    }
    return scale(sum, 1.0 / static_cast<double>(weights.size()));
}

Var discriminate(const BoundModel& m, Var z) { return m.discriminator.forward(z); }
Var predict(const BoundModel& m, Var z) { return m.predictor.forward(z); }

// ---------------------------------------------------------------------------

Matrix forward(const Mlp& mlp, const Matrix& x) {
    check_input(mlp.spec, x.cols(), "mlp");
    Matrix h = x;
    const std::size_t n = mlp.layers.size();
    for (std::size_t l = 0; l < n; ++l) {
        h = kernels::matmul(h, mlp.layers[l].weight);
        kernels::add_row_inplace(h, mlp.layers[l].bias);
        activate_inplace(h, l + 1 < n ? Activation::Relu : mlp.spec.output);
    }
    return h;
}

Matrix encode(const ModelBundle& m, const Matrix& x) { return forward(m.encoder, x); }
Matrix decode(const ModelBundle& m, const Matrix& z) { return forward(m.decoder, z); }

Matrix gen_weights(const ModelBundle& m, const Matrix& h_target, const Matrix& h_source) {
    if (!h_target.same_shape(h_source)) {
        throw ShapeError("gen_weights: " + h_target.shape() + " vs " + h_source.shape());
    }
    Matrix diff(h_target.rows(), h_target.cols());
    auto t = h_target.values();
    auto s = h_source.values();
    auto d = diff.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(t[i] - s[i]);
    return forward(m.generator, diff);
}

Matrix apply_weights(const Matrix& h, const Matrix& w) {
    if (!h.same_shape(w)) {
        throw ShapeError("apply_weights: " + h.shape() + " vs " + w.shape());
    }
    Matrix z = h;
    auto zv = z.values();
    auto wv = w.values();
    for (std::size_t i = 0; i < zv.size(); ++i) zv[i] *= wv[i];
    return z;
}

Matrix mean_target_weight(std::span<const Matrix> weights) {
    if (weights.empty()) {
        throw ContractError("mean_target_weight: empty weight list");
    }
    Matrix sum = weights[0];
    for (std::size_t k = 1; k < weights.size(); ++k) {
        if (!weights[k].same_shape(sum)) {
            throw ShapeError("mean_target_weight: " + sum.shape() + " vs " + weights[k].shape());
        }
        auto dst = sum.values();
        auto src = weights[k].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(weights.size());
    for (double& v : sum.values()) v = inv * v;
    return sum;
}

Matrix discriminate(const ModelBundle& m, const Matrix& z) { return forward(m.discriminator, z); }
Matrix predict(const ModelBundle& m, const Matrix& z) { return forward(m.predictor, z); }

}  // namespace adadrug
