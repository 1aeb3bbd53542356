#pragma once

#include "adadrug/matrix.hpp"
#include "adadrug/model.hpp"
#include "adadrug/rng.hpp"
#include "adadrug/tape.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace adadrug::testing {

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (double& v : m.values()) v = scale * normal01(rng);
    return m;
}

/// |a - n| / max(|a|, |n|, floor)
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheck {
    double max_rel_error = 0.0;
    double min_kink = 0.0;
    std::size_t entries = 0;
};

/// Builds f on a fresh tape with `inputs` as variables, compares every input gradient with
/// central differences of step h. The relative-error floor is 1e-6·max(1, |f|).
using TapeFn = std::function<Var(Tape&, const std::vector<Var>&)>;

inline GradCheck check_gradients(const TapeFn& f, std::vector<Matrix> inputs, double h = 1e-5) {
    auto eval = [&](const std::vector<Matrix>& xs) {
        Tape tape;
        std::vector<Var> vars;
        for (const auto& x : xs) vars.push_back(tape.variable(x));
        return f(tape, vars).scalar();
    };
    GradCheck out;
    Tape tape;
    std::vector<Var> vars;
    for (const auto& x : inputs) vars.push_back(tape.variable(x));
    const Var loss = f(tape, vars);
    // central differences carry rounding noise of order eps·|f|/h, so the floor follows |f|
    const double floor = 1e-6 * std::max(1.0, std::abs(loss.scalar()));
    tape.backward(loss);
    out.min_kink = tape.min_kink_distance();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Matrix analytic = vars[i].grad();
        for (std::size_t e = 0; e < inputs[i].values().size(); ++e) {
            double& slot = inputs[i].values()[e];
            const double orig = slot;
            slot = orig + h;
            const double up = eval(inputs);
            slot = orig - h;
            const double down = eval(inputs);
            slot = orig;
            const double numeric = (up - down) / (2.0 * h);
            out.max_rel_error = std::max(out.max_rel_error, rel_error(analytic.values()[e], numeric, floor));
            ++out.entries;
        }
    }
    return out;
}

/// Bound model over `vars`, laid out as ModelBundle::parameters() of `model`.
inline BoundModel bind_vars(const ModelBundle& model, std::span<const Var> vars) {
    BoundModel b;
    std::size_t i = 0;
    auto take = [&](BoundMlp& out, const Mlp& mlp) {
        out.spec = &mlp.spec;
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
            out.weights.push_back(vars[i++]);
            out.biases.push_back(vars[i++]);
        }
    };
    take(b.encoder, model.encoder);
    take(b.decoder, model.decoder);
    take(b.generator, model.generator);
    take(b.discriminator, model.discriminator);
    take(b.predictor, model.predictor);
    return b;
}

inline std::vector<Matrix> parameter_values(const ModelBundle& model) {
    std::vector<Matrix> out;
    for (const Matrix* p : model.parameters()) out.push_back(*p);
    return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("adadrug_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace adadrug::testing
