#include "support.hpp"

#include "adadrug/error.hpp"
#include "adadrug/matrix.hpp"
#include "adadrug/tape.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace adadrug;
using adadrug::testing::check_gradients;
using adadrug::testing::random_matrix;

TEST_CASE("matrix basics") {
    Matrix a{{1, 2, 3}, {4, 5, 6}};
    CHECK(a.rows() == 2);
    CHECK(a.cols() == 3);
    CHECK(a(1, 2) == 6);
    CHECK(a.transposed()(2, 1) == 6);
    CHECK(Matrix::identity(2) == Matrix{{1, 0}, {0, 1}});
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), ShapeError);

    const std::vector<std::size_t> rows{1};
    CHECK(a.select_rows(rows) == Matrix{{4, 5, 6}});
    const std::vector<std::size_t> cols{2, 0};
    CHECK(a.select_cols(cols) == Matrix{{3, 1}, {6, 4}});
    const std::vector<Matrix> parts{Matrix{{1, 2}}, Matrix{{3, 4}, {5, 6}}};
    CHECK(vstack(parts) == Matrix{{1, 2}, {3, 4}, {5, 6}});
}

TEST_CASE("matmul hand case and shape errors") {
    Tape tape;
    Var a = tape.variable(Matrix{{1, 2}, {3, 4}});
    Var b = tape.variable(Matrix{{5, 6}, {7, 8}});
    CHECK(matmul(a, b).value() == Matrix{{19, 22}, {43, 50}});
    Var c = tape.variable(Matrix(3, 3));
    CHECK_THROWS_AS(matmul(a, c), ShapeError);
    CHECK_THROWS_AS(add(a, c), ShapeError);
    CHECK_THROWS_AS(ewmul(a, c), ShapeError);
}

TEST_CASE("matmul backward accumulates g*B^T and A^T*g") {
    Tape tape;
    Var a = tape.variable(Matrix{{1, 2}, {3, 4}});
    Var b = tape.variable(Matrix{{5, 6}, {7, 8}});
    tape.backward(sum_all(matmul(a, b)));
    // g = ones(2,2): gA = ones * B^T, gB = A^T * ones
    CHECK(a.grad() == Matrix{{11, 15}, {11, 15}});
    CHECK(b.grad() == Matrix{{4, 4}, {6, 6}});
}

TEST_CASE("elementwise primitive values") {
    Tape tape;
    Var x = tape.variable(Matrix{{-1, 0, 2}});
    CHECK(relu(x).value() == Matrix{{0, 0, 2}});
    CHECK(abs(x).value() == Matrix{{1, 0, 2}});
    CHECK(sigmoid(tape.variable(Matrix{{0.0}})).value()(0, 0) == 0.5);
    CHECK(scale(x, 2.0).value() == Matrix{{-2, 0, 4}});
    CHECK(add_scalar(x, 1.0).value() == Matrix{{0, 1, 3}});
    CHECK(sum_all(x).scalar() == 1.0);
    CHECK(mean_all(x).scalar() == doctest::Approx(1.0 / 3.0));
    CHECK(row_sum(tape.variable(Matrix{{1, 2}, {3, 4}})).value() == Matrix{{3}, {7}});
    CHECK(clamp(x, -0.5, 1.0).value() == Matrix{{-0.5, 0, 1}});
    Var b = tape.variable(Matrix{{10, 20, 30}});
    CHECK(add_bias(tape.variable(Matrix{{1, 1, 1}, {2, 2, 2}}), b).value() == Matrix{{11, 21, 31}, {12, 22, 32}});
}

TEST_CASE("kink subgradients are zero, abs slope sign") {
    Tape tape;
    Var x = tape.variable(Matrix{{-2, 0, 3}});
    tape.backward(sum_all(abs(x)));
    CHECK(x.grad() == Matrix{{-1, 0, 1}});

    Tape t2;
    Var y = t2.variable(Matrix{{-2, 0, 3}});
    t2.backward(sum_all(relu(y)));
    CHECK(y.grad() == Matrix{{0, 0, 1}});
}

TEST_CASE("grad_reverse is identity forward and scales by -lambda backward") {
    Tape tape;
    Var x = tape.variable(Matrix{{1.5, -2.0}});
    Var r = grad_reverse(x, 0.7);
    CHECK(r.value() == x.value());
    tape.backward(sum_all(scale(r, 3.0)));
    CHECK(x.grad()(0, 0) == doctest::Approx(-2.1).epsilon(1e-15));
    CHECK(x.grad()(0, 1) == doctest::Approx(-2.1).epsilon(1e-15));
    CHECK_THROWS_AS(grad_reverse(x, -1.0), ContractError);
}

TEST_CASE("backward needs a scalar loss") {
    Tape tape;
    Var x = tape.variable(Matrix{{1, 2}});
    CHECK_THROWS_AS(tape.backward(x), ContractError);
}

TEST_CASE("constants get no gradient; leaves accumulate across backward calls") {
    Tape tape;
    Var x = tape.variable(Matrix{{2.0}});
    Var c = tape.constant(Matrix{{3.0}});
    Var y = ewmul(x, c);
    tape.backward(y);
    CHECK(x.grad()(0, 0) == 3.0);
    CHECK(c.grad()(0, 0) == 0.0);
    tape.backward(y);
    CHECK(x.grad()(0, 0) == 6.0);
    tape.zero_grads();
    CHECK(x.grad()(0, 0) == 0.0);
}

TEST_CASE("every primitive matches central differences away from kinks") {
    Rng rng = make_rng(11);
    auto fresh = [&] {
        // resample until every entry is clear of the relu/abs/clamp kinks
        for (;;) {
            Matrix m = random_matrix(3, 4, rng);
            bool ok = true;
            for (double v : m.values()) ok = ok && std::abs(v) > 1e-3 && std::abs(v - 0.5) > 1e-3;
            if (ok) return m;
        }
    };
    const std::vector<std::pair<const char*, adadrug::testing::TapeFn>> cases{
        {"matmul", [](Tape&, const std::vector<Var>& v) { return sum_all(matmul(v[0], v[3])); }},
        {"add", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(add(v[0], v[1]), v[2])); }},
        {"sub", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(sub(v[0], v[1]), v[2])); }},
        {"ewmul", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(v[0], v[1])); }},
        {"scale", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(scale(v[0], -1.7), v[1])); }},
        {"add_scalar", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(add_scalar(v[0], 0.3), v[1])); }},
        {"relu", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(relu(v[0]), v[1])); }},
        {"sigmoid", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(sigmoid(v[0]), v[1])); }},
        {"abs", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(abs(v[0]), v[1])); }},
        {"log", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(log(add_scalar(abs(v[0]), 0.5)), v[1])); }},
        {"clamp", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(clamp(v[0], -0.5, 0.5), v[1])); }},
        {"mean_all", [](Tape&, const std::vector<Var>& v) { return mean_all(ewmul(v[0], v[1])); }},
        {"row_sum", [](Tape&, const std::vector<Var>& v) { return sum_all(ewmul(row_sum(v[0]), row_sum(v[1]))); }},
        {"add_bias",
         [](Tape& t, const std::vector<Var>& v) {
             Var bias = matmul(t.constant(Matrix(1, 3, 1.0)), v[2]);  // 1x4 row from v[2]
             return sum_all(ewmul(add_bias(v[0], bias), v[1]));
         }},
    };
    for (const auto& [name, fn] : cases) {
        CAPTURE(name);
        const std::vector<Matrix> inputs{fresh(), fresh(), fresh(), random_matrix(4, 2, rng)};
        const auto r = check_gradients(fn, inputs);
        CHECK(r.min_kink >= 1e-3);
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("grad_reverse gradient is -lambda times the finite-difference slope") {
    Rng rng = make_rng(13);
    const Matrix x0 = random_matrix(3, 4, rng), w = random_matrix(3, 4, rng);
    const double lambda = 0.6, h = 1e-5;
    auto f = [&](const Matrix& x, double lam, Matrix* grad) {
        Tape t;
        Var xv = t.variable(x);
        Var loss = sum_all(ewmul(sigmoid(grad_reverse(xv, lam)), t.constant(w)));
        if (grad) {
            t.backward(loss);
            *grad = xv.grad();
        }
        return loss.scalar();
    };
    Matrix g;
    f(x0, lambda, &g);
    double worst = 0.0;
    for (std::size_t e = 0; e < x0.values().size(); ++e) {
        Matrix up = x0, down = x0;
        up.values()[e] += h;
        down.values()[e] -= h;
        const double numeric = (f(up, lambda, nullptr) - f(down, lambda, nullptr)) / (2 * h);
        worst = std::max(worst, adadrug::testing::rel_error(g.values()[e], -lambda * numeric));
        CHECK(g.values()[e] * numeric <= 0.0);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("composite of primitives matches central differences") {
    Rng rng = make_rng(12);
    auto fn = [](Tape& t, const std::vector<Var>& v) {
        Var h = relu(add_bias(matmul(v[0], v[1]), v[2]));
        Var p = sigmoid(matmul(h, v[3]));
        Var q = clamp(p, 1e-7, 1.0 - 1e-7);
        Var y = t.constant(Matrix{{1}, {0}, {1}});
        return add(mean_all(ewmul(y, log(q))), mean_all(abs(add_scalar(h, -0.3))));
    };
    for (int attempt = 0;; ++attempt) {
        REQUIRE(attempt < 50);
        const std::vector<Matrix> inputs{random_matrix(3, 5, rng), random_matrix(5, 4, rng), random_matrix(1, 4, rng),
                                         random_matrix(4, 1, rng)};
        const auto r = check_gradients(fn, inputs);
        if (r.min_kink < 1e-3) continue;
        CHECK(r.max_rel_error < 1e-4);
        break;
    }
}

TEST_CASE("no NaN for large finite inputs") {
    Tape tape;
    Var x = tape.variable(Matrix{{-9e5, -1.0, 0.0, 1.0, 9e5}});
    CHECK(sigmoid(x).value().all_finite());
    CHECK(log(clamp(sigmoid(x), 1e-7, 1 - 1e-7)).value().all_finite());
    Var s = sigmoid(x);
    CHECK(s.value()(0, 0) >= 0.0);
    CHECK(s.value()(0, 4) <= 1.0);
    tape.backward(sum_all(log(clamp(s, 1e-7, 1 - 1e-7))));
    CHECK(x.grad().all_finite());
}
