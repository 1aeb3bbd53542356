#include "adadrug/matrix.hpp"

#include "adadrug/error.hpp"

#include <algorithm>
#include <cmath>

namespace adadrug {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw ShapeError("matrix " + shape() + " given " + std::to_string(values_.size()) + " values");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ShapeError("ragged matrix literal");
        }
        values_.insert(values_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

std::string Matrix::shape() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::fill(double v) {
    std::fill(values_.begin(), values_.end(), v);
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw ShapeError("row index " + std::to_string(indices[i]) + " out of range for " + shape());
        }
        std::copy_n(values_.begin() + indices[i] * cols_, cols_, out.values_.begin() + i * cols_);
    }
    return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> indices) const {
    Matrix out(rows_, indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        if (indices[j] >= cols_) {
            throw ShapeError("column index " + std::to_string(indices[j]) + " out of range for " + shape());
        }
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t j = 0; j < indices.size(); ++j) {
            out(r, j) = (*this)(r, indices[j]);
        }
    }
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out(c, r) = (*this)(r, c);
        }
    }
    return out;
}

Matrix vstack(std::span<const Matrix> parts) {
    if (parts.empty()) {
        return {};
    }
    const std::size_t cols = parts.front().cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols) {
            throw ShapeError("vstack: " + parts.front().shape() + " vs " + p.shape());
        }
        rows += p.rows();
    }
    std::vector<double> values;
    values.reserve(rows * cols);
    for (const auto& p : parts) {
        values.insert(values.end(), p.values().begin(), p.values().end());
    }
    return Matrix(rows, cols, std::move(values));
}

namespace kernels {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape() + " · " + b.shape());
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Matrix out(m, n);
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* po = out.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        double* orow = po + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            if (av == 0.0) {
                continue;
            }
            const double* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    return out;
}

void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    // a: m×k, b: m×n, out: k×n
    if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
        throw ShapeError("matmul_tn: " + a.shape() + "ᵀ · " + b.shape() + " into " + out.shape());
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* po = out.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* brow = pb + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            if (av == 0.0) {
                continue;
            }
            double* orow = po + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
}

void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    // a: m×n, b: k×n, out: m×k
    if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows()) {
        throw ShapeError("matmul_nt: " + a.shape() + " · " + b.shape() + "ᵀ into " + out.shape());
    }
    const std::size_t m = a.rows(), n = a.cols(), k = b.rows();
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* po = out.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double* brow = pb + p * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                acc += arow[j] * brow[j];
            }
            po[i * k + p] += acc;
        }
    }
}

void add_row_inplace(Matrix& x, const Matrix& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols()) {
        throw ShapeError("add_bias: " + x.shape() + " + " + bias.shape());
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] += bias(0, c);
        }
    }
}

void relu_inplace(Matrix& x) {
    for (double& v : x.values()) {
        v = v > 0.0 ? v : 0.0;
    }
}

void sigmoid_inplace(Matrix& x) {
    for (double& v : x.values()) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
}

}  // namespace kernels

}  // namespace adadrug
